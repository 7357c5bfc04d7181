#include "hyperqst/io.hpp"

#include "hyperqst/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hyperqst {

using Json = nlohmann::ordered_json;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << content;
    if (!out) throw ValidationError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json complex_to_json(const Cplx& z) {
    return Json::array({z.real(), z.imag()});
}

Cplx complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2)
        throw ValidationError("expected [re, im] pair in config");
    return Cplx(j[0].get<double>(), j[1].get<double>());
}

Json matrix_block(const CMat& m, const std::vector<std::string>& labels) {
    Json block;
    block["labels"] = labels;
    Json re = Json::array(), im = Json::array();
    for (long r = 0; r < m.rows(); ++r) {
        Json rrow = Json::array(), irow = Json::array();
        for (long c = 0; c < m.cols(); ++c) {
            rrow.push_back(m(r, c).real());
            irow.push_back(m(r, c).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    block["real"] = std::move(re);
    block["imag"] = std::move(im);
    return block;
}

Json interval_block(const IntervalEstimate& est) {
    Json j;
    j["mean"] = est.mean;
    j["std"] = est.std;
    j["formatted"] = est.formatted;
    return j;
}

} // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ostringstream out;
    out << "#schema_version=" << SCHEMA_VERSION << "\n";
    out << "#protocol=" << ds.protocol_id << "\n";
    out << "#d=" << ds.d << "\n";
    for (const auto& [k, v] : ds.metadata) out << "#" << k << "=" << v << "\n";
    for (const auto& rec : ds.records)
        out << rec.setting_label << "," << rec.counts << "," << fmt_double(rec.duration) << "\n";
    write_file(path, out.str());
}

Dataset load_dataset(const std::string& path) {
    std::istringstream in(read_file(path));
    Dataset ds;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ValidationError("dataset header line without '=' at line " + std::to_string(lineno));
            std::string key = line.substr(1, eq - 1);
            std::string val = line.substr(eq + 1);
            if (key == "protocol")
                ds.protocol_id = val;
            else if (key == "d")
                ds.d = std::stoi(val);
            else if (key == "schema_version") {
                if (std::stoi(val) != SCHEMA_VERSION)
                    throw ValidationError("unsupported dataset schema_version " + val);
            } else
                ds.metadata[key] = val;
            continue;
        }
        auto c1 = line.find(',');
        auto c2 = line.rfind(',');
        if (c1 == std::string::npos || c2 == c1)
            throw ValidationError("malformed dataset row at line " + std::to_string(lineno));
        CountRecord rec;
        rec.setting_label = line.substr(0, c1);
        rec.counts = std::stol(line.substr(c1 + 1, c2 - c1 - 1));
        rec.duration = std::stod(line.substr(c2 + 1));
        if (rec.counts < 0)
            throw ValidationError("negative count at line " + std::to_string(lineno));
        ds.records.push_back(std::move(rec));
    }
    if (ds.d < 1) throw ValidationError("dataset missing d header");
    return ds;
}

void save_protocol(const std::vector<MeasurementSetting>& settings, int d,
                   const std::string& protocol_id, const TruncationPolicy& trunc,
                   const std::string& path) {
    Json j;
    j["schema_version"] = SCHEMA_VERSION;
    j["protocol_id"] = protocol_id;
    j["d"] = d;
    j["truncation"] = Json{{"guard_bins", trunc.guard_bins},
                           {"leakage_tolerance", trunc.leakage_tolerance}};
    Json arr = Json::array();
    for (const auto& s : settings) {
        Json e;
        e["label"] = s.label;
        e["pol"] = Json{{"idler", std::string(1, s.pol.idler)},
                        {"signal", std::string(1, s.pol.signal)}};
        Json mi = Json::array(), ms = Json::array();
        for (long i = 0; i < s.mask.idler_phases.size(); ++i) mi.push_back(s.mask.idler_phases(i));
        for (long i = 0; i < s.mask.signal_phases.size(); ++i) ms.push_back(s.mask.signal_phases(i));
        e["mask"] = Json{{"idler_phases", std::move(mi)}, {"signal_phases", std::move(ms)}};
        e["idler_eom"] = Json{{"depth", s.idler_eom.depth}, {"rf_phase", s.idler_eom.rf_phase}};
        e["signal_eom"] = Json{{"depth", s.signal_eom.depth}, {"rf_phase", s.signal_eom.rf_phase}};
        e["out_bins"] = Json::array({s.out_idler, s.out_signal});
        arr.push_back(std::move(e));
    }
    j["settings"] = std::move(arr);
    write_file(path, j.dump(2) + "\n");
}

ProtocolFile load_protocol(const std::string& path) {
    Json j = Json::parse(read_file(path), nullptr, true, true);
    ProtocolFile pf;
    if (j.value("schema_version", 0) != SCHEMA_VERSION)
        throw ValidationError("unsupported protocol schema_version");
    pf.protocol_id = j.value("protocol_id", std::string("custom"));
    pf.d = j.at("d").get<int>();
    if (pf.d < 1) throw ValidationError("protocol: d must be >= 1");
    if (j.contains("truncation")) {
        pf.trunc.guard_bins = j["truncation"].value("guard_bins", 12);
        pf.trunc.leakage_tolerance = j["truncation"].value("leakage_tolerance", 1e-10);
    }
    for (const auto& e : j.at("settings")) {
        MeasurementSetting s;
        s.label = e.at("label").get<std::string>();
        std::string pi = e.at("pol").at("idler").get<std::string>();
        std::string ps = e.at("pol").at("signal").get<std::string>();
        if (pi.size() != 1 || ps.size() != 1)
            throw ValidationError("protocol: polarization labels must be single characters");
        s.pol = PolProjectorSetting{pi[0], ps[0]};
        const auto& mi = e.at("mask").at("idler_phases");
        const auto& ms = e.at("mask").at("signal_phases");
        if (static_cast<int>(mi.size()) != pf.d || static_cast<int>(ms.size()) != pf.d)
            throw ValidationError("protocol: mask length does not match d");
        s.mask.idler_phases = RVec(pf.d);
        s.mask.signal_phases = RVec(pf.d);
        for (int i = 0; i < pf.d; ++i) {
            s.mask.idler_phases(i) = mi[i].get<double>();
            s.mask.signal_phases(i) = ms[i].get<double>();
        }
        s.idler_eom = EomSetting{e.at("idler_eom").at("depth").get<double>(),
                                 e.at("idler_eom").at("rf_phase").get<double>()};
        s.signal_eom = EomSetting{e.at("signal_eom").at("depth").get<double>(),
                                  e.at("signal_eom").at("rf_phase").get<double>()};
        s.out_idler = e.at("out_bins")[0].get<int>();
        s.out_signal = e.at("out_bins")[1].get<int>();
        if (s.out_idler < 0 || s.out_idler >= pf.d || s.out_signal < 0 || s.out_signal >= pf.d)
            throw ValidationError("protocol: out bin out of range");
        pf.settings.push_back(std::move(s));
    }
    return pf;
}

ExperimentConfig default_config(int d) {
    ExperimentConfig cfg;
    cfg.d = d;
    cfg.state = uniform_spec(d);
    cfg.grid = BinGrid{d, 25.0, 18.0, 0.0, 0.0};
    cfg.protocol.kind = (d == 2) ? "qubit128" : (d == 3 ? "qutrit720" : "random");
    cfg.flux.pair_rate = 120.0; // roughly 500 coincidences per Z(x)Z setting at 60 s
    cfg.flux.integration_time = 60.0;
    cfg.flux.accidental_rate = 0.0;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    Json j = Json::parse(read_file(path), nullptr, true, true);
    if (j.value("schema_version", 0) != SCHEMA_VERSION)
        throw ValidationError("unsupported config schema_version");
    int d = j.value("d", 2);
    ExperimentConfig cfg = default_config(d);

    if (j.contains("state")) {
        const auto& s = j["state"];
        if (s.contains("alpha")) cfg.state.alpha = complex_from_json(s["alpha"]);
        if (s.contains("beta")) cfg.state.beta = complex_from_json(s["beta"]);
        if (s.contains("gamma")) {
            if (s["gamma"].is_string()) {
                if (s["gamma"].get<std::string>() != "uniform")
                    throw ValidationError("config: gamma must be \"uniform\" or an array of [re, im]");
            } else {
                const auto& g = s["gamma"];
                if (static_cast<int>(g.size()) != d)
                    throw ValidationError("config: gamma length must equal d");
                cfg.state.gamma = CVec(d);
                for (int i = 0; i < d; ++i) cfg.state.gamma(i) = complex_from_json(g[i]);
            }
        }
        cfg.state.d = d;
        cfg.state.validate();
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        cfg.grid.spacing = g.value("spacing", cfg.grid.spacing);
        cfg.grid.width = g.value("width", cfg.grid.width);
        cfg.grid.idler_origin = g.value("idler_origin", cfg.grid.idler_origin);
        cfg.grid.signal_origin = g.value("signal_origin", cfg.grid.signal_origin);
        cfg.grid.d = d;
        cfg.grid.validate();
    }
    if (j.contains("protocol")) {
        const auto& p = j["protocol"];
        cfg.protocol.kind = p.value("kind", cfg.protocol.kind);
        cfg.protocol.seed = p.value("seed", cfg.protocol.seed);
        cfg.protocol.frames = p.value("frames", cfg.protocol.frames);
        cfg.protocol.path = p.value("path", cfg.protocol.path);
    }
    if (j.contains("flux")) {
        const auto& f = j["flux"];
        cfg.flux.pair_rate = f.value("pair_rate", cfg.flux.pair_rate);
        cfg.flux.integration_time = f.value("integration_time", cfg.flux.integration_time);
        cfg.flux.accidental_rate = f.value("accidental_rate", cfg.flux.accidental_rate);
        cfg.flux.validate();
    }
    if (j.contains("noise")) {
        const auto& n = j["noise"];
        cfg.depolarize_p = n.value("depolarize_p", 0.0);
        if (n.contains("target_fidelity"))
            cfg.target_fidelity = n["target_fidelity"].get<double>();
    }
    if (j.contains("truncation")) {
        cfg.trunc.guard_bins = j["truncation"].value("guard_bins", 12);
        cfg.trunc.leakage_tolerance = j["truncation"].value("leakage_tolerance", 1e-10);
    }
    if (j.contains("chain")) {
        const auto& c = j["chain"];
        cfg.chain.n_samples = c.value("n_samples", cfg.chain.n_samples);
        cfg.chain.burn_in = c.value("burn_in", cfg.chain.burn_in);
        cfg.chain.thinning = c.value("thinning", cfg.chain.thinning);
        cfg.chain.step_beta = c.value("step_beta", cfg.chain.step_beta);
        cfg.chain.seed = c.value("seed", cfg.chain.seed);
        cfg.chain.adapt_beta = c.value("adapt_beta", cfg.chain.adapt_beta);
        std::string mode = c.value("scale_handling", std::string("profile"));
        if (mode == "profile")
            cfg.scale.mode = ScaleHandling::Profile;
        else if (mode == "gamma")
            cfg.scale.mode = ScaleHandling::GammaMarginal;
        else if (mode == "fixed")
            cfg.scale.mode = ScaleHandling::Fixed;
        else
            throw ValidationError("config: unknown scale_handling '" + mode + "'");
        cfg.scale.gamma_shape = c.value("gamma_shape", cfg.scale.gamma_shape);
        cfg.scale.gamma_rate = c.value("gamma_rate", cfg.scale.gamma_rate);
        cfg.scale.fixed_value = c.value("fixed_scale", cfg.scale.fixed_value);
    }
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    return cfg;
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    Json j;
    j["schema_version"] = SCHEMA_VERSION;
    j["d"] = cfg.d;
    Json gamma = Json::array();
    for (long i = 0; i < cfg.state.gamma.size(); ++i)
        gamma.push_back(complex_to_json(cfg.state.gamma(i)));
    j["state"] = Json{{"alpha", complex_to_json(cfg.state.alpha)},
                      {"beta", complex_to_json(cfg.state.beta)},
                      {"gamma", std::move(gamma)}};
    j["grid"] = Json{{"spacing", cfg.grid.spacing},
                     {"width", cfg.grid.width},
                     {"idler_origin", cfg.grid.idler_origin},
                     {"signal_origin", cfg.grid.signal_origin}};
    j["protocol"] = Json{{"kind", cfg.protocol.kind},
                         {"seed", cfg.protocol.seed},
                         {"frames", cfg.protocol.frames},
                         {"path", cfg.protocol.path}};
    j["flux"] = Json{{"pair_rate", cfg.flux.pair_rate},
                     {"integration_time", cfg.flux.integration_time},
                     {"accidental_rate", cfg.flux.accidental_rate}};
    Json noise;
    noise["depolarize_p"] = cfg.depolarize_p;
    if (cfg.target_fidelity) noise["target_fidelity"] = *cfg.target_fidelity;
    j["noise"] = std::move(noise);
    j["truncation"] = Json{{"guard_bins", cfg.trunc.guard_bins},
                           {"leakage_tolerance", cfg.trunc.leakage_tolerance}};
    std::string mode = cfg.scale.mode == ScaleHandling::Profile
                           ? "profile"
                           : (cfg.scale.mode == ScaleHandling::GammaMarginal ? "gamma" : "fixed");
    j["chain"] = Json{{"n_samples", cfg.chain.n_samples},
                      {"burn_in", cfg.chain.burn_in},
                      {"thinning", cfg.chain.thinning},
                      {"step_beta", cfg.chain.step_beta},
                      {"seed", cfg.chain.seed},
                      {"adapt_beta", cfg.chain.adapt_beta},
                      {"scale_handling", mode},
                      {"gamma_shape", cfg.scale.gamma_shape},
                      {"gamma_rate", cfg.scale.gamma_rate},
                      {"fixed_scale", cfg.scale.fixed_value}};
    j["master_seed"] = cfg.master_seed;
    write_file(path, j.dump(2) + "\n");
}

std::pair<std::vector<MeasurementSetting>, std::string>
build_protocol(const ExperimentConfig& cfg) {
    const auto& p = cfg.protocol;
    if (p.kind == "qubit128") {
        if (cfg.d != 2) throw ValidationError("protocol qubit128 requires d = 2");
        return {protocol_qubit128(), "qubit128"};
    }
    if (p.kind == "qutrit720") {
        if (cfg.d != 3) throw ValidationError("protocol qutrit720 requires d = 3");
        char buf[48];
        std::snprintf(buf, sizeof(buf), "qutrit720-seed%llu",
                      static_cast<unsigned long long>(p.seed));
        return {protocol_qutrit720(p.seed), buf};
    }
    if (p.kind == "random") {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "random-d%d-f%d-seed%llu", cfg.d, p.frames,
                      static_cast<unsigned long long>(p.seed));
        return {protocol_random(cfg.d, p.frames, p.seed), buf};
    }
    if (p.kind == "file") {
        ProtocolFile pf = load_protocol(p.path);
        if (pf.d != cfg.d) throw ValidationError("protocol file d does not match config d");
        return {std::move(pf.settings), pf.protocol_id};
    }
    throw ValidationError("unknown protocol kind '" + p.kind + "'");
}

CMat ground_truth(const ExperimentConfig& cfg) {
    CVec target = build_target(cfg.state);
    CMat rho = target * target.adjoint();
    double p = cfg.depolarize_p;
    if (cfg.target_fidelity)
        p = depol_p_for_fidelity(*cfg.target_fidelity, static_cast<int>(rho.rows()));
    return depolarize(rho, p);
}

std::vector<std::string> basis_labels_full(int d) {
    std::vector<std::string> labels;
    labels.reserve(4 * d * d);
    const char* pol = "HV";
    for (int pi = 0; pi < 2; ++pi)
        for (int ps = 0; ps < 2; ++ps)
            for (int fi = 0; fi < d; ++fi)
                for (int fs = 0; fs < d; ++fs) {
                    char buf[40];
                    std::snprintf(buf, sizeof(buf), "%c %c I%d S%d", pol[pi], pol[ps], fi, fs);
                    labels.push_back(buf);
                }
    return labels;
}

std::vector<std::string> basis_labels_pol() {
    return {"H H", "H V", "V H", "V V"};
}

std::vector<std::string> basis_labels_freq(int d) {
    std::vector<std::string> labels;
    labels.reserve(d * d);
    for (int fi = 0; fi < d; ++fi)
        for (int fs = 0; fs < d; ++fs) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "I%d S%d", fi, fs);
            labels.push_back(buf);
        }
    return labels;
}

void save_report(const Report& report, const std::string& path) {
    Json j;
    j["schema_version"] = SCHEMA_VERSION;
    j["kind"] = "reconstruction";
    j["d"] = report.d;
    j["seed"] = report.seed;
    j["protocol_id"] = report.protocol_id;
    j["n_records"] = report.n_records;
    j["total_counts"] = report.total_counts;
    j["chain"] = Json{{"n_samples", report.n_samples},
                      {"acceptance_rate", report.acceptance_rate},
                      {"step_beta_final", report.step_beta_final}};
    j["rho_pf"] = matrix_block(report.rho_pf, basis_labels_full(report.d));
    j["rho_p"] = matrix_block(report.rho_p, basis_labels_pol());
    j["rho_f"] = matrix_block(report.rho_f, basis_labels_freq(report.d));
    j["fidelity"] = Json{{"pf", interval_block(report.fidelity_pf)},
                         {"pol", interval_block(report.fidelity_p)},
                         {"freq", interval_block(report.fidelity_f)}};
    j["entanglement"] = Json{
        {"pol", Json{{"e_n", interval_block(report.e_n_pol)}, {"i_c", interval_block(report.i_c_pol)}}},
        {"freq", Json{{"e_n", interval_block(report.e_n_freq)}, {"i_c", interval_block(report.i_c_freq)}}},
        {"full", Json{{"e_n", interval_block(report.e_n_full)}, {"i_c", interval_block(report.i_c_full)}}}};
    j["linear_inversion"] = Json{{"rank", report.li_rank},
                                 {"complete", report.li_complete},
                                 {"trace_distance_to_bayes", report.li_trace_distance_to_bayes},
                                 {"fidelity_psd", report.li_fidelity_psd}};
    if (report.wall_time_s) j["wall_time_s"] = *report.wall_time_s;
    write_file(path, j.dump(2) + "\n");
}

void save_matrix_table(const CMat& rho, const std::vector<std::string>& labels,
                       const std::string& path) {
    if (static_cast<long>(labels.size()) != rho.rows())
        throw ValidationError("matrix table: label count does not match dimension");
    std::ostringstream out;
    out << "row_label,col_label,real,imag\n";
    for (long r = 0; r < rho.rows(); ++r)
        for (long c = 0; c < rho.cols(); ++c)
            out << labels[r] << "," << labels[c] << "," << fmt_double(rho(r, c).real()) << ","
                << fmt_double(rho(r, c).imag()) << "\n";
    write_file(path, out.str());
}

} // namespace hyperqst
