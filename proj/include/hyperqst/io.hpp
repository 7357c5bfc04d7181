#pragma once

#include "hyperqst/apparatus.hpp"
#include "hyperqst/metrics.hpp"
#include "hyperqst/simulator.hpp"
#include "hyperqst/state_model.hpp"
#include "hyperqst/tomography.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hyperqst {

inline constexpr int SCHEMA_VERSION = 1;

// ---- dataset (text: '#key=value' header lines, then "label,counts,duration")

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// ---- protocol (JSON)

void save_protocol(const std::vector<MeasurementSetting>& settings, int d,
                   const std::string& protocol_id, const TruncationPolicy& trunc,
                   const std::string& path);

struct ProtocolFile {
    std::vector<MeasurementSetting> settings;
    int d = 2;
    std::string protocol_id;
    TruncationPolicy trunc;
};

ProtocolFile load_protocol(const std::string& path);

// ---- experiment configuration (JSON)

struct ProtocolChoice {
    std::string kind = "qubit128"; // qubit128 | qutrit720 | random | file
    uint64_t seed = 7;
    int frames = 10;
    std::string path;
};

struct ExperimentConfig {
    int d = 2;
    HyperStateSpec state;
    BinGrid grid;
    ProtocolChoice protocol;
    FluxModel flux;
    double depolarize_p = 0.0;
    std::optional<double> target_fidelity; // overrides depolarize_p when set
    TruncationPolicy trunc;
    ChainConfig chain;
    ScaleConfig scale;
    uint64_t master_seed = 12345;
};

ExperimentConfig default_config(int d);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

// resolved protocol settings + id for a config
std::pair<std::vector<MeasurementSetting>, std::string>
build_protocol(const ExperimentConfig& cfg);

// ground-truth state for a config (target, then depolarization)
CMat ground_truth(const ExperimentConfig& cfg);

// ---- reconstruction report (JSON)

struct Report {
    int d = 2;
    uint64_t seed = 0;
    std::string protocol_id;
    long n_records = 0;
    double total_counts = 0.0;
    double acceptance_rate = 0.0;
    double step_beta_final = 0.0;
    int n_samples = 0;
    CMat rho_pf, rho_p, rho_f;
    IntervalEstimate fidelity_pf, fidelity_p, fidelity_f;
    IntervalEstimate e_n_pol, i_c_pol, e_n_freq, i_c_freq, e_n_full, i_c_full;
    int li_rank = 0;
    bool li_complete = false;
    double li_trace_distance_to_bayes = 0.0;
    double li_fidelity_psd = 0.0;
    std::optional<double> wall_time_s; // excluded from deterministic outputs
};

std::vector<std::string> basis_labels_full(int d);
std::vector<std::string> basis_labels_pol();
std::vector<std::string> basis_labels_freq(int d);

void save_report(const Report& report, const std::string& path);

// bar-plot-ready table: "label,real,imag" per basis-pair entry
void save_matrix_table(const CMat& rho, const std::vector<std::string>& labels,
                       const std::string& path);

} // namespace hyperqst
