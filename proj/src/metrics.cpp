#include "hyperqst/metrics.hpp"

#include "hyperqst/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hyperqst {

void Bipartition::validate(size_t n_subsystems) const {
    if (side_a.empty() || side_b.empty())
        throw ValidationError("bipartition: both sides must be nonempty");
    std::vector<bool> seen(n_subsystems, false);
    auto mark = [&](const std::vector<int>& side) {
        for (int s : side) {
            if (s < 0 || static_cast<size_t>(s) >= n_subsystems)
                throw ValidationError("bipartition: subsystem index out of range");
            if (seen[s]) throw ValidationError("bipartition: sides are not disjoint");
            seen[s] = true;
        }
    };
    mark(side_a);
    mark(side_b);
    for (bool s : seen)
        if (!s) throw ValidationError("bipartition: sides must cover the layout");
}

CMat reduce_to_dof(const CMat& rho_pf, int d, Dof dof) {
    std::vector<int> dims{2, 2, d, d};
    long total = 4L * d * d;
    if (rho_pf.rows() != total || rho_pf.cols() != total)
        throw ValidationError("reduce_to_dof: state does not match the [2,2,d,d] layout");
    if (dof == Dof::Polarization) return partial_trace(rho_pf, dims, {0, 1});
    return partial_trace(rho_pf, dims, {2, 3});
}

double log_negativity(const CMat& rho, const std::vector<int>& dims,
                      const Bipartition& cut) {
    cut.validate(dims.size());
    CMat pt = partial_transpose(rho, dims, cut.side_b);
    double tn = trace_norm(pt);
    return std::max(0.0, std::log2(tn));
}

double coherent_information(const CMat& rho, const std::vector<int>& dims,
                            const Bipartition& cut) {
    cut.validate(dims.size());
    double s_ab = entropy(rho);
    double s_a = entropy(partial_trace(rho, dims, cut.side_a));
    double s_b = entropy(partial_trace(rho, dims, cut.side_b));
    return std::max(s_b - s_ab, s_a - s_ab);
}

IntervalEstimate ensemble_interval(const PosteriorEnsemble& ens,
                                   const std::function<double(const CMat&)>& functional,
                                   const std::string& label) {
    if (ens.samples.empty()) throw ValidationError("ensemble_interval: empty ensemble");
    size_t n = ens.samples.size();
    std::vector<double> vals(n);
    for (size_t i = 0; i < n; ++i) vals[i] = functional(ens.samples[i]);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    if (n > 1) {
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n - 1);
    }
    IntervalEstimate est;
    est.mean = mean;
    est.std = std::sqrt(var);
    est.label = label;
    bool percent = label.find("fidelity") != std::string::npos;
    est.formatted = format_mean_std(mean, est.std, percent);
    return est;
}

std::string format_mean_std(double mean, double std, bool percent) {
    if (percent) {
        mean *= 100.0;
        std *= 100.0;
    }
    char buf[64];
    if (!(std > 0.0)) {
        std::snprintf(buf, sizeof(buf), "%.4g(0)%s", mean, percent ? "%" : "");
        return buf;
    }
    int e = static_cast<int>(std::floor(std::log10(std)));
    int digit = static_cast<int>(std::lround(std / std::pow(10.0, e)));
    if (digit >= 10) {
        digit = 1;
        ++e;
    }
    int decimals = std::max(0, -e);
    std::snprintf(buf, sizeof(buf), "%.*f(%d)%s", decimals, mean, digit, percent ? "%" : "");
    return buf;
}

Bipartition dof_cut() {
    return Bipartition{{0}, {1}};
}

Bipartition full_pf_cut() {
    return Bipartition{{0, 2}, {1, 3}};
}

} // namespace hyperqst
