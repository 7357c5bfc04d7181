#include "hyperqst/simulator.hpp"

#include "hyperqst/errors.hpp"

#include <cmath>
#include <cstdio>

namespace hyperqst {

void FluxModel::validate() const {
    if (pair_rate < 0.0 || integration_time < 0.0 || accidental_rate < 0.0)
        throw ValidationError("flux model: rates and integration time must be >= 0");
}

double expected_rate(const CMat& rho, const CMat& povm, const FluxModel& flux) {
    flux.validate();
    if (rho.rows() != povm.rows() || rho.cols() != povm.cols() || rho.rows() != rho.cols())
        throw ValidationError("expected_rate: dimension mismatch between state and POVM element");
    double p = std::real((povm * rho).trace());
    if (p < 0.0) p = 0.0; // numerical jitter on PSD expectations
    return flux.pair_rate * p + flux.accidental_rate;
}

long sample_counts(double rate, double duration, Rng& rng) {
    if (rate < 0.0) throw ValidationError("sample_counts: rate must be >= 0");
    if (duration < 0.0) throw ValidationError("sample_counts: duration must be >= 0");
    return rng.poisson(rate * duration);
}

Dataset generate_dataset(const CMat& rho, const std::vector<MeasurementSetting>& protocol,
                         const FluxModel& flux, uint64_t seed, int d,
                         const TruncationPolicy& trunc, const std::string& protocol_id) {
    flux.validate();
    if (rho.rows() != 4L * d * d)
        throw ValidationError("generate_dataset: state dimension does not match 4 d^2");

    Dataset ds;
    ds.protocol_id = protocol_id;
    ds.d = d;
    ds.records.reserve(protocol.size());
    for (size_t m = 0; m < protocol.size(); ++m) {
        // expectation through the rank-1 row avoids materializing the full element
        CVec row = joint_kraus_row(protocol[m], d, trunc);
        double p = std::real((row.transpose() * rho * row.conjugate())(0, 0));
        if (p < 0.0) p = 0.0;
        double rate = flux.pair_rate * p + flux.accidental_rate;
        Rng rng(derive_seed(seed, m));
        CountRecord rec;
        rec.setting_label = protocol[m].label;
        rec.counts = sample_counts(rate, flux.integration_time, rng);
        rec.duration = flux.integration_time;
        ds.records.push_back(std::move(rec));
    }

    char buf[64];
    ds.metadata["seed"] = std::to_string(seed);
    std::snprintf(buf, sizeof(buf), "%.17g", flux.pair_rate);
    ds.metadata["pair_rate"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", flux.integration_time);
    ds.metadata["integration_time"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", flux.accidental_rate);
    ds.metadata["accidental_rate"] = buf;
    return ds;
}

} // namespace hyperqst
