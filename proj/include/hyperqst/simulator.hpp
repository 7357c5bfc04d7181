#pragma once

#include "hyperqst/apparatus.hpp"
#include "hyperqst/linalg.hpp"
#include "hyperqst/rng.hpp"

#include <map>
#include <string>
#include <vector>

namespace hyperqst {

struct FluxModel {
    double pair_rate = 0.35;       // detected coincidences per second at unit expectation
    double integration_time = 60.0; // seconds per setting
    double accidental_rate = 0.0;  // background coincidences per second

    void validate() const;
};

struct CountRecord {
    std::string setting_label;
    long counts = 0;
    double duration = 0.0;
};

struct Dataset {
    std::vector<CountRecord> records;
    std::string protocol_id;
    int d = 2;
    std::map<std::string, std::string> metadata;
};

// pair_rate * Tr(E rho) + accidental_rate
double expected_rate(const CMat& rho, const CMat& povm, const FluxModel& flux);

// Poisson sample with mean rate * duration
long sample_counts(double rate, double duration, Rng& rng);

// One CountRecord per setting. Each record uses an independent RNG stream
// derived from the master seed by its index, so the result does not depend on
// evaluation order.
Dataset generate_dataset(const CMat& rho, const std::vector<MeasurementSetting>& protocol,
                         const FluxModel& flux, uint64_t seed, int d,
                         const TruncationPolicy& trunc, const std::string& protocol_id);

} // namespace hyperqst
