#pragma once

#include <cstdint>
#include <random>

namespace hyperqst {

// Counter-based seed derivation so that independent streams (per record, per
// channel, per chain) can be split deterministically from one master seed.
uint64_t splitmix64(uint64_t& state);
uint64_t derive_seed(uint64_t master, uint64_t index);

// Deterministic random source. The engine is the standardized mt19937_64;
// the distributions are implemented here rather than with std::*_distribution
// because the standard leaves those algorithms unspecified and results would
// not be stable across library versions.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t raw() { return gen_(); }

    // uniform on [0, 1) with 53-bit resolution
    double uniform();

    // uniform on [lo, hi)
    double uniform(double lo, double hi);

    // standard normal via Box-Muller (second value of each pair cached)
    double normal();

    // Poisson with the given mean: Knuth multiplication below mean 10,
    // Hormann's PTRD transformed rejection above
    long poisson(double mean);

  private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace hyperqst
