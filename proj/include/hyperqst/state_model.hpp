#pragma once

#include "hyperqst/linalg.hpp"

namespace hyperqst {

// Target state parameters: (alpha|HH> + beta|VV>) on polarization, and on
// frequency a sum over gamma_k |k>_I |d-1-k>_S (energy-anticorrelated bins).
struct HyperStateSpec {
    int d = 2;
    Cplx alpha{0.7071067811865475244, 0.0};
    Cplx beta{0.7071067811865475244, 0.0};
    CVec gamma; // length d

    void validate() const;
};

struct BinGrid {
    int d = 2;
    double spacing = 25.0;      // GHz
    double width = 18.0;        // GHz
    double idler_origin = 0.0;  // GHz, metadata only
    double signal_origin = 0.0; // GHz, metadata only

    void validate() const;
};

// uniform amplitudes: alpha = beta = 1/sqrt(2), gamma_k = 1/sqrt(d)
HyperStateSpec uniform_spec(int d);

// single-qubit polarization ket for one of H, V, D, A, R, L
CVec pol_ket(char label);

// normalized ket on layout [2, 2, d, d]
CVec build_target(const HyperStateSpec& spec);

// (1 - p) rho + p I/D
CMat depolarize(const CMat& rho, double p);

// depolarization strength giving fidelity f to a pure target in dimension D
double depol_p_for_fidelity(double f, int D);

// arithmetic progressions of bin center frequencies (idler, signal)
std::pair<RVec, RVec> bin_frequencies(const BinGrid& grid);

} // namespace hyperqst
