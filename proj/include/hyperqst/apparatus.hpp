#pragma once

#include "hyperqst/linalg.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hyperqst {

struct PolProjectorSetting {
    char idler = 'H';
    char signal = 'H';
};

struct EomSetting {
    double depth = 0.0;    // modulation index, radians
    double rf_phase = 0.0; // radians
};

struct ShaperMask {
    RVec idler_phases;  // length d, radians in [0, 2pi)
    RVec signal_phases; // length d
};

ShaperMask zero_mask(int d);

struct MeasurementSetting {
    PolProjectorSetting pol;
    ShaperMask mask;
    EomSetting idler_eom;
    EomSetting signal_eom;
    int out_idler = 0;
    int out_signal = 0;
    std::string label;
};

// Finite section of the infinite bin lattice: guard_bins extra bins on each
// side of the d computational bins; the retained Bessel energy at the largest
// depth in use must be at least 1 - leakage_tolerance.
struct TruncationPolicy {
    int guard_bins = 12;
    double leakage_tolerance = 1e-10;
};

// |a><a| (x) |b><b| on the two polarization qubits, idler first
CMat pol_projector(const PolProjectorSetting& setting);

// conjugated row (<a| (x) <b|) as a length-4 vector
CVec pol_bra(const PolProjectorSetting& setting);

// Bessel function of the first kind, |n| <= 40, |x| <= 10, abs error <= 1e-10
double bessel_j(int n, double x);

// smallest positive root of |J0| = |J1|, bisected to 1e-6
double hadamard_depth();

// lattice_size x lattice_size matrix, entry (m, k) = J_{m-k}(depth) e^{i(m-k)theta}
CMat eom_transfer(const EomSetting& setting, int lattice_size,
                  const TruncationPolicy& trunc);

// diagonal unitary exp(i(phi_idler[j] + phi_signal[k])) on |j>_I |k>_S
CMat shaper_operator(const ShaperMask& mask);

// measurement row on the d^2 joint frequency space: out-bin rows of the two
// EOM transfers times the shaper phases, restricted to computational columns
CVec freq_kraus_row(const MeasurementSetting& setting, int d,
                    const TruncationPolicy& trunc);

// E = K^dag K, PSD, rank 1, eigenvalues within [0, 1 + 1e-9]
CMat freq_povm_element(const MeasurementSetting& setting, int d,
                       const TruncationPolicy& trunc);

// pol bra (x) frequency row on the 4 d^2 space
CVec joint_kraus_row(const MeasurementSetting& setting, int d,
                     const TruncationPolicy& trunc);

// pol_projector (x) freq_povm_element in canonical layout order
CMat joint_povm(const MeasurementSetting& setting, int d,
                const TruncationPolicy& trunc);

// the 16 polarization projection pairs used by the qubit protocol
const std::array<PolProjectorSetting, 16>& pol16_set();

// 16 polarization pairs x (4 Z(x)Z bin pairs, EOMs off; 4 X(x)X bin pairs,
// both EOMs at hadamard_depth, zero RF phase), d = 2
std::vector<MeasurementSetting> protocol_qubit128();

// 8 polarization pairs ({H,V}^2 and {D,A}^2) x 10 random frames (2d shaper
// phases in [0, 2pi), two EOM depths in [0, 2.32]) x d^2 bin pairs, d = 3
std::vector<MeasurementSetting> protocol_qutrit720(uint64_t seed);

// same recipe for arbitrary d and frame count: 8 * frames * d^2 settings
std::vector<MeasurementSetting> protocol_random(int d, int frames, uint64_t seed);

} // namespace hyperqst
