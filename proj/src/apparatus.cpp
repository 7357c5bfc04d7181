#include "hyperqst/apparatus.hpp"

#include "hyperqst/errors.hpp"
#include "hyperqst/rng.hpp"
#include "hyperqst/state_model.hpp"

#include <cmath>
#include <cstdio>

namespace hyperqst {

namespace {

constexpr double TWO_PI = 6.283185307179586476925286766559;

std::string bin_label(int i, int s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "b%d%d", i, s);
    return buf;
}

} // namespace

ShaperMask zero_mask(int d) {
    return ShaperMask{RVec::Zero(d), RVec::Zero(d)};
}

CMat pol_projector(const PolProjectorSetting& setting) {
    CVec a = pol_ket(setting.idler);
    CVec b = pol_ket(setting.signal);
    CVec joint = tensor_vec(a, b);
    return joint * joint.adjoint();
}

CVec pol_bra(const PolProjectorSetting& setting) {
    CVec a = pol_ket(setting.idler);
    CVec b = pol_ket(setting.signal);
    return tensor_vec(a, b).conjugate();
}

double bessel_j(int n, double x) {
    if (std::abs(n) > 40) throw ValidationError("bessel_j: order out of range (|n| <= 40)");
    if (!(std::fabs(x) <= 10.0)) throw ValidationError("bessel_j: argument out of range (|x| <= 10)");

    // reduce to n >= 0, x >= 0 via J_{-n}(x) = (-1)^n J_n(x), J_n(-x) = (-1)^n J_n(x)
    double sign = 1.0;
    if (n < 0) {
        n = -n;
        if (n & 1) sign = -sign;
    }
    if (x < 0.0) {
        x = -x;
        if (n & 1) sign = -sign;
    }

    if (x < 1e-6) {
        // three-term series around zero; remainder far below 1e-30 here
        double q = 0.25 * x * x;
        double term = 1.0;
        for (int k = 1; k <= n; ++k) term *= 0.5 * x / static_cast<double>(k);
        double series = 1.0 - q / (n + 1.0) + q * q / (2.0 * (n + 1.0) * (n + 2.0));
        return sign * term * series;
    }

    // Miller downward recurrence normalized by J_0 + 2 * sum of even orders
    int start = std::max(n, static_cast<int>(x)) + 32;
    if (start & 1) ++start;
    double jp = 0.0;    // J_{k+1}
    double jc = 1e-30;  // J_k seed
    double target = 0.0;
    double norm = 0.0;  // accumulates J_0 + 2 sum_{even k >= 2} J_k
    for (int k = start; k >= 1; --k) {
        double jm = (2.0 * k / x) * jc - jp;
        jp = jc;
        jc = jm;
        if (std::fabs(jc) > 1e250) { // rescale to avoid overflow
            jc *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            target *= 1e-250;
        }
        if (k - 1 == n) target = jc; // jc now holds J_{k-1}
        int order = k - 1;
        if (order >= 2 && (order & 1) == 0) norm += 2.0 * jc;
    }
    norm += jc; // jc holds J_0
    return sign * target / norm;
}

double hadamard_depth() {
    auto f = [](double x) { return std::fabs(bessel_j(0, x)) - std::fabs(bessel_j(1, x)); };
    double lo = 1.0, hi = 2.0;
    if (f(lo) <= 0.0 || f(hi) >= 0.0)
        throw DiagnosticError("hadamard_depth: bisection bracket does not straddle the root");
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

CMat eom_transfer(const EomSetting& setting, int lattice_size,
                  const TruncationPolicy& trunc) {
    if (setting.depth < 0.0) throw ValidationError("eom_transfer: depth must be >= 0");
    if (lattice_size < 1) throw ValidationError("eom_transfer: lattice_size must be >= 1");

    // retained Bessel energy within the guard band must meet the policy
    double energy = bessel_j(0, setting.depth) * bessel_j(0, setting.depth);
    for (int k = 1; k <= trunc.guard_bins; ++k) {
        double jk = bessel_j(k, setting.depth);
        energy += 2.0 * jk * jk;
    }
    if (1.0 - energy > trunc.leakage_tolerance)
        throw ValidationError("eom_transfer: truncation policy violated (Bessel leakage above tolerance)");

    CMat u(lattice_size, lattice_size);
    for (int m = 0; m < lattice_size; ++m) {
        for (int k = 0; k < lattice_size; ++k) {
            int diff = m - k;
            double j = (std::abs(diff) <= 40) ? bessel_j(diff, setting.depth) : 0.0;
            double ph = diff * setting.rf_phase;
            u(m, k) = j * Cplx(std::cos(ph), std::sin(ph));
        }
    }
    return u;
}

CMat shaper_operator(const ShaperMask& mask) {
    long d = mask.idler_phases.size();
    if (mask.signal_phases.size() != d)
        throw ValidationError("shaper_operator: phase vectors must have equal length");
    CMat u = CMat::Zero(d * d, d * d);
    for (long j = 0; j < d; ++j) {
        for (long k = 0; k < d; ++k) {
            double ph = mask.idler_phases(j) + mask.signal_phases(k);
            u(j * d + k, j * d + k) = Cplx(std::cos(ph), std::sin(ph));
        }
    }
    return u;
}

CVec freq_kraus_row(const MeasurementSetting& setting, int d,
                    const TruncationPolicy& trunc) {
    if (d < 1) throw ValidationError("freq_kraus_row: d must be >= 1");
    if (setting.out_idler < 0 || setting.out_idler >= d ||
        setting.out_signal < 0 || setting.out_signal >= d)
        throw ValidationError("freq_kraus_row: output bin out of range");
    if (setting.mask.idler_phases.size() != d || setting.mask.signal_phases.size() != d)
        throw ValidationError("freq_kraus_row: shaper mask length does not match d");

    int g = trunc.guard_bins;
    int lattice = d + 2 * g;
    CMat ui = eom_transfer(setting.idler_eom, lattice, trunc);
    CMat us = eom_transfer(setting.signal_eom, lattice, trunc);

    // out-bin rows restricted to the computational columns [g, g + d)
    CVec row_i = ui.row(setting.out_idler + g).segment(g, d).transpose();
    CVec row_s = us.row(setting.out_signal + g).segment(g, d).transpose();

    CVec row(d * d);
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
            double ph = setting.mask.idler_phases(j) + setting.mask.signal_phases(k);
            row(j * d + k) = row_i(j) * row_s(k) * Cplx(std::cos(ph), std::sin(ph));
        }
    }
    return row;
}

CMat freq_povm_element(const MeasurementSetting& setting, int d,
                       const TruncationPolicy& trunc) {
    CVec row = freq_kraus_row(setting, d, trunc);
    return row.conjugate() * row.transpose();
}

CVec joint_kraus_row(const MeasurementSetting& setting, int d,
                     const TruncationPolicy& trunc) {
    return tensor_vec(pol_bra(setting.pol), freq_kraus_row(setting, d, trunc));
}

CMat joint_povm(const MeasurementSetting& setting, int d,
                const TruncationPolicy& trunc) {
    return tensor(pol_projector(setting.pol), freq_povm_element(setting, d, trunc));
}

const std::array<PolProjectorSetting, 16>& pol16_set() {
    // tomographically complete pair list; every arm uses all six basis states
    static const std::array<PolProjectorSetting, 16> set = {{
        {'H', 'H'}, {'H', 'V'}, {'V', 'V'}, {'V', 'H'},
        {'R', 'H'}, {'R', 'V'}, {'D', 'V'}, {'D', 'H'},
        {'D', 'R'}, {'D', 'D'}, {'R', 'D'}, {'H', 'D'},
        {'V', 'A'}, {'V', 'L'}, {'A', 'R'}, {'L', 'R'},
    }};
    return set;
}

std::vector<MeasurementSetting> protocol_qubit128() {
    const int d = 2;
    double depth = hadamard_depth();
    std::vector<MeasurementSetting> settings;
    settings.reserve(128);
    for (const auto& pol : pol16_set()) {
        for (int mode = 0; mode < 2; ++mode) { // 0: Z(x)Z, 1: X(x)X
            for (int bi = 0; bi < d; ++bi) {
                for (int bs = 0; bs < d; ++bs) {
                    MeasurementSetting s;
                    s.pol = pol;
                    s.mask = zero_mask(d);
                    double dep = (mode == 0) ? 0.0 : depth;
                    s.idler_eom = EomSetting{dep, 0.0};
                    s.signal_eom = EomSetting{dep, 0.0};
                    s.out_idler = bi;
                    s.out_signal = bs;
                    s.label = std::string{pol.idler, pol.signal} + "_" +
                              (mode == 0 ? "ZZ" : "XX") + "_" + bin_label(bi, bs);
                    settings.push_back(std::move(s));
                }
            }
        }
    }
    return settings;
}

std::vector<MeasurementSetting> protocol_random(int d, int frames, uint64_t seed) {
    if (d < 2) throw ValidationError("protocol_random: d must be >= 2");
    if (frames < 1) throw ValidationError("protocol_random: frames must be >= 1");

    const std::array<PolProjectorSetting, 8> pols = {{
        {'H', 'H'}, {'H', 'V'}, {'V', 'H'}, {'V', 'V'},
        {'D', 'D'}, {'D', 'A'}, {'A', 'D'}, {'A', 'A'},
    }};

    // frames are drawn once and shared across polarization pairs and bins
    struct Frame {
        ShaperMask mask;
        double depth_i, depth_s;
    };
    Rng rng(seed);
    std::vector<Frame> frame_list;
    frame_list.reserve(frames);
    for (int f = 0; f < frames; ++f) {
        Frame fr;
        fr.mask.idler_phases = RVec(d);
        fr.mask.signal_phases = RVec(d);
        for (int j = 0; j < d; ++j) fr.mask.idler_phases(j) = rng.uniform(0.0, TWO_PI);
        for (int j = 0; j < d; ++j) fr.mask.signal_phases(j) = rng.uniform(0.0, TWO_PI);
        fr.depth_i = rng.uniform(0.0, 2.32);
        fr.depth_s = rng.uniform(0.0, 2.32);
        frame_list.push_back(std::move(fr));
    }

    std::vector<MeasurementSetting> settings;
    settings.reserve(static_cast<size_t>(8) * frames * d * d);
    for (const auto& pol : pols) {
        for (int f = 0; f < frames; ++f) {
            const Frame& fr = frame_list[f];
            for (int bi = 0; bi < d; ++bi) {
                for (int bs = 0; bs < d; ++bs) {
                    MeasurementSetting s;
                    s.pol = pol;
                    s.mask = fr.mask;
                    s.idler_eom = EomSetting{fr.depth_i, 0.0};
                    s.signal_eom = EomSetting{fr.depth_s, 0.0};
                    s.out_idler = bi;
                    s.out_signal = bs;
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), "%c%c_f%d_%s", pol.idler, pol.signal,
                                  f, bin_label(bi, bs).c_str());
                    s.label = buf;
                    settings.push_back(std::move(s));
                }
            }
        }
    }
    return settings;
}

std::vector<MeasurementSetting> protocol_qutrit720(uint64_t seed) {
    auto settings = protocol_random(3, 10, seed);
    if (settings.size() != 720)
        throw DiagnosticError("protocol_qutrit720: unexpected setting count");
    return settings;
}

} // namespace hyperqst
