#include "hyperqst/state_model.hpp"

#include "hyperqst/errors.hpp"

#include <cmath>

namespace hyperqst {

void HyperStateSpec::validate() const {
    if (d < 2) throw ValidationError("state spec: d must be >= 2");
    if (gamma.size() != d)
        throw ValidationError("state spec: gamma must have length d");
    double pol_norm = std::norm(alpha) + std::norm(beta);
    if (std::fabs(pol_norm - 1.0) > 1e-12)
        throw ValidationError("state spec: |alpha|^2 + |beta|^2 must equal 1");
    if (std::fabs(gamma.squaredNorm() - 1.0) > 1e-12)
        throw ValidationError("state spec: gamma must be normalized");
}

void BinGrid::validate() const {
    if (d < 1) throw ValidationError("bin grid: d must be >= 1");
    if (spacing <= 0.0) throw ValidationError("bin grid: spacing must be positive");
    if (width <= 0.0 || width >= spacing)
        throw ValidationError("bin grid: width must lie in (0, spacing)");
}

HyperStateSpec uniform_spec(int d) {
    if (d < 2) throw ValidationError("uniform_spec: d must be >= 2");
    HyperStateSpec spec;
    spec.d = d;
    spec.gamma = CVec::Constant(d, Cplx(1.0 / std::sqrt(static_cast<double>(d)), 0.0));
    return spec;
}

CVec pol_ket(char label) {
    const double s = 0.7071067811865475244;
    CVec k(2);
    switch (label) {
        case 'H': k << 1.0, 0.0; break;
        case 'V': k << 0.0, 1.0; break;
        case 'D': k << s, s; break;
        case 'A': k << s, -s; break;
        case 'R': k << Cplx(s, 0.0), Cplx(0.0, s); break;
        case 'L': k << Cplx(s, 0.0), Cplx(0.0, -s); break;
        default: throw ValidationError(std::string("unknown polarization label '") + label + "'");
    }
    return k;
}

CVec build_target(const HyperStateSpec& spec) {
    spec.validate();
    int d = spec.d;

    CVec pol = CVec::Zero(4);
    pol(0) = spec.alpha; // |HH>
    pol(3) = spec.beta;  // |VV>

    CVec freq = CVec::Zero(d * d);
    for (int k = 0; k < d; ++k)
        freq(k * d + (d - 1 - k)) = spec.gamma(k);

    return tensor_vec(pol, freq);
}

CMat depolarize(const CMat& rho, double p) {
    if (p < 0.0 || p > 1.0) throw ValidationError("depolarize: p must lie in [0, 1]");
    if (rho.rows() != rho.cols()) throw ValidationError("depolarize: matrix must be square");
    long D = rho.rows();
    return (1.0 - p) * rho + (p / static_cast<double>(D)) * CMat::Identity(D, D);
}

double depol_p_for_fidelity(double f, int D) {
    if (D < 2) throw ValidationError("depol_p_for_fidelity: D must be >= 2");
    double p = (1.0 - f) * static_cast<double>(D) / static_cast<double>(D - 1);
    if (p < 0.0 || p > 1.0)
        throw ValidationError("depol_p_for_fidelity: requested fidelity out of reach");
    return p;
}

std::pair<RVec, RVec> bin_frequencies(const BinGrid& grid) {
    grid.validate();
    RVec idler(grid.d), signal(grid.d);
    for (int k = 0; k < grid.d; ++k) {
        idler(k) = grid.idler_origin + k * grid.spacing;
        signal(k) = grid.signal_origin + k * grid.spacing;
    }
    return {idler, signal};
}

} // namespace hyperqst
