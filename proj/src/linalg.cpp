#include "hyperqst/linalg.hpp"

#include "hyperqst/errors.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hyperqst {

namespace {

void check_dims(const CMat& rho, const std::vector<int>& dims) {
    long total = 1;
    for (int d : dims) {
        if (d < 1) throw ValidationError("subsystem dimension must be >= 1");
        total *= d;
    }
    if (rho.rows() != total || rho.cols() != total)
        throw ValidationError("matrix dimension does not match subsystem layout");
}

void check_subset(const std::vector<int>& subset, size_t n, bool allow_empty) {
    if (!allow_empty && subset.empty())
        throw ValidationError("subsystem subset must be nonempty");
    std::vector<bool> seen(n, false);
    for (int s : subset) {
        if (s < 0 || static_cast<size_t>(s) >= n)
            throw ValidationError("subsystem index out of range");
        if (seen[s]) throw ValidationError("duplicate subsystem index");
        seen[s] = true;
    }
}

// mixed-radix decode of a flat index into per-subsystem digits
inline void decode(long idx, const std::vector<int>& dims, std::vector<int>& out) {
    for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
        out[i] = static_cast<int>(idx % dims[i]);
        idx /= dims[i];
    }
}

inline long encode(const std::vector<int>& digits, const std::vector<int>& dims) {
    long idx = 0;
    for (size_t i = 0; i < dims.size(); ++i) idx = idx * dims[i] + digits[i];
    return idx;
}

} // namespace

int SubsystemLayout::total_dim() const {
    int t = 1;
    for (int d : dims) t *= d;
    return t;
}

SubsystemLayout full_layout(int d) {
    return SubsystemLayout{{2, 2, d, d},
                           {"pol-idler", "pol-signal", "freq-idler", "freq-signal"}};
}

SubsystemLayout pol_pair_layout() {
    return SubsystemLayout{{2, 2}, {"pol-idler", "pol-signal"}};
}

SubsystemLayout freq_pair_layout(int d) {
    return SubsystemLayout{{d, d}, {"freq-idler", "freq-signal"}};
}

CMat tensor(const CMat& a, const CMat& b) {
    return Eigen::kroneckerProduct(a, b);
}

CVec tensor_vec(const CVec& a, const CVec& b) {
    CVec out(a.size() * b.size());
    for (long i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

CMat partial_trace(const CMat& rho, const std::vector<int>& dims,
                   const std::vector<int>& keep) {
    check_dims(rho, dims);
    check_subset(keep, dims.size(), false);
    std::vector<int> keep_sorted = keep;
    std::sort(keep_sorted.begin(), keep_sorted.end());

    std::vector<int> traced;
    for (size_t i = 0; i < dims.size(); ++i)
        if (!std::binary_search(keep_sorted.begin(), keep_sorted.end(), static_cast<int>(i)))
            traced.push_back(static_cast<int>(i));

    long dim_keep = 1, dim_tr = 1;
    for (int k : keep_sorted) dim_keep *= dims[k];
    for (int t : traced) dim_tr *= dims[t];

    CMat out = CMat::Zero(dim_keep, dim_keep);
    std::vector<int> row(dims.size(), 0), col(dims.size(), 0);
    std::vector<int> kr(keep_sorted.size(), 0), kc(keep_sorted.size(), 0);
    std::vector<int> kdims(keep_sorted.size());
    for (size_t i = 0; i < keep_sorted.size(); ++i) kdims[i] = dims[keep_sorted[i]];
    std::vector<int> tdims(traced.size());
    for (size_t i = 0; i < traced.size(); ++i) tdims[i] = dims[traced[i]];
    std::vector<int> tdig(traced.size(), 0);

    for (long a = 0; a < dim_keep; ++a) {
        decode(a, kdims, kr);
        for (long b = 0; b < dim_keep; ++b) {
            decode(b, kdims, kc);
            Cplx acc(0.0, 0.0);
            for (long t = 0; t < dim_tr; ++t) {
                decode(t, tdims, tdig);
                for (size_t i = 0; i < keep_sorted.size(); ++i) {
                    row[keep_sorted[i]] = kr[i];
                    col[keep_sorted[i]] = kc[i];
                }
                for (size_t i = 0; i < traced.size(); ++i) {
                    row[traced[i]] = tdig[i];
                    col[traced[i]] = tdig[i];
                }
                acc += rho(encode(row, dims), encode(col, dims));
            }
            out(a, b) = acc;
        }
    }
    return out;
}

CMat partial_transpose(const CMat& rho, const std::vector<int>& dims,
                       const std::vector<int>& subsystems) {
    check_dims(rho, dims);
    check_subset(subsystems, dims.size(), true);
    std::vector<bool> flip(dims.size(), false);
    for (int s : subsystems) flip[s] = true;

    long D = rho.rows();
    CMat out(D, D);
    std::vector<int> r(dims.size()), c(dims.size()), rr(dims.size()), cc(dims.size());
    for (long a = 0; a < D; ++a) {
        decode(a, dims, r);
        for (long b = 0; b < D; ++b) {
            decode(b, dims, c);
            for (size_t i = 0; i < dims.size(); ++i) {
                rr[i] = flip[i] ? c[i] : r[i];
                cc[i] = flip[i] ? r[i] : c[i];
            }
            out(encode(rr, dims), encode(cc, dims)) = rho(a, b);
        }
    }
    return out;
}

std::pair<RVec, CMat> eig_hermitian(const CMat& m) {
    if (m.rows() != m.cols()) throw ValidationError("eig_hermitian: matrix must be square");
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw ValidationError("eig_hermitian: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> solver(m);
    if (solver.info() != Eigen::Success)
        throw DiagnosticError("eig_hermitian: eigendecomposition failed to converge");
    long D = m.rows();
    RVec vals(D);
    CMat vecs(D, D);
    for (long i = 0; i < D; ++i) {
        vals(i) = solver.eigenvalues()(D - 1 - i);
        vecs.col(i) = solver.eigenvectors().col(D - 1 - i);
    }
    return {vals, vecs};
}

double entropy(const CMat& rho) {
    auto [vals, vecs] = eig_hermitian(rho);
    double s = 0.0;
    for (long i = 0; i < vals.size(); ++i) {
        double p = vals(i);
        if (p > 1e-12) s -= p * std::log2(p);
    }
    return s;
}

double fidelity_pure(const CMat& rho, const CVec& psi) {
    if (rho.rows() != psi.size() || rho.cols() != psi.size())
        throw ValidationError("fidelity_pure: dimension mismatch");
    double f = std::real(psi.dot(rho * psi)); // Eigen dot conjugates the left side
    return std::clamp(f, 0.0, 1.0);
}

double trace_norm(const CMat& m) {
    if (m.rows() != m.cols()) throw ValidationError("trace_norm: matrix must be square");
    if (m.rows() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues().sum();
}

double trace_distance(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("trace_distance: dimension mismatch");
    return 0.5 * trace_norm(a - b);
}

bool is_hermitian(const CMat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

void check_density(const CMat& rho, const std::string& context) {
    if (rho.rows() != rho.cols())
        throw DiagnosticError(context + ": density matrix must be square");
    if (!is_hermitian(rho, 1e-12))
        throw DiagnosticError(context + ": density matrix is not Hermitian within 1e-12");
    if (std::abs(rho.trace() - Cplx(1.0, 0.0)) > 1e-10)
        throw DiagnosticError(context + ": trace differs from one by more than 1e-10");
    Eigen::SelfAdjointEigenSolver<CMat> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10)
        throw DiagnosticError(context + ": eigenvalue below -1e-10");
}

std::vector<CMat> hermitian_basis(int D) {
    if (D < 1) throw ValidationError("hermitian_basis: dimension must be >= 1");
    std::vector<CMat> basis;
    basis.reserve(static_cast<size_t>(D) * D);
    for (int i = 0; i < D; ++i) {
        CMat b = CMat::Zero(D, D);
        b(i, i) = 1.0;
        basis.push_back(b);
    }
    const double inv_sqrt2 = 0.7071067811865475244;
    for (int r = 0; r < D; ++r) {
        for (int c = r + 1; c < D; ++c) {
            CMat sym = CMat::Zero(D, D);
            sym(r, c) = inv_sqrt2;
            sym(c, r) = inv_sqrt2;
            basis.push_back(sym);
            CMat asym = CMat::Zero(D, D);
            asym(r, c) = Cplx(0.0, -inv_sqrt2);
            asym(c, r) = Cplx(0.0, inv_sqrt2);
            basis.push_back(asym);
        }
    }
    return basis;
}

CMat project_density(const CMat& m) {
    CMat h = 0.5 * (m + m.adjoint());
    auto [vals, vecs] = eig_hermitian(h);
    long D = vals.size();
    // project the eigenvalue vector onto the probability simplex
    std::vector<double> v(vals.data(), vals.data() + D); // already descending
    double cumsum = 0.0;
    double theta = 0.0;
    int support = 0;
    for (long i = 0; i < D; ++i) {
        cumsum += v[i];
        double t = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (v[i] - t > 0.0) {
            theta = t;
            support = static_cast<int>(i + 1);
        }
    }
    (void)support;
    RVec w(D);
    for (long i = 0; i < D; ++i) w(i) = std::max(0.0, v[i] - theta);
    return vecs * w.asDiagonal() * vecs.adjoint();
}

} // namespace hyperqst
