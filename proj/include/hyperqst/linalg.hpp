#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace hyperqst {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Ordered subsystem dimensions with role labels. The canonical full-space
// layout is [pol-idler, pol-signal, freq-idler, freq-signal] = [2, 2, d, d].
struct SubsystemLayout {
    std::vector<int> dims;
    std::vector<std::string> roles;

    int total_dim() const;
};

SubsystemLayout full_layout(int d);
SubsystemLayout pol_pair_layout();
SubsystemLayout freq_pair_layout(int d);

// Kronecker product, left factor slower-varying.
CMat tensor(const CMat& a, const CMat& b);
CVec tensor_vec(const CVec& a, const CVec& b);

// Reduced state on the kept subsystems (layout order preserved).
CMat partial_trace(const CMat& rho, const std::vector<int>& dims,
                   const std::vector<int>& keep);

// Transpose the listed subsystems in place.
CMat partial_transpose(const CMat& rho, const std::vector<int>& dims,
                       const std::vector<int>& subsystems);

// Hermitian eigendecomposition, eigenvalues descending, columns of V matching.
std::pair<RVec, CMat> eig_hermitian(const CMat& m);

// von Neumann entropy in bits, eigenvalues below 1e-12 treated as zero.
double entropy(const CMat& rho);

// <psi| rho |psi>, clamped to [0, 1].
double fidelity_pure(const CMat& rho, const CVec& psi);

// Sum of singular values.
double trace_norm(const CMat& m);

double trace_distance(const CMat& a, const CMat& b);

bool is_hermitian(const CMat& m, double tol = 1e-12);

// Throws DiagnosticError unless Hermitian within 1e-12 entrywise, eigenvalues
// >= -1e-10 and trace within 1e-10 of one.
void check_density(const CMat& rho, const std::string& context = "state");

// Orthonormal Hermitian operator basis for a D-dimensional space
// (Tr(B_i B_j) = delta_ij): D diagonal units, then real and imaginary
// off-diagonal pairs in row-major order of (r, c), r < c.
std::vector<CMat> hermitian_basis(int D);

// Nearest density matrix in Frobenius norm: eigenvalue projection onto the
// probability simplex (PSD, unit trace).
CMat project_density(const CMat& m);

} // namespace hyperqst
