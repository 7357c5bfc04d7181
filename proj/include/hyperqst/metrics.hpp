#pragma once

#include "hyperqst/linalg.hpp"
#include "hyperqst/tomography.hpp"

#include <functional>
#include <string>
#include <vector>

namespace hyperqst {

struct Bipartition {
    std::vector<int> side_a;
    std::vector<int> side_b;

    void validate(size_t n_subsystems) const; // disjoint and covering
};

struct IntervalEstimate {
    double mean = 0.0;
    double std = 0.0;
    std::string label;
    std::string formatted;
};

enum class Dof { Polarization, Frequency };

// partial trace of a [2, 2, d, d] state onto one degree of freedom
CMat reduce_to_dof(const CMat& rho_pf, int d, Dof dof);

// log2 of the trace norm of the partial transpose over side_b, clamped at 0
double log_negativity(const CMat& rho, const std::vector<int>& dims,
                      const Bipartition& cut);

// max{ S(rho_B) - S(rho_AB), S(rho_A) - S(rho_AB) } in bits
double coherent_information(const CMat& rho, const std::vector<int>& dims,
                            const Bipartition& cut);

// mean and sample standard deviation of a functional over posterior samples,
// formatted in the mean(std-last-digit) convention
IntervalEstimate ensemble_interval(const PosteriorEnsemble& ens,
                                   const std::function<double(const CMat&)>& functional,
                                   const std::string& label);

// "94.4(6)%" for (0.944, 0.0062, percent); "0.936(9)" for (0.9365, 0.0094)
std::string format_mean_std(double mean, double std, bool percent);

// standard cuts: idler vs signal within one DoF, and (pol-idler, freq-idler)
// vs (pol-signal, freq-signal) for the full state
Bipartition dof_cut();      // for 2-subsystem reduced states [x, x]
Bipartition full_pf_cut();  // for the full [2, 2, d, d] layout

} // namespace hyperqst
