#pragma once

#include "hyperqst/apparatus.hpp"
#include "hyperqst/linalg.hpp"
#include "hyperqst/rng.hpp"
#include "hyperqst/simulator.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace hyperqst {

// Handling of the unknown Poisson scale s in the counting likelihood
// N_m ~ Poisson((s p_m + b_m) T_m):
//   Profile       - s set to its conditional maximum per evaluation (default)
//   GammaMarginal - s integrated out under a conjugate Gamma(shape, rate) prior
//   Fixed         - s held at a given value (testing hook)
enum class ScaleHandling { Profile, GammaMarginal, Fixed };

struct ScaleConfig {
    ScaleHandling mode = ScaleHandling::Profile;
    double gamma_shape = 1.0;
    double gamma_rate = 1e-6;
    double fixed_value = 1.0;
};

// Likelihood over count records for states parameterized by a Ginibre factor:
// rho(A) = A A^dag / Tr(A A^dag). Settings factor into a polarization bra and
// a frequency row, so each evaluation contracts the polarization index once
// per distinct projector and then takes one short row product per record.
class LikelihoodEval {
  public:
    LikelihoodEval(const std::vector<MeasurementSetting>& protocol, int d,
                   const TruncationPolicy& trunc,
                   const std::vector<double>& counts,
                   const std::vector<double>& durations,
                   const std::vector<double>& background_rates,
                   const ScaleConfig& scale);

    // convenience: counts/durations from a dataset, constant background
    LikelihoodEval(const std::vector<MeasurementSetting>& protocol, int d,
                   const TruncationPolicy& trunc, const Dataset& data,
                   double background_rate, const ScaleConfig& scale);

    double log_likelihood(const CMat& A) const;

    // Born probabilities Tr(E_m rho(A)), in record order
    RVec probs(const CMat& A) const;

    int dim() const { return D_; }
    long n_records() const { return static_cast<long>(counts_.size()); }
    double total_counts() const { return total_counts_; }

  private:
    int d_ = 0;
    int D_ = 0;
    std::vector<int> pol_of_;      // record -> index into pol_bras_
    std::vector<CVec> pol_bras_;   // distinct polarization bras (length 4)
    std::vector<CVec> freq_rows_;  // per record frequency row (length d^2)
    std::vector<double> counts_;
    std::vector<double> durations_;
    std::vector<double> background_;
    ScaleConfig scale_;
    double total_counts_ = 0.0;
    bool any_background_ = false;

    double loglik_from_probs(const RVec& p) const;
};

struct ChainConfig {
    int n_samples = 1024;
    int burn_in = 10000;
    int thinning = 200;
    double step_beta = 0.1;
    uint64_t seed = 1;
    bool adapt_beta = true; // tune toward 0.25 acceptance during burn-in, then freeze
    CMat init_state;        // optional warm start (empty: draw from the prior)
};

struct PosteriorEnsemble {
    std::vector<CMat> samples;
    double acceptance_rate = 0.0; // over the post-burn-in phase
    double step_beta_final = 0.0;
};

// D x D matrix with independent CN(0,1) entries
CMat ginibre(int D, Rng& rng);

struct PcnResult {
    CMat a;
    double loglik;
    bool accepted;
};

// proposal A' = sqrt(1 - beta^2) A + beta G, accepted with probability
// min(1, exp(loglik(A') - loglik(A))); the Gaussian prior cancels exactly
PcnResult pcn_step(const CMat& a, double loglik_a, double beta,
                   const LikelihoodEval& like, Rng& rng);

PosteriorEnsemble run_chain(const LikelihoodEval& like, const ChainConfig& config);

CMat bayesian_mean(const PosteriorEnsemble& ens);

struct LinearInversionResult {
    CMat raw;      // Hermitian, unit trace, possibly non-PSD
    CMat psd;      // data-consistent PSD estimate (alternating projections)
    CMat psd_clip; // eigenvalue clipping + trace renormalization
    int rank = 0;  // numerical rank of the design matrix
    bool complete = false;
    bool projection_converged = false;
    double residual = 0.0; // design-system residual of the psd estimate
};

// least-squares inversion of y_m = Tr(E_m rho) over the Hermitian operator
// space; y are pair-rate-normalized Born expectations
LinearInversionResult linear_inversion(const std::vector<CMat>& povms,
                                       const std::vector<double>& y, int D);

// wrapper: y_m = (N_m / T_m - accidental_rate) / pair_rate
LinearInversionResult linear_inversion(const Dataset& data,
                                       const std::vector<CMat>& povms,
                                       const FluxModel& flux);

// deterministic fixed-point iteration toward the maximum of the profiled
// Poisson likelihood (multiplicative R-rho-R updates with the frame
// correction for a non-resolving measurement set), used to seed the sampler;
// background rates are ignored, which is harmless for a starting point
CMat iterative_mle(const std::vector<MeasurementSetting>& protocol, int d,
                   const TruncationPolicy& trunc, const Dataset& data,
                   int iterations = 300);

} // namespace hyperqst
