#include "hyperqst/tomography.hpp"

#include "hyperqst/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hyperqst {

namespace {

constexpr double NEG_INF = -std::numeric_limits<double>::infinity();

bool same_vec(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) return false;
    for (long i = 0; i < a.size(); ++i)
        if (a(i) != b(i)) return false;
    return true;
}

} // namespace

LikelihoodEval::LikelihoodEval(const std::vector<MeasurementSetting>& protocol, int d,
                               const TruncationPolicy& trunc,
                               const std::vector<double>& counts,
                               const std::vector<double>& durations,
                               const std::vector<double>& background_rates,
                               const ScaleConfig& scale)
    : d_(d), D_(4 * d * d), scale_(scale) {
    size_t m = protocol.size();
    if (counts.size() != m || durations.size() != m || background_rates.size() != m)
        throw ValidationError("likelihood: record arrays must match the protocol length");
    if (m == 0) throw ValidationError("likelihood: empty protocol");

    counts_ = counts;
    durations_ = durations;
    background_ = background_rates;
    pol_of_.reserve(m);
    freq_rows_.reserve(m);

    for (size_t i = 0; i < m; ++i) {
        if (counts_[i] < 0.0) throw ValidationError("likelihood: negative count");
        if (durations_[i] <= 0.0) throw ValidationError("likelihood: non-positive duration");
        if (background_[i] < 0.0) throw ValidationError("likelihood: negative background");
        if (background_[i] > 0.0) any_background_ = true;
        total_counts_ += counts_[i];

        CVec bra = pol_bra(protocol[i].pol);
        int found = -1;
        for (size_t p = 0; p < pol_bras_.size(); ++p) {
            if (same_vec(pol_bras_[p], bra)) {
                found = static_cast<int>(p);
                break;
            }
        }
        if (found < 0) {
            found = static_cast<int>(pol_bras_.size());
            pol_bras_.push_back(bra);
        }
        pol_of_.push_back(found);
        freq_rows_.push_back(freq_kraus_row(protocol[i], d, trunc));
    }

    if (scale_.mode == ScaleHandling::GammaMarginal && any_background_)
        throw ValidationError("likelihood: Gamma-marginal scale requires zero background");
    if (scale_.mode == ScaleHandling::GammaMarginal &&
        (scale_.gamma_shape <= 0.0 || scale_.gamma_rate <= 0.0))
        throw ValidationError("likelihood: Gamma prior needs positive shape and rate");
    if (scale_.mode == ScaleHandling::Fixed && scale_.fixed_value <= 0.0)
        throw ValidationError("likelihood: fixed scale must be positive");
}

LikelihoodEval::LikelihoodEval(const std::vector<MeasurementSetting>& protocol, int d,
                               const TruncationPolicy& trunc, const Dataset& data,
                               double background_rate, const ScaleConfig& scale)
    : LikelihoodEval(protocol, d, trunc,
                     [&] {
                         std::vector<double> c;
                         c.reserve(data.records.size());
                         for (const auto& r : data.records) c.push_back(static_cast<double>(r.counts));
                         return c;
                     }(),
                     [&] {
                         std::vector<double> t;
                         t.reserve(data.records.size());
                         for (const auto& r : data.records) t.push_back(r.duration);
                         return t;
                     }(),
                     std::vector<double>(data.records.size(), background_rate), scale) {
    if (data.records.size() != protocol.size())
        throw ValidationError("likelihood: dataset does not match the protocol");
    for (size_t i = 0; i < protocol.size(); ++i)
        if (data.records[i].setting_label != protocol[i].label)
            throw ValidationError("likelihood: dataset record order does not match the protocol");
}

RVec LikelihoodEval::probs(const CMat& A) const {
    if (A.rows() != D_ || A.cols() != D_)
        throw ValidationError("likelihood: parameter matrix has wrong dimension");
    double tr = A.squaredNorm();
    if (tr <= 0.0) throw ValidationError("likelihood: zero parameter matrix");

    int dd = d_ * d_;
    // contract the polarization index once per distinct projector
    std::vector<CMat> contracted(pol_bras_.size());
    for (size_t p = 0; p < pol_bras_.size(); ++p) {
        CMat b = CMat::Zero(dd, D_);
        for (int alpha = 0; alpha < 4; ++alpha) {
            Cplx w = pol_bras_[p](alpha);
            if (w != Cplx(0.0, 0.0)) b.noalias() += w * A.middleRows(alpha * dd, dd);
        }
        contracted[p] = std::move(b);
    }

    long m = n_records();
    RVec p(m);
    Eigen::RowVectorXcd v(D_);
    for (long i = 0; i < m; ++i) {
        v.noalias() = freq_rows_[i].transpose() * contracted[pol_of_[i]];
        p(i) = v.squaredNorm() / tr;
    }
    return p;
}

double LikelihoodEval::loglik_from_probs(const RVec& p) const {
    long m = p.size();
    switch (scale_.mode) {
        case ScaleHandling::Profile: {
            if (!any_background_) {
                double sum_pt = 0.0, ll = 0.0;
                for (long i = 0; i < m; ++i) {
                    sum_pt += p(i) * durations_[i];
                    if (counts_[i] > 0.0) {
                        if (p(i) <= 0.0) return NEG_INF;
                        ll += counts_[i] * std::log(p(i));
                    }
                }
                if (total_counts_ <= 0.0) return 0.0; // s* = 0, flat in the state
                if (sum_pt <= 0.0) return NEG_INF;
                return ll - total_counts_ * std::log(sum_pt);
            }
            // with background: solve sum N_i p_i / (s p_i + b_i) = sum p_i T_i for s
            double sum_pt = 0.0;
            for (long i = 0; i < m; ++i) sum_pt += p(i) * durations_[i];
            double s = 0.0;
            if (sum_pt > 0.0 && total_counts_ > 0.0) {
                // check the boundary: if g(0) <= 0 the maximum sits at s = 0
                double g0 = 0.0;
                bool singular = false;
                for (long i = 0; i < m; ++i) {
                    if (counts_[i] > 0.0) {
                        if (p(i) <= 0.0 && background_[i] <= 0.0) { singular = true; break; }
                        if (background_[i] > 0.0) g0 += counts_[i] * p(i) / background_[i];
                        else g0 = std::numeric_limits<double>::infinity();
                    }
                }
                if (singular) return NEG_INF;
                if (g0 > sum_pt) {
                    s = total_counts_ / sum_pt; // profile value without background as start
                    for (int it = 0; it < 100; ++it) {
                        double g = -sum_pt, dg = 0.0;
                        for (long i = 0; i < m; ++i) {
                            if (counts_[i] <= 0.0 || p(i) <= 0.0) continue;
                            double denom = s * p(i) + background_[i];
                            g += counts_[i] * p(i) / denom;
                            dg -= counts_[i] * p(i) * p(i) / (denom * denom);
                        }
                        double step = g / dg;
                        double s_new = s - step;
                        if (s_new < 0.0) s_new = 0.5 * s;
                        if (std::fabs(s_new - s) <= 1e-12 * std::max(1.0, s)) { s = s_new; break; }
                        s = s_new;
                    }
                }
            }
            double ll = 0.0;
            for (long i = 0; i < m; ++i) {
                double mu = (s * p(i) + background_[i]) * durations_[i];
                if (counts_[i] > 0.0) {
                    if (mu <= 0.0) return NEG_INF;
                    ll += counts_[i] * std::log(mu);
                }
                ll -= mu;
            }
            return ll;
        }
        case ScaleHandling::GammaMarginal: {
            double sum_pt = 0.0, ll = 0.0;
            for (long i = 0; i < m; ++i) {
                sum_pt += p(i) * durations_[i];
                if (counts_[i] > 0.0) {
                    if (p(i) <= 0.0) return NEG_INF;
                    ll += counts_[i] * std::log(p(i));
                }
            }
            return ll - (total_counts_ + scale_.gamma_shape) * std::log(sum_pt + scale_.gamma_rate);
        }
        case ScaleHandling::Fixed: {
            double ll = 0.0;
            for (long i = 0; i < m; ++i) {
                double mu = (scale_.fixed_value * p(i) + background_[i]) * durations_[i];
                if (counts_[i] > 0.0) {
                    if (mu <= 0.0) return NEG_INF;
                    ll += counts_[i] * std::log(mu);
                }
                ll -= mu;
            }
            return ll;
        }
    }
    return NEG_INF;
}

double LikelihoodEval::log_likelihood(const CMat& A) const {
    return loglik_from_probs(probs(A));
}

CMat ginibre(int D, Rng& rng) {
    const double s = 0.7071067811865475244; // entries CN(0,1)
    CMat g(D, D);
    for (int r = 0; r < D; ++r)
        for (int c = 0; c < D; ++c)
            g(r, c) = Cplx(s * rng.normal(), s * rng.normal());
    return g;
}

PcnResult pcn_step(const CMat& a, double loglik_a, double beta,
                   const LikelihoodEval& like, Rng& rng) {
    if (beta < 0.0 || beta > 1.0) throw ValidationError("pcn_step: beta must lie in [0, 1]");
    if (beta == 0.0) return {a, loglik_a, true};
    CMat g = ginibre(static_cast<int>(a.rows()), rng);
    CMat prop = std::sqrt(1.0 - beta * beta) * a + beta * g;
    double ll = like.log_likelihood(prop);
    double u = rng.uniform();
    bool accept;
    if (ll >= loglik_a)
        accept = true;
    else if (ll == NEG_INF)
        accept = false;
    else
        accept = (u < std::exp(ll - loglik_a));
    if (accept) return {std::move(prop), ll, true};
    return {a, loglik_a, false};
}

PosteriorEnsemble run_chain(const LikelihoodEval& like, const ChainConfig& config) {
    if (config.n_samples < 1) throw ValidationError("run_chain: n_samples must be >= 1");
    if (config.thinning < 1) throw ValidationError("run_chain: thinning must be >= 1");
    if (config.burn_in < 0) throw ValidationError("run_chain: burn_in must be >= 0");
    if (config.step_beta <= 0.0 || config.step_beta > 1.0)
        throw ValidationError("run_chain: step_beta must lie in (0, 1]");

    int D = like.dim();
    Rng rng(config.seed);

    CMat a;
    double ll = NEG_INF;
    if (config.init_state.size() > 0) {
        if (config.init_state.rows() != D || config.init_state.cols() != D)
            throw ValidationError("run_chain: warm-start state has wrong dimension");
        // A0 = V sqrt(W) V^dag from the eigendecomposition, rescaled to the
        // prior-typical Frobenius norm (the induced state is unchanged)
        auto [vals, vecs] = eig_hermitian(0.5 * (config.init_state + config.init_state.adjoint()));
        RVec w(vals.size());
        for (long i = 0; i < vals.size(); ++i) w(i) = std::sqrt(std::max(vals(i), 1e-10));
        a = vecs * w.asDiagonal() * vecs.adjoint();
        a *= static_cast<double>(D) / a.norm();
        ll = like.log_likelihood(a);
    }
    int attempts = 0;
    while (ll == NEG_INF && attempts < 1000) {
        a = ginibre(D, rng);
        ll = like.log_likelihood(a);
        ++attempts;
    }
    if (ll == NEG_INF)
        throw DiagnosticError("run_chain: data has zero probability under sampled states (model mismatch)");

    double beta = config.step_beta;
    const int window = 100;
    int win_accepts = 0, win_steps = 0;
    for (int t = 0; t < config.burn_in; ++t) {
        PcnResult r = pcn_step(a, ll, beta, like, rng);
        a = std::move(r.a);
        ll = r.loglik;
        if (r.accepted) ++win_accepts;
        ++win_steps;
        if (config.adapt_beta && win_steps == window) {
            double acc = static_cast<double>(win_accepts) / window;
            // Robbins-Monro style update toward 25% acceptance; the gain decays
            // over the burn-in so the step size settles before sampling begins.
            double progress = static_cast<double>(t + 1) / std::max(1, config.burn_in);
            double gain = 2.0 * (1.0 - 0.75 * progress);
            beta *= std::exp(gain * (acc - 0.25));
            beta = std::clamp(beta, 1e-4, 0.999);
            win_accepts = 0;
            win_steps = 0;
        }
    }

    PosteriorEnsemble ens;
    ens.samples.reserve(config.n_samples);
    ens.step_beta_final = beta;
    long accepted = 0, total = 0;
    for (int n = 0; n < config.n_samples; ++n) {
        for (int t = 0; t < config.thinning; ++t) {
            PcnResult r = pcn_step(a, ll, beta, like, rng);
            a = std::move(r.a);
            ll = r.loglik;
            if (r.accepted) ++accepted;
            ++total;
        }
        CMat rho = a * a.adjoint();
        rho /= rho.trace().real();
        ens.samples.push_back(std::move(rho));
    }
    ens.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
    return ens;
}

CMat bayesian_mean(const PosteriorEnsemble& ens) {
    if (ens.samples.empty()) throw ValidationError("bayesian_mean: empty ensemble");
    CMat mean = CMat::Zero(ens.samples[0].rows(), ens.samples[0].cols());
    for (const auto& s : ens.samples) mean += s;
    mean /= static_cast<double>(ens.samples.size());
    mean = 0.5 * (mean + mean.adjoint());
    check_density(mean, "bayesian_mean");
    return mean;
}

namespace {

RVec to_coef(const CMat& h, const std::vector<CMat>& basis) {
    RVec x(static_cast<long>(basis.size()));
    for (size_t i = 0; i < basis.size(); ++i)
        x(static_cast<long>(i)) = std::real((basis[i] * h).trace());
    return x;
}

CMat from_coef(const RVec& x, const std::vector<CMat>& basis, int D) {
    CMat h = CMat::Zero(D, D);
    for (size_t i = 0; i < basis.size(); ++i) h += x(static_cast<long>(i)) * basis[i];
    return h;
}

} // namespace

LinearInversionResult linear_inversion(const std::vector<CMat>& povms,
                                       const std::vector<double>& y, int D) {
    if (povms.size() != y.size())
        throw ValidationError("linear_inversion: measurement and data lengths differ");
    if (povms.empty()) throw ValidationError("linear_inversion: no measurements");
    for (const auto& e : povms)
        if (e.rows() != D || e.cols() != D)
            throw ValidationError("linear_inversion: POVM element has wrong dimension");

    long m = static_cast<long>(povms.size());
    long n = static_cast<long>(D) * D;
    std::vector<CMat> basis = hermitian_basis(D);

    RMat design(m, n);
    for (long r = 0; r < m; ++r)
        for (long c = 0; c < n; ++c)
            design(r, c) = std::real((povms[r] * basis[c]).trace());

    Eigen::BDCSVD<RMat> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVec& sv = svd.singularValues();
    double tol = sv.size() > 0 ? sv(0) * 1e-10 : 0.0;
    int rank = 0;
    for (long i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    if (rank == 0) throw DiagnosticError("linear_inversion: zero-rank design matrix");

    RVec yv = Eigen::Map<const RVec>(y.data(), m);
    // min-norm least squares through the rank-truncated pseudo-inverse
    auto pinv_apply = [&](const RVec& v) {
        RVec t = svd.matrixU().transpose() * v;
        for (long i = 0; i < sv.size(); ++i) t(i) = (sv(i) > tol) ? t(i) / sv(i) : 0.0;
        return RVec(svd.matrixV() * t);
    };
    RVec x = pinv_apply(yv);

    LinearInversionResult out;
    out.rank = rank;
    out.complete = (rank == n);

    CMat raw = from_coef(x, basis, D);
    raw = 0.5 * (raw + raw.adjoint());
    double tr = raw.trace().real();
    if (std::fabs(tr) < 1e-9)
        throw DiagnosticError("linear_inversion: estimate has vanishing trace");
    out.raw = raw / tr;

    // clipped variant
    {
        auto [vals, vecs] = eig_hermitian(out.raw);
        RVec w = vals.cwiseMax(0.0);
        double sum = w.sum();
        if (sum <= 0.0) throw DiagnosticError("linear_inversion: clipped estimate has zero trace");
        out.psd_clip = vecs * (w / sum).asDiagonal() * vecs.adjoint();
    }

    // data-consistent PSD estimate: Dykstra alternating projections between
    // the affine set {x : design x = y} and the density-matrix set
    {
        auto p_affine = [&](const RVec& v) { return RVec(v - pinv_apply(design * v - yv)); };
        auto p_density = [&](const RVec& v) {
            return to_coef(project_density(from_coef(v, basis, D)), basis);
        };
        RVec xc = x;
        RVec p = RVec::Zero(n), q = RVec::Zero(n);
        RVec y1 = xc;
        bool converged = false;
        const int max_iter = 3000;
        for (int it = 0; it < max_iter; ++it) {
            y1 = p_density(xc + p);
            p = xc + p - y1;
            RVec x_new = p_affine(y1 + q);
            q = y1 + q - x_new;
            double gap = (x_new - y1).norm();
            xc = x_new;
            if (gap <= 1e-10) {
                converged = true;
                break;
            }
        }
        CMat psd = project_density(from_coef(xc, basis, D));
        psd /= psd.trace().real();
        out.psd = 0.5 * (psd + psd.adjoint());
        out.projection_converged = converged;
        out.residual = (design * to_coef(out.psd, basis) - yv).norm();
    }
    return out;
}

LinearInversionResult linear_inversion(const Dataset& data,
                                       const std::vector<CMat>& povms,
                                       const FluxModel& flux) {
    flux.validate();
    if (flux.pair_rate <= 0.0)
        throw ValidationError("linear_inversion: pair_rate must be positive to normalize counts");
    std::vector<double> y;
    y.reserve(data.records.size());
    for (const auto& r : data.records) {
        if (r.duration <= 0.0)
            throw ValidationError("linear_inversion: record duration must be positive");
        y.push_back((static_cast<double>(r.counts) / r.duration - flux.accidental_rate) /
                    flux.pair_rate);
    }
    int D = 4 * data.d * data.d;
    return linear_inversion(povms, y, D);
}

CMat iterative_mle(const std::vector<MeasurementSetting>& protocol, int d,
                   const TruncationPolicy& trunc, const Dataset& data,
                   int iterations) {
    if (data.records.size() != protocol.size())
        throw ValidationError("iterative_mle: dataset does not match the protocol");
    if (iterations < 1) throw ValidationError("iterative_mle: iterations must be >= 1");
    const int D = 4 * d * d;
    const long M = static_cast<long>(protocol.size());

    CMat K(M, D);
    RVec counts(M), durations(M);
    for (long m = 0; m < M; ++m) {
        K.row(m) = joint_kraus_row(protocol[m], d, trunc).transpose();
        counts(m) = static_cast<double>(data.records[m].counts);
        durations(m) = data.records[m].duration;
        if (durations(m) <= 0.0)
            throw ValidationError("iterative_mle: record durations must be positive");
    }

    // frame operator G = sum_m T_m E_m; its inverse square root turns the
    // stationarity condition of the profiled likelihood into rho = R' rho R'
    CMat G = K.adjoint() * durations.asDiagonal() * K;
    auto [gvals, gvecs] = eig_hermitian(G);
    double gmax = gvals.maxCoeff();
    RVec ginv(gvals.size());
    for (long i = 0; i < gvals.size(); ++i)
        ginv(i) = 1.0 / std::sqrt(std::max(gvals(i), 1e-12 * gmax));
    CMat Gm = gvecs * ginv.asDiagonal() * gvecs.adjoint();

    CMat rho = CMat::Identity(D, D) / static_cast<double>(D);
    RVec w(M);
    for (int it = 0; it < iterations; ++it) {
        CMat Krho = K * rho; // row m is k_m rho
        for (long m = 0; m < M; ++m) {
            double p = std::real(Krho.row(m).dot(K.row(m))); // k_m rho k_m^dag
            w(m) = counts(m) > 0.0 ? counts(m) / std::max(p, 1e-300) : 0.0;
        }
        CMat R = Gm * (K.adjoint() * w.asDiagonal() * K) * Gm;
        rho = R * rho * R;
        rho = 0.5 * (rho + rho.adjoint());
        double tr = rho.trace().real();
        if (!(tr > 0.0) || !std::isfinite(tr))
            throw DiagnosticError("iterative_mle: iteration collapsed to a non-normalizable state");
        rho /= tr;
    }
    return rho;
}

} // namespace hyperqst
