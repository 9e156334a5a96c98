#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgssm/dfm_model.hpp"
#include "cgssm/reduction.hpp"

namespace cgssm {

/// Full sampler state after a sweep.
struct ChainState {
  IndicatorSequence K;
  Matrix x;  // n x 4k
  DfmParams params;
  /// Random-walk step sizes (transformed scale), ordered per component as
  /// (rho, sigma_f, lambda).
  Vector rwmh_scale;
  std::vector<Index> accepted;
  std::vector<Index> proposed;
  Index iteration = 0;
};

struct McmcSettings {
  Index iterations = 5000;
  Index burn_in = 1000;
  Index thin = 1;
  std::uint64_t seed = 1;
  bool store_trend_draws = true;
};

/// Robbins-Monro step-size update toward acceptance 0.44; the log-scale
/// change at iteration j is bounded by kRwmhGain / j.
inline constexpr double kRwmhTarget = 0.44;
inline constexpr double kRwmhGain = 1.0 / (0.44 * 0.56);
double adapt_rwmh(double scale, bool accepted, Index iteration);

/// IF = 1 + 2 sum_{l=1}^{L} w(l/L) rho_l, Parzen window, L = floor(2 N^{1/3}).
double inefficiency_factor(std::span<const double> chain);

/// Factor paths f_t = Phi x_t, n x k.
Matrix factor_paths(const Matrix& x, Index k);

// --- Closed-form full conditionals -------------------------------------

struct InvGammaPosterior {
  double shape = 0.0;
  double scale = 0.0;
};
struct GammaPosterior {
  double shape = 0.0;
  double rate = 0.0;
};
struct GaussianPosterior {
  Vector mean;
  Matrix precision;
};

/// eta^2 per (component, size index) given the state path and labels:
/// residuals of the level (or slope) increments at the labelled times.
std::vector<std::array<InvGammaPosterior, 4>> eta_posterior(
    const Matrix& x, const IndicatorSequence& K, const DfmParams& params,
    const DfmSpec& spec);

/// Free entries of row `row` of Theta given the factors (n x k).
GaussianPosterior theta_row_posterior(const Vector& series,
                                      const Matrix& factors, Index row,
                                      double noise_var, const Vector& kappa);

/// kappa_j given Theta's free entries in column j.
std::vector<GammaPosterior> kappa_posterior(const Matrix& Theta,
                                            const DfmSpec& spec);

/// sigma_m^2 per series given the factors and Theta.
std::vector<InvGammaPosterior> noise_posterior(const Matrix& y,
                                               const Matrix& factors,
                                               const Matrix& Theta,
                                               const DfmSpec& spec);

/// log P(varpi_ij = 1 | rest) - log P(varpi_ij = 0 | rest), with beta and
/// the states integrated out.
double varpi_log_odds(const BetaStats& stats, const DfmSpec& spec,
                      const DfmParams& params, Index component, Index j);

// --- Sweep ------------------------------------------------------------

/// Starting values: prior-centred hyperparameters, no breaks, Theta from
/// `theta_init` (its identification form in Unknown mode), residual noise
/// variances, then a joint (x, beta) draw.
ChainState initial_state(const Matrix& y, const DfmSpec& spec,
                         const Matrix& theta_init, Rng& rng);

/// Names of the adaptive random-walk slots: (rho, sigma_f, lambda) per
/// component, then in Unknown mode one shear_r_c per component pair r > c.
std::vector<std::string> rwmh_names(const DfmSpec& spec);

/// Reduced regression model for the current parameters.
RegressionModel reduced_regression(const DfmSpec& spec, const DfmParams& params,
                                   const ReducedObservations& reduced);

/// One pass of the nine-step scheme, with the shear moves after step 8.
void gibbs_sweep(ChainState& state, const Matrix& y, const DfmSpec& spec,
                 Rng& rng);

// Individual steps (exposed for testing).
void step_indicators(ChainState& s, const ReducedObservations& red,
                     const DfmSpec& spec, Rng& rng);
void step_state_beta(ChainState& s, const ReducedObservations& red,
                     const DfmSpec& spec, Rng& rng);
void step_eta(ChainState& s, const DfmSpec& spec, Rng& rng);
void step_rwmh(ChainState& s, const ReducedObservations& red,
               const DfmSpec& spec, int which, Rng& rng);
void step_varpi(ChainState& s, const ReducedObservations& red,
                const DfmSpec& spec, Rng& rng);
void step_theta_kappa(ChainState& s, const Matrix& y, const DfmSpec& spec,
                      Rng& rng);
void step_noise(ChainState& s, const Matrix& y, const DfmSpec& spec, Rng& rng);

/// Log target of the loadings with the states integrated out, up to terms
/// that a unit-determinant change of basis leaves unchanged: the reduced
/// likelihood given beta plus the prior on the free loadings.
double shear_log_target(const DfmSpec& spec, const DfmParams& params,
                        const ReducedObservations& red,
                        const IndicatorSequence& K);

/// Random-walk moves Theta.col(c) += a Theta.col(r) for r > c. They keep the
/// identification pattern and move along directions where the conditional
/// Theta and state draws are nearly collinear. (x, beta) is redrawn after.
void step_shear(ChainState& s, const Matrix& y, const DfmSpec& spec, Rng& rng);

// --- Chain output -----------------------------------------------------

struct ChainOutput {
  std::vector<std::string> names;  // hyperparameter columns
  Matrix draws;                    // kept draws x names
  Matrix label_counts;             // n x (4k+1), times each label was drawn
  Matrix trend_sum;                // k x n
  Matrix seasonal_sum;             // k x n
  std::vector<double> trend_draws; // kept x k x n, when stored
  Matrix theta_sum;                // p x k
  Vector noise_sum, noise_sq_sum;  // p, of sigma_m
  Vector rwmh_scale;
  std::vector<Index> accepted, proposed;
  Index kept = 0;
};

std::vector<std::string> parameter_names(const DfmSpec& spec);
Vector parameter_vector(const DfmParams& params, const DfmSpec& spec);

ChainOutput run_chain(const Matrix& y, const DfmSpec& spec,
                      const Matrix& theta_init, const McmcSettings& settings);

/// Independent chains with seeds derived from settings.seed, run on at
/// most `threads` worker threads. Output order follows chain index.
std::vector<ChainOutput> run_chains(const Matrix& y, const DfmSpec& spec,
                                    const Matrix& theta_init,
                                    const McmcSettings& settings, int chains,
                                    int threads);

}  // namespace cgssm
