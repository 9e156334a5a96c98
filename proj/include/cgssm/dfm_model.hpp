#pragma once

#include <array>
#include <numbers>
#include <vector>

#include "cgssm/k_sampler.hpp"
#include "cgssm/kalman.hpp"
#include "cgssm/random.hpp"

namespace cgssm {

/// Hyperparameters of the parameter priors. Squared scales (sigma_f^2,
/// eta^2, sigma_m^2) are inverted gamma IG(nu/2, s/2); kappa is
/// Gamma(nu_kappa/2, rate = S_kappa/2).
struct DfmPriors {
  double alpha_rho = 15.0;
  double beta_rho = 1.5;
  double nu_f = 10.0;
  double s_f = 0.1;
  // break sizes, ordered level 1, level 2, slope 1, slope 2
  std::array<double, 4> nu_eta = {3.0, 3.0, 3.0, 3.0};
  std::array<double, 4> s_eta = {30.0, 300.0, 0.1, 0.4};
  double alpha_lambda = 2.0;
  double beta_lambda = 2.0;
  double lambda_a = 0.0;
  double lambda_b = 4.0 * std::numbers::pi / 23.0;
  double nu_m = 10.0;
  double s_m = 0.1;
  double sigma_beta = 3.0;
  double p_varpi = 0.5;
  double nu_kappa = 10.0;
  double S_kappa = 0.01;
};

enum class ThetaMode { Fixed, Unknown };

struct DfmSpec {
  Index k = 1;            // common components
  Index kr = 0;           // regressors
  Matrix regressors;      // n x kr; row t pairs with observation t
  double pi = 0.05;       // prior probability of some break at t
  DfmPriors priors;
  ThetaMode theta_mode = ThetaMode::Unknown;
  double omega0 = 0.0;               // initial-cycle loading on w_0' beta_i
  double initial_level_var = 1e6;    // prior variance of mu_{i,1}
  double initial_slope_var = 1e6;    // V_1 entry of the slope

  Index state_dim() const { return 4 * k; }
  Index beta_dim() const { return k * (kr + 1); }
  int support_size() const { return static_cast<int>(4 * k + 1); }
  /// Throws ConfigError listing every invalid field.
  void validate(Index n) const;
};

/// One common component: damped cycle, level, slope and regression.
struct ComponentParams {
  double rho = 0.9;
  double lambda = 2.0 * std::numbers::pi / 23.0;
  double sigma_f = 0.1;
  std::array<double, 4> eta = {1.0, 1.0, 1.0, 1.0};
  Vector beta;                // kr
  std::vector<bool> varpi;    // kr inclusion flags
  double level0 = 0.0;        // mu_{i,1}
};

struct DfmParams {
  std::vector<ComponentParams> comp;
  Matrix Theta;      // p x k
  Vector kappa;      // k, prior precisions of free Theta entries
  Vector noise_var;  // p, diagonal of Sigma
};

/// Decoded meaning of a categorical label.
struct BreakLabel {
  bool null = true;
  Index component = 0;
  int kind = 0;  // 0 level, 1 slope
  int size = 0;  // 0 or 1
  int eta_index() const { return 2 * kind + size; }
};

BreakLabel decode_label(int label, Index k);
int encode_label(Index component, int kind, int size, Index k);

/// Phi: k x 4k, picking cycle + level of each component.
Matrix selection_matrix(Index k);

/// Transition into t (t >= 1) and the initial moments of the state
///   [s, psi*, mu, delta] per component, s = psi + (regression term).
Matrix transition_matrix(const DfmSpec& spec, const DfmParams& params);
Matrix innovation_loading(const DfmSpec& spec, const DfmParams& params,
                          int label);
/// W_t (4k x k(kr+1)); W_0 loads the initial level and omega0 w_0.
Matrix design_matrix(const DfmSpec& spec, const DfmParams& params, Index t);
Matrix initial_state_cov(const DfmSpec& spec, const DfmParams& params);

/// Full system matrices at (t, label) with beta folded into h_t:
/// H = Theta Phi, G = diag(sqrt(noise_var)).
SystemMatrices assemble(const DfmSpec& spec, const DfmParams& params, Index t,
                        int label);

/// Regression form of the state equation over n time points. Its own
/// observation equation is a placeholder (H = Phi, G = I); wrap it with
/// with_factor_observation or with_reduced_observation.
RegressionModel state_regression_model(const DfmSpec& spec,
                                       const DfmParams& params, Index n);

/// beta = (beta_1, mu_{1,1}, beta_2, mu_{2,1}, ...).
Vector pack_beta(const DfmSpec& spec, const DfmParams& params);
void unpack_beta(const DfmSpec& spec, const Vector& beta, DfmParams& params);
Index beta_slot(const DfmSpec& spec, Index component, Index j);
Index level_slot(const DfmSpec& spec, Index component);

/// Gaussian prior of beta given the inclusion flags.
BetaPrior beta_prior(const DfmSpec& spec, const DfmParams& params);

/// Independent categorical prior: null 1 - pi, every break label pi/(4k).
IndicatorPrior indicator_prior(const DfmSpec& spec);

// Log densities of the individual priors; -inf outside the support.
double log_beta_density(double x, double a, double b);
double log_stretched_beta_density(double x, double a, double b, double lo,
                                  double hi);
/// IG(shape, scale) density of v = sigma^2.
double log_inv_gamma_density(double v, double shape, double scale);
double log_gamma_density(double x, double shape, double rate);
double log_normal_density(double x, double mean, double var);

/// Sum of all parameter log priors (rho, lambda, sigma_f, eta, beta/varpi,
/// Theta free entries and kappa when unknown, noise variances).
double log_priors(const DfmParams& params, const DfmSpec& spec);

/// Free entries of Theta under the identification Theta_ii = 1,
/// Theta_ij = 0 for j > i: row i has columns 0..min(i, k)-1 free.
Index free_columns(Index row, Index k);

/// Draws every parameter from its prior (Theta in Unknown mode too).
DfmParams draw_from_prior(const DfmSpec& spec, Index p, Rng& rng);

/// Draws K_t independently from indicator_prior.
IndicatorSequence draw_indicators(const DfmSpec& spec, Index n, Rng& rng);

}  // namespace cgssm
