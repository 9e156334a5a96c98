#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cgssm/linalg.hpp"
#include "cgssm/ssm.hpp"

namespace cgssm {

/// One-step filter quantities at time t.
struct FilterState {
  Vector m_pred;   // E(x_t | y^{1:t-1})
  Matrix V_pred;   // Var(x_t | y^{1:t-1})
  Vector eta;      // one-step prediction error
  Matrix R;        // prediction error covariance
  Vector m_filt;   // E(x_t | y^{1:t})
  Matrix V_filt;   // Var(x_t | y^{1:t})
  double loglik = 0.0;

  Vector score;  // H' R^{-1} eta
  Matrix info;   // H' R^{-1} H
};

/// Measurement update from predicted moments (m_pred, V_pred) at time t.
FilterState filter_update(const Vector& m_pred, const Matrix& V_pred,
                          const SystemMatrices& mats, const Vector& y, Index t);

/// Prediction from the previous filtered moments followed by the update.
FilterState filter_step(const FilterState& prev, const SystemMatrices& mats,
                        const Vector& y, Index t);

/// First time point: predicted moments are the initial-state moments.
FilterState filter_first(const CgssModel& model, const SystemMatrices& mats,
                         const Vector& y);

/// Full forward pass; states[t] holds the quantities for time t.
std::vector<FilterState> run_filter(const CgssModel& model,
                                    const IndicatorSequence& indicators,
                                    const Vector& omega,
                                    const Matrix& observations);

/// log p(y | K, omega) as the sum of one-step predictive log densities.
double filter_loglik(const CgssModel& model, const IndicatorSequence& indicators,
                     const Vector& omega, const Matrix& observations);

/// E(x | y, K, omega), n x m, via the backward r-recursion.
Matrix smoothed_states(const CgssModel& model,
                       const IndicatorSequence& indicators, const Vector& omega,
                       const Matrix& observations);

/// Exact draw from p(x | y, K, omega) by mean correction: simulate a
/// synthetic (x+, y+), then x = E(x|y) - E(x|y+) + x+.
Matrix simulation_smoother(const CgssModel& model,
                           const IndicatorSequence& indicators,
                           const Vector& omega, const Matrix& observations,
                           std::uint64_t seed);
Matrix simulation_smoother(const CgssModel& model,
                           const IndicatorSequence& indicators,
                           const Vector& omega, const Matrix& observations,
                           Rng& rng);

/// State space model whose transition carries a regression term:
///   x_t = h_t + W_t beta + F_t x_{t-1} + Gamma_t u_t,  x_0 ~ N(m_1 + W_0 beta, V_1)
/// `base` holds the model with beta = 0. design(0, ., omega) is the
/// initial-mean loading W_0 and is always queried with label 0.
struct RegressionModel {
  CgssModel base;
  std::function<Matrix(Index t, int label, const Vector& omega)> design;
  Index k = 0;  // length of beta
};

/// The base model with a fixed beta folded into h_t and m_1.
CgssModel with_beta(const RegressionModel& model, const Vector& beta,
                    const Vector& omega);

/// Sufficient statistics of beta from one augmented filter pass:
///   log p(y | beta) = loglik0 + beta' s - beta' Q beta / 2.
struct BetaStats {
  double loglik0 = 0.0;
  Vector s;
  Matrix Q;
};

BetaStats beta_stats(const RegressionModel& model,
                     const IndicatorSequence& indicators, const Vector& omega,
                     const Matrix& observations);

/// Independent Gaussian prior on beta; excluded entries are held at zero.
struct BetaPrior {
  Vector mean;
  Vector variance;
  std::vector<bool> included;  // empty means all included
};

struct BetaPosterior {
  std::vector<Index> index;  // included coordinates
  Vector mean;               // over included coordinates
  Matrix precision;
  double log_marginal = 0.0;  // log p(y | K, omega) with beta integrated out
};

BetaPosterior beta_posterior(const BetaStats& stats, const BetaPrior& prior);

struct StateBetaDraw {
  Matrix x;
  Vector beta;
};

/// Joint draw of (x, beta): beta from p(beta | y, K, omega) with x integrated
/// out, then x from p(x | y, beta, K, omega).
StateBetaDraw joint_state_beta_draw(const RegressionModel& model,
                                    const IndicatorSequence& indicators,
                                    const Vector& omega,
                                    const Matrix& observations,
                                    const BetaPrior& prior, Rng& rng);
StateBetaDraw joint_state_beta_draw(const RegressionModel& model,
                                    const IndicatorSequence& indicators,
                                    const Vector& omega,
                                    const Matrix& observations,
                                    const BetaPrior& prior, std::uint64_t seed);

}  // namespace cgssm
