#pragma once

#include <cstdint>
#include <vector>

#include "cgssm/kalman.hpp"
#include "cgssm/ssm.hpp"

namespace cgssm {

/// k-dimensional sufficient observations for the factors of
///   y_t = Theta f_t + e_t,  e_t ~ N(0, diag(noise_var_t)),
/// with yL_t = (Theta' S^-1 Theta)^-1 Theta' S^-1 y_t and
/// SigmaL_t = (Theta' S^-1 Theta)^-1.
struct ReducedObservations {
  Matrix yL;                     // n x k
  Matrix SigmaL;                 // k x k, used when !time_varying
  std::vector<Matrix> SigmaL_t;  // per t, used when time_varying
  bool time_varying = false;

  const Matrix& sigma(Index t) const {
    return time_varying ? SigmaL_t[static_cast<std::size_t>(t)] : SigmaL;
  }
};

/// Time-invariant noise variances (length p). Never forms a p x p matrix.
                           ReducedObservations reduce(const Matrix& Theta, const Vector& noise_var,
                                        const Matrix& observations);

/// Per-time noise variances (n x p).
ReducedObservations reduce_time_varying(const Matrix& Theta,
                                        const Matrix& noise_var,
                                        const Matrix& observations);

/// Replaces the observation equation of `state_model` by
///   y_t = Theta Phi x_t + e_t,  e_t ~ N(0, diag(noise_var)).
CgssModel with_factor_observation(const CgssModel& state_model,
                                  const Matrix& Theta, const Matrix& Phi,
                                  const Vector& noise_var);

/// Replaces the observation equation of `state_model` by
///   yL_t = Phi x_t + eL_t,  eL_t ~ N(0, SigmaL_t).
CgssModel with_reduced_observation(const CgssModel& state_model,
                                   const Matrix& Phi,
                                   const ReducedObservations& reduced);

RegressionModel with_factor_observation(const RegressionModel& state_model,
                                        const Matrix& Theta, const Matrix& Phi,
                                        const Vector& noise_var);
RegressionModel with_reduced_observation(const RegressionModel& state_model,
                                         const Matrix& Phi,
                                         const ReducedObservations& reduced);

/// log p(yL | K, omega) for parameters that enter the state equation only.
/// Differences across such parameters equal the differences of the
/// full-data log likelihood.
double marginal_state_loglik(const CgssModel& state_model, const Matrix& Phi,
                             const ReducedObservations& reduced,
                             const IndicatorSequence& indicators,
                             const Vector& omega);

struct BenchRow {
  Index p = 0;
  double naive_seconds = 0.0;    // per sweep
  double reduced_seconds = 0.0;  // per sweep, transform included
  bool naive_estimated = false;  // extrapolated from a truncated sweep
  double speedup() const { return naive_seconds / reduced_seconds; }
};

struct BenchOptions {
  Index n = 200;
  Index k = 2;
  int repetitions = 3;
  /// Naive sweeps predicted to take longer than this many seconds are timed
  /// on a shortened series and scaled up linearly in n.
  double naive_budget_seconds = 20.0;
  std::uint64_t seed = 1;
};

/// Times one indicator sweep with and without the reduction for each p.
std::vector<BenchRow> bench_reduction(const std::vector<Index>& p_grid,
                                      const BenchOptions& options);

/// Least-squares slope of log(naive_seconds) on log(p) over rows with
/// p >= p_min.
double naive_loglog_slope(const std::vector<BenchRow>& rows, Index p_min);

}  // namespace cgssm
