#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cgssm/kalman.hpp"
#include "cgssm/ssm.hpp"

namespace cgssm {

/// Quadratic-form summaries of the future data:
///   p(y^{t+1:n} | x_t, K) ∝ exp{-(x_t' Omega_t x_t - 2 mu_t' x_t) / 2}.
/// Omega[n-1] = 0 and mu[n-1] = 0.
struct BackwardCache {
  std::vector<Matrix> Omega;
  std::vector<Vector> mu;
};

/// Conditional prior of one indicator given the others,
/// log p(K_t = label | K_{s != t}).
struct IndicatorPrior {
  int support_size = 1;
  std::function<double(Index t, int label, const IndicatorSequence& current)>
      log_prior;
};

/// Backward recursions for (Omega_t, mu_t) under the indicators `current`.
/// Omega_t depends on K_{t+1:n} only.
BackwardCache backward_pass(const CgssModel& model,
                            const IndicatorSequence& current,
                            const Vector& omega, const Matrix& observations);

/// log p(y^{t+1:n} | y^{1:t}, K) up to a constant that does not depend on
/// K^{1:t}, from the cache entry at t and the filtered moments at t.
double combine_future(const Matrix& Omega, const Vector& mu,
                      const Vector& m_filt, const Matrix& V_filt);

/// Candidate evaluation at a single time point.
struct CandidateSet {
  std::vector<double> log_weight;    // unnormalized log p(K_t = s | y, K_{-t})
  std::vector<FilterState> states;   // filter state under each candidate
};

/// Evaluates every candidate value of K_t from the shared incoming filter
/// state (ignored at t = 0).
CandidateSet evaluate_candidates(const CgssModel& model,
                                 const IndicatorPrior& prior,
                                 const Vector& omega, const Matrix& observations,
                                 const IndicatorSequence& current,
                                 const BackwardCache& cache, Index t,
                                 const FilterState* incoming);

/// Diagnostic counters and per-t normalized pmfs from one sweep.
struct SweepTrace {
  Index filter_steps = 0;
  Index backward_steps = 0;
  std::vector<Vector> pmf;
};

/// One forward sweep drawing each K_t from p(K_t | y, K_{s != t}, omega)
/// without conditioning on the states.
IndicatorSequence sample_indicators(const CgssModel& model,
                                    const IndicatorPrior& prior,
                                    const Vector& omega,
                                    const Matrix& observations,
                                    const IndicatorSequence& current, Rng& rng,
                                    SweepTrace* trace = nullptr);
IndicatorSequence sample_indicators(const CgssModel& model,
                                    const IndicatorPrior& prior,
                                    const Vector& omega,
                                    const Matrix& observations,
                                    const IndicatorSequence& current,
                                    std::uint64_t seed,
                                    SweepTrace* trace = nullptr);

}  // namespace cgssm
