#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cgssm/random.hpp"
#include "cgssm/types.hpp"

namespace cgssm {

/// System matrices for one time point t of a conditionally Gaussian state
/// space model
///
///   y_t     = g_t + H_t x_t + G_t e_t,           e_t ~ N(0, I_p)
///   x_t     = h_t + F_t x_{t-1} + Gamma_t u_t,   u_t ~ N(0, I_r)
///
/// The transition block (h, F, Gamma) describes the move *into* x_t, so the
/// indicator K_t only touches quantities up to time t. At t = 0 the
/// transition block is ignored; x_0 ~ N(m_1, V_1).
struct SystemMatrices {
  Vector g;      // p
  Matrix H;      // p x m
  Matrix G;      // p x p
  Vector h;      // m
  Matrix F;      // m x m
  Matrix Gamma;  // m x r
};

/// Maps (t, K_t, omega) to the system matrices at t. Must be pure.
using SystemProvider =
    std::function<SystemMatrices(Index t, int label, const Vector& omega)>;

/// Discrete mixture indicators, one label per time point. Label 0 is the
/// null (no-break) state.
struct IndicatorSequence {
  std::vector<int> labels;
  int support_size = 1;

  IndicatorSequence() = default;
  IndicatorSequence(Index n, int support)
      : labels(static_cast<std::size_t>(n), 0), support_size(support) {}

  Index size() const { return static_cast<Index>(labels.size()); }
  int operator[](Index t) const { return labels[static_cast<std::size_t>(t)]; }
  int& operator[](Index t) { return labels[static_cast<std::size_t>(t)]; }

  /// Throws DimensionError if any label is outside [0, support_size).
  void validate() const;
};

class CgssModel {
 public:
  CgssModel(Index n, Index p, Index m, Index r, SystemProvider provider,
            Vector init_mean, Matrix init_cov);

  Index n() const { return n_; }
  Index p() const { return p_; }
  Index m() const { return m_; }
  Index r() const { return r_; }
  const Vector& init_mean() const { return init_mean_; }
  const Matrix& init_cov() const { return init_cov_; }
  const SystemProvider& provider() const { return provider_; }

  /// Provider output at t, checked against the declared (p, m, r).
  SystemMatrices matrices(Index t, int label, const Vector& omega) const;

  /// Same model with a different time-point count (the provider must be
  /// valid for the new range).
  CgssModel with_length(Index n) const;

 private:
  Index n_, p_, m_, r_;
  SystemProvider provider_;
  Vector init_mean_;
  Matrix init_cov_;
};

struct Simulation {
  Matrix observations;  // n x p
  Matrix states;        // n x m
};

/// Forward draw of states and observations.
Simulation simulate(const CgssModel& model, const IndicatorSequence& indicators,
                    const Vector& omega, std::uint64_t seed);

/// Same as simulate() but drawing from a caller-owned generator.
Simulation simulate(const CgssModel& model, const IndicatorSequence& indicators,
                    const Vector& omega, Rng& rng);

/// Draw from N(mean, cov) for symmetric PSD cov (rank-deficient allowed).
Vector draw_gaussian(Rng& rng, const Vector& mean, const Matrix& cov);

}  // namespace cgssm
