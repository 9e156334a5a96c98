#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "cgssm/types.hpp"

namespace cgssm {

/// Explicitly seeded generator; every stochastic routine takes one of these
/// (or a seed that constructs one) so runs are reproducible.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x9e3779b9u};
  return Rng(seq);
}

/// Derives an independent child seed from a parent generator.
inline std::uint64_t split_seed(Rng& rng) { return rng(); }

double standard_normal(Rng& rng);
Vector standard_normal_vector(Rng& rng, Index n);
double uniform01(Rng& rng);

/// Gamma with shape a and rate b (mean a / b).
double gamma_rate(Rng& rng, double shape, double rate);

/// Inverted gamma IG(a, b): 1 / Gamma(a, rate = b), mean b / (a - 1).
double inv_gamma(Rng& rng, double shape, double scale);

/// Draws an index from unnormalized log weights (max-subtracted).
Index categorical_from_log(Rng& rng, std::span<const double> log_weights);

/// Normalizes log weights into probabilities, in log space.
Vector normalize_log_weights(std::span<const double> log_weights);

}  // namespace cgssm
