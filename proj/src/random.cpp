#include "cgssm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cgssm {

double standard_normal(Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  return nd(rng);
}

Vector standard_normal_vector(Rng& rng, Index n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector z(n);
  for (Index i = 0; i < n; ++i) z(i) = nd(rng);
  return z;
}

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double gamma_rate(Rng& rng, double shape, double rate) {
  std::gamma_distribution<double> gd(shape, 1.0 / rate);
  return gd(rng);
}

double inv_gamma(Rng& rng, double shape, double scale) {
  return 1.0 / gamma_rate(rng, shape, scale);
}

Vector normalize_log_weights(std::span<const double> log_weights) {
  const Index s = static_cast<Index>(log_weights.size());
  Vector p(s);
  double top = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) top = std::max(top, w);
  if (!std::isfinite(top)) {
    throw NumericalError("all candidate log-weights are -inf or NaN");
  }
  double total = 0.0;
  for (Index i = 0; i < s; ++i) {
    p(i) = std::exp(log_weights[static_cast<std::size_t>(i)] - top);
    total += p(i);
  }
  p /= total;
  return p;
}

Index categorical_from_log(Rng& rng, std::span<const double> log_weights) {
  const Vector p = normalize_log_weights(log_weights);
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    if (u < acc) return i;
  }
  // rounding left u just above the accumulated mass; take the last
  // positive atom
  for (Index i = p.size() - 1; i >= 0; --i) {
    if (p(i) > 0.0) return i;
  }
  return 0;
}

}  // namespace cgssm
