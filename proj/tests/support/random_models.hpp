#pragma once

// Random small conditionally Gaussian models for property tests.

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "cgssm/ssm.hpp"

namespace cgssm::testing {

struct RandomModelSpec {
  Index n = 8;
  Index p = 3;
  Index m = 2;
  Index r = 2;
  int support = 3;  // labels; label s scales Gamma by scales[s]
};

/// Time-varying random matrices; Gamma_t depends on the label through a
/// per-label diagonal scaling of its columns (label 0 zeroes the first
/// column, mimicking a no-break state).
struct RandomModel {
  std::shared_ptr<std::vector<SystemMatrices>> mats;
  std::shared_ptr<std::vector<Vector>> scales;  // per label, length r
  CgssModel model;
};

inline Matrix random_matrix(std::mt19937_64& rng, Index r, Index c,
                            double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix a(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) a(i, j) = nd(rng);
  return a;
}

inline RandomModel make_random_model(const RandomModelSpec& spec,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto mats = std::make_shared<std::vector<SystemMatrices>>();
  for (Index t = 0; t < spec.n; ++t) {
    SystemMatrices s;
    s.g = random_matrix(rng, spec.p, 1, 0.5);
    s.H = random_matrix(rng, spec.p, spec.m);
    s.G = random_matrix(rng, spec.p, spec.p, 0.6);
    s.G.diagonal().array() += 0.8;
    s.h = random_matrix(rng, spec.m, 1, 0.3);
    s.F = random_matrix(rng, spec.m, spec.m, 0.5 / std::sqrt(double(spec.m)));
    s.Gamma = random_matrix(rng, spec.m, spec.r, 0.7);
    mats->push_back(s);
  }
  auto scales = std::make_shared<std::vector<Vector>>();
  std::uniform_real_distribution<double> ud(0.5, 2.5);
  for (int s = 0; s < spec.support; ++s) {
    Vector sc(spec.r);
    for (Index j = 0; j < spec.r; ++j) sc(j) = ud(rng);
    if (s == 0) sc(0) = 0.0;
    scales->push_back(sc);
  }
  Matrix a = random_matrix(rng, spec.m, spec.m, 0.5);
  Matrix V1 = a * a.transpose() + 0.2 * Matrix::Identity(spec.m, spec.m);
  Vector m1 = random_matrix(rng, spec.m, 1, 0.5);
  auto provider = [mats, scales](Index t, int label, const Vector&) {
    SystemMatrices s = (*mats)[static_cast<std::size_t>(t)];
    s.Gamma = s.Gamma * (*scales)[static_cast<std::size_t>(label)].asDiagonal();
    return s;
  };
  return RandomModel{mats, scales,
                     CgssModel(spec.n, spec.p, spec.m, spec.r, provider, m1, V1)};
}

inline IndicatorSequence random_indicators(Index n, int support,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ud(0, support - 1);
  IndicatorSequence k(n, support);
  for (Index t = 0; t < n; ++t) k[t] = ud(rng);
  return k;
}

}  // namespace cgssm::testing
