#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cgssm/k_sampler.hpp"
#include "joint_gaussian.hpp"
#include "random_models.hpp"

namespace cgssm {
namespace {

using testing::make_random_model;
using testing::random_indicators;
using oracle::brute_force_pmf;

IndicatorPrior uniform_prior(int support) {
  IndicatorPrior p;
  p.support_size = support;
  p.log_prior = [](Index, int, const IndicatorSequence&) { return 0.0; };
  return p;
}

IndicatorPrior skewed_prior(int support) {
  IndicatorPrior p;
  p.support_size = support;
  p.log_prior = [](Index t, int label, const IndicatorSequence&) {
    return label == 0 ? std::log(0.7) : std::log(0.3 / 2.0) + 0.01 * double(t);
  };
  return p;
}

TEST(BackwardPass, LastEntryIsZero) {
  const auto rm = make_random_model({7, 2, 3, 2, 3}, 1);
  const auto k = random_indicators(7, 3, 2);
  const Matrix y = simulate(rm.model, k, Vector(), std::uint64_t{3}).observations;
  const BackwardCache c = backward_pass(rm.model, k, Vector(), y);
  EXPECT_TRUE(c.Omega.back().isZero(0.0));
  EXPECT_TRUE(c.mu.back().isZero(0.0));
}

TEST(BackwardPass, ScalarTwoStepByHand) {
  auto provider = [](Index, int, const Vector&) {
    SystemMatrices s;
    s.g = Vector::Constant(1, 0.3);
    s.H = Matrix::Constant(1, 1, 1.5);
    s.G = Matrix::Constant(1, 1, 0.4);
    s.h = Vector::Constant(1, -0.2);
    s.F = Matrix::Constant(1, 1, 0.9);
    s.Gamma = Matrix::Constant(1, 1, 0.7);
    return s;
  };
  const CgssModel model(2, 1, 1, 1, provider, Vector::Zero(1),
                        Matrix::Identity(1, 1));
  Matrix y(2, 1);
  y << 0.1, 2.0;
  const BackwardCache c = backward_pass(model, IndicatorSequence(2, 1), Vector(), y);
  // y_2 | x_1 ~ N(g + H h + H F x_1, H^2 Gamma^2 + G^2)
  const double R = 1.5 * 1.5 * 0.49 + 0.16;
  const double HF = 1.5 * 0.9;
  EXPECT_NEAR(c.Omega[0](0, 0), HF * HF / R, 1e-14);
  EXPECT_NEAR(c.mu[0](0), HF * (2.0 - 0.3 - 1.5 * -0.2) / R, 1e-14);
}

TEST(BackwardPass, QuadraticFormMatchesFutureDensity) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rm = make_random_model({9, 3, 3, 2, 3}, rng());
    const auto k = random_indicators(9, 3, rng());
    const Matrix y = simulate(rm.model, k, Vector(), rng()).observations;
    const BackwardCache c = backward_pass(rm.model, k, Vector(), y);
    for (Index t = 0; t < 8; ++t) {
      const Vector zero = Vector::Zero(3);
      const double f0 =
          oracle::future_log_density_given_state(rm.model, k, Vector(), y, t, zero);
      for (int probe = 0; probe < 5; ++probe) {
        const Vector x = testing::random_matrix(rng, 3, 1, 1.5);
        const double f = oracle::future_log_density_given_state(rm.model, k,
                                                                Vector(), y, t, x);
        const double quad =
            -0.5 * x.dot(c.Omega[static_cast<std::size_t>(t)] * x) +
            c.mu[static_cast<std::size_t>(t)].dot(x);
        EXPECT_NEAR(f - f0, quad, 1e-8) << "trial " << trial << " t " << t;
      }
    }
  }
}

TEST(BackwardPass, RankDeficientNoiseStillMatches) {
  // r = 1 < m = 3: N is rank deficient
  const auto rm = make_random_model({8, 2, 3, 1, 2}, 808);
  const auto k = random_indicators(8, 2, 809);
  const Matrix y = simulate(rm.model, k, Vector(), std::uint64_t{810}).observations;
  const BackwardCache c = backward_pass(rm.model, k, Vector(), y);
  std::mt19937_64 rng(811);
  for (Index t = 0; t < 7; ++t) {
    const Vector x = testing::random_matrix(rng, 3, 1);
    const double f = oracle::future_log_density_given_state(rm.model, k, Vector(),
                                                            y, t, x);
    const double f0 = oracle::future_log_density_given_state(
        rm.model, k, Vector(), y, t, Vector::Zero(3));
    EXPECT_NEAR(f - f0,
                -0.5 * x.dot(c.Omega[static_cast<std::size_t>(t)] * x) +
                    c.mu[static_cast<std::size_t>(t)].dot(x),
                1e-8);
  }
}

// Prefix loglik up to t plus the future combination differs from the full
// joint loglik by a constant that does not depend on K_{0:t}.
TEST(CombineFuture, DifferencesMatchJointLikelihood) {
  const auto rm = make_random_model({8, 2, 2, 2, 3}, 515);
  const Index t = 4;
  const auto base = random_indicators(8, 3, 516);
  const Matrix y = simulate(rm.model, base, Vector(), std::uint64_t{517}).observations;
  const BackwardCache c = backward_pass(rm.model, base, Vector(), y);
  auto score = [&](const IndicatorSequence& k) {
    const auto pass = run_filter(rm.model, k, Vector(), y);
    double ll = 0.0;
    for (Index s = 0; s <= t; ++s) ll += pass[static_cast<std::size_t>(s)].loglik;
    const auto& st = pass[static_cast<std::size_t>(t)];
    return ll + combine_future(c.Omega[static_cast<std::size_t>(t)],
                               c.mu[static_cast<std::size_t>(t)], st.m_filt,
                               st.V_filt);
  };
  const double ref = score(base) - oracle::joint_loglik(rm.model, base, Vector(), y);
  for (std::uint64_t seed = 600; seed < 606; ++seed) {
    IndicatorSequence k = random_indicators(8, 3, seed);
    for (Index s = t + 1; s < 8; ++s) k[s] = base[s];
    EXPECT_NEAR(score(k) - oracle::joint_loglik(rm.model, k, Vector(), y), ref,
                1e-8);
  }
}


TEST(SampleIndicators, SweepPmfsMatchBruteForce) {
  const auto rm = make_random_model({8, 2, 2, 2, 3}, 909);
  const auto truth = random_indicators(8, 3, 910);
  const Matrix y = simulate(rm.model, truth, Vector(), std::uint64_t{911}).observations;
  const IndicatorPrior prior = skewed_prior(3);
  const auto current = random_indicators(8, 3, 912);
  SweepTrace trace;
  const IndicatorSequence next =
      sample_indicators(rm.model, prior, Vector(), y, current, std::uint64_t{913},
                        &trace);
  ASSERT_EQ(trace.pmf.size(), 8u);
  for (Index t = 0; t < 8; ++t) {
    // conditioning set: labels already drawn before t, current after t
    IndicatorSequence k = current;
    for (Index s = 0; s < t; ++s) k[s] = next[s];
    const Vector expect = brute_force_pmf(rm.model, prior, y, k, t);
    const Vector& got = trace.pmf[static_cast<std::size_t>(t)];
    EXPECT_LT((got - expect).cwiseAbs().maxCoeff(), 1e-8) << "t " << t;
    EXPECT_NEAR(got.sum(), 1.0, 1e-12);
  }
}

TEST(SampleIndicators, StepCounts) {
  const auto rm = make_random_model({10, 2, 2, 2, 4}, 1212);
  const auto k = random_indicators(10, 4, 1213);
  const Matrix y = simulate(rm.model, k, Vector(), std::uint64_t{1214}).observations;
  SweepTrace trace;
  sample_indicators(rm.model, uniform_prior(4), Vector(), y, k,
                    std::uint64_t{1215}, &trace);
  EXPECT_EQ(trace.filter_steps, 40);
  EXPECT_EQ(trace.backward_steps, 9);
}

TEST(SampleIndicators, DegeneratePriorForcesNullLabel) {
  const auto rm = make_random_model({9, 2, 2, 2, 3}, 1313);
  const auto k = random_indicators(9, 3, 1314);
  const Matrix y = simulate(rm.model, k, Vector(), std::uint64_t{1315}).observations;
  IndicatorPrior prior;
  prior.support_size = 3;
  prior.log_prior = [](Index, int label, const IndicatorSequence&) {
    return label == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  const IndicatorSequence next =
      sample_indicators(rm.model, prior, Vector(), y, k, std::uint64_t{1316});
  for (Index t = 0; t < 9; ++t) EXPECT_EQ(next[t], 0);
}

TEST(SampleIndicators, AllZeroWeightIsReported) {
  const auto rm = make_random_model({5, 2, 2, 2, 2}, 1414);
  const auto k = random_indicators(5, 2, 1415);
  const Matrix y = simulate(rm.model, k, Vector(), std::uint64_t{1416}).observations;
  IndicatorPrior prior;
  prior.support_size = 2;
  prior.log_prior = [](Index t, int, const IndicatorSequence&) {
    return t == 3 ? -std::numeric_limits<double>::infinity() : 0.0;
  };
  EXPECT_THROW(sample_indicators(rm.model, prior, Vector(), y, k,
                                 std::uint64_t{1417}),
               NumericalError);
}

TEST(SampleIndicators, SameSeedSameDraw) {
  const auto rm = make_random_model({12, 2, 2, 2, 3}, 1515);
  const auto k = random_indicators(12, 3, 1516);
  const Matrix y = simulate(rm.model, k, Vector(), std::uint64_t{1517}).observations;
  const auto a = sample_indicators(rm.model, uniform_prior(3), Vector(), y, k,
                                   std::uint64_t{5});
  const auto b = sample_indicators(rm.model, uniform_prior(3), Vector(), y, k,
                                   std::uint64_t{5});
  EXPECT_EQ(a.labels, b.labels);
}

}  // namespace
}  // namespace cgssm
