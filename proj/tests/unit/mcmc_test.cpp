#include <gtest/gtest.h>

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <random>

#include "cgssm/mcmc.hpp"
#include "geweke.hpp"
#include "random_models.hpp"

namespace cgssm {
namespace {

using testing::random_matrix;

TEST(EtaStep, HandDerivedUpdates) {
  DfmSpec spec;
  spec.k = 1;
  DfmParams params;
  params.comp.resize(1);
  params.comp[0].sigma_f = 0.5;
  // columns: s, psi*, mu, delta
  Matrix x(4, 4);
  x << 0.1, 0.2, 1.0, 0.1,
       0.0, 0.0, 3.0, 0.1,
       0.0, 0.0, 3.1, 0.5,
       0.0, 0.0, 2.0, 0.5;
  IndicatorSequence K(4, spec.support_size());
  K[1] = encode_label(0, 0, 0, 1);  // level, size 1
  K[2] = encode_label(0, 1, 1, 1);  // slope, size 2
  K[3] = encode_label(0, 0, 0, 1);
  const auto post = eta_posterior(x, K, params, spec);
  const auto& q = spec.priors;
  const double e1 = (3.0 - 1.0 - 0.1) / 0.5;
  const double e3 = (2.0 - 3.1 - 0.5) / 0.5;
  const double e2 = (0.5 - 0.1) / 0.5;
  EXPECT_NEAR(post[0][0].shape, q.nu_eta[0] / 2 + 1.0, 1e-12);
  EXPECT_NEAR(post[0][0].scale, q.s_eta[0] / 2 + 0.5 * (e1 * e1 + e3 * e3), 1e-10);
  EXPECT_NEAR(post[0][3].shape, q.nu_eta[3] / 2 + 0.5, 1e-12);
  EXPECT_NEAR(post[0][3].scale, q.s_eta[3] / 2 + 0.5 * e2 * e2, 1e-10);
  EXPECT_EQ(post[0][1].shape, q.nu_eta[1] / 2);
  EXPECT_EQ(post[0][1].scale, q.s_eta[1] / 2);
  EXPECT_EQ(post[0][2].scale, q.s_eta[2] / 2);
}

TEST(ThetaStep, MatchesDenseRegression) {
  std::mt19937_64 g(3);
  const Index n = 30, k = 3;
  const Matrix f = random_matrix(g, n, k);
  const Vector y = random_matrix(g, n, 1);
  const Vector kappa = (Vector(3) << 0.5, 2.0, 7.0).finished();
  const double s2 = 0.3;
  for (Index row : {0, 1, 2, 5}) {
    const GaussianPosterior post = theta_row_posterior(y, f, row, s2, kappa);
    const Index nf = std::min<Index>(row, k);
    ASSERT_EQ(post.mean.size(), nf);
    if (nf == 0) continue;
    Vector z = y;
    if (row < k) z -= f.col(row);
    Matrix P = f.leftCols(nf).transpose() * f.leftCols(nf) / s2;
    for (Index j = 0; j < nf; ++j) P(j, j) += kappa(j);
    const Vector mean = P.inverse() * (f.leftCols(nf).transpose() * z / s2);
    EXPECT_LT((post.precision - P).norm(), 1e-10);
    EXPECT_LT((post.mean - mean).norm(), 1e-10);
  }
}

TEST(KappaStep, HandDerivedUpdates) {
  DfmSpec spec;
  spec.k = 2;
  Matrix Theta(4, 2);
  Theta << 1.0, 0.0,
           0.5, 1.0,
           -2.0, 0.3,
           1.5, -0.7;
  const auto post = kappa_posterior(Theta, spec);
  const auto& q = spec.priors;
  EXPECT_NEAR(post[0].shape, q.nu_kappa / 2 + 1.5, 1e-12);
  EXPECT_NEAR(post[0].rate, q.S_kappa / 2 + 0.5 * (0.25 + 4.0 + 2.25), 1e-10);
  EXPECT_NEAR(post[1].shape, q.nu_kappa / 2 + 1.0, 1e-12);
  EXPECT_NEAR(post[1].rate, q.S_kappa / 2 + 0.5 * (0.09 + 0.49), 1e-10);
}

TEST(NoiseStep, HandDerivedUpdates) {
  DfmSpec spec;
  spec.k = 1;
  Matrix y(3, 2);
  y << 1.0, 2.0,
       0.0, -1.0,
       2.0, 0.5;
  Matrix f(3, 1);
  f << 0.5, 0.0, 1.0;
  Matrix Theta(2, 1);
  Theta << 1.0, 2.0;
  const auto post = noise_posterior(y, f, Theta, spec);
  const auto& q = spec.priors;
  const double r0 = 0.25 + 0.0 + 1.0;
  const double r1 = 1.0 + 1.0 + 2.25;
  EXPECT_NEAR(post[0].shape, (q.nu_m + 3) / 2, 1e-12);
  EXPECT_NEAR(post[0].scale, (q.s_m + r0) / 2, 1e-10);
  EXPECT_NEAR(post[1].scale, (q.s_m + r1) / 2, 1e-10);
}

// log of  int exp(l0 + b's - b'Qb/2) N(b; 0, diag(d)) db
double gaussian_integral(double l0, const Vector& s, const Matrix& Q,
                         const Vector& d) {
  const Index m = s.size();
  const Matrix P = Q + Matrix(d.cwiseInverse().asDiagonal());
  const Matrix I = Matrix::Identity(m, m);
  const double logdet = std::log((I + Matrix(d.asDiagonal()) * Q).determinant());
  return l0 - 0.5 * logdet + 0.5 * s.dot(P.inverse() * s);
}

TEST(VarpiStep, LogOddsMatchGaussianIntegrals) {
  const Index n = 25;
  DfmSpec spec;
  spec.k = 1;
  spec.kr = 2;
  spec.initial_level_var = 4.0;
  spec.initial_slope_var = 0.1;
  Rng rng = make_rng(4);
  spec.regressors = Matrix(n, 2);
  for (Index t = 0; t < n; ++t) {
    spec.regressors(t, 0) = std::sin(0.3 * double(t));
    spec.regressors(t, 1) = standard_normal(rng);
  }
  DfmParams params = draw_from_prior(spec, 3, rng);
  params.comp[0].rho = 0.7;
  params.comp[0].sigma_f = 0.4;
  params.comp[0].varpi = {true, false};
  params.noise_var = Vector::Constant(3, 0.2);
  const IndicatorSequence K = draw_indicators(spec, n, rng);
  std::mt19937_64 yrng(1);
  const Matrix y = random_matrix(yrng, n, 3);
  const ReducedObservations red = reduce(params.Theta, params.noise_var, y);
  const RegressionModel model = reduced_regression(spec, params, red);

  // quadratic coefficients of log p(y | beta) from filter evaluations
  const Index b = spec.beta_dim();
  auto ll = [&](const Vector& beta) {
    return filter_loglik(with_beta(model, beta, Vector()), K, Vector(), red.yL);
  };
  const double l0 = ll(Vector::Zero(b));
  Vector s(b);
  Matrix Q(b, b);
  for (Index i = 0; i < b; ++i) {
    const Vector e = Vector::Unit(b, i);
    const double lp = ll(e), lm = ll(-e);
    s(i) = 0.5 * (lp - lm);
    Q(i, i) = -(lp + lm - 2 * l0);
  }
  for (Index i = 0; i < b; ++i)
    for (Index j = i + 1; j < b; ++j) {
      const Vector e = Vector::Unit(b, i) + Vector::Unit(b, j);
      Q(i, j) = Q(j, i) = -(ll(e) - l0 - s(i) - s(j) + 0.5 * Q(i, i) + 0.5 * Q(j, j));
    }

  const BetaStats stats = beta_stats(model, K, Vector(), red.yL);
  for (Index j = 0; j < 2; ++j) {
    // included set: level slot, the other flag as is, and j toggled
    auto sub = [&](bool with_j) {
      std::vector<Index> idx;
      for (Index c = 0; c < b; ++c) {
        const bool other = c < 2 && c != j && params.comp[0].varpi[static_cast<std::size_t>(c)];
        if (c == 2 || (c == j && with_j) || other) idx.push_back(c);
      }
      Vector ss(idx.size()), dd(idx.size());
      Matrix QQ(idx.size(), idx.size());
      for (std::size_t u = 0; u < idx.size(); ++u) {
        ss(u) = s(idx[u]);
        dd(u) = idx[u] == 2 ? spec.initial_level_var : 9.0;
        for (std::size_t v = 0; v < idx.size(); ++v) QQ(u, v) = Q(idx[u], idx[v]);
      }
      return gaussian_integral(l0, ss, QQ, dd);
    };
    const double expect = sub(true) - sub(false);  // p_varpi = 0.5
    EXPECT_NEAR(varpi_log_odds(stats, spec, params, 0, j), expect, 1e-7)
        << "j=" << j;
  }
}

TEST(Adapt, MonotoneAndDiminishing) {
  double up = 1.0, down = 1.0;
  for (Index j = 1; j <= 1000; ++j) {
    const double u = adapt_rwmh(up, true, j);
    const double d = adapt_rwmh(down, false, j);
    EXPECT_GT(u, up);
    EXPECT_LT(d, down);
    EXPECT_GT(d, 0.0);
    EXPECT_LE(std::abs(std::log(u / up)), kRwmhGain / double(j) + 1e-15);
    EXPECT_LE(std::abs(std::log(d / down)), kRwmhGain / double(j) + 1e-15);
    up = u;
    down = d;
  }
}

TEST(Adapt, StandardNormalAcceptance) {
  Rng rng = make_rng(2024);
  double x = 0.0, scale = 10.0;
  Index accepted = 0;
  const Index iters = 5000;
  for (Index j = 1; j <= iters; ++j) {
    const double y = x + scale * standard_normal(rng);
    const bool acc = std::log(uniform01(rng)) < 0.5 * (x * x - y * y);
    if (acc) {
      x = y;
      ++accepted;
    }
    scale = adapt_rwmh(scale, acc, j);
  }
  const double rate = double(accepted) / double(iters);
  EXPECT_GE(rate, 0.34);
  EXPECT_LE(rate, 0.54);
}

TEST(InefficiencyFactor, IidAndAutoregressive) {
  Rng rng = make_rng(7);
  const Index n = 100000;
  std::vector<double> iid(n), ar(n);
  double prev = 0.0;
  for (Index t = 0; t < n; ++t) {
    iid[static_cast<std::size_t>(t)] = standard_normal(rng);
    prev = 0.5 * prev + standard_normal(rng);
    ar[static_cast<std::size_t>(t)] = prev;
  }
  EXPECT_NEAR(inefficiency_factor(iid), 1.0, 0.1);
  EXPECT_NEAR(inefficiency_factor(ar), 3.0, 0.3);
  EXPECT_THROW(inefficiency_factor(std::vector<double>(500, 1.0)), NumericalError);
  EXPECT_THROW(inefficiency_factor(std::vector<double>(50, 1.0)), NumericalError);
}

struct SmallProblem {
  DfmSpec spec;
  Matrix y;
  Matrix theta;
};

SmallProblem small_problem(bool with_break, std::uint64_t seed) {
  SmallProblem sp;
  sp.spec.k = 1;
  sp.spec.initial_slope_var = 1e-4;
  sp.spec.theta_mode = ThetaMode::Fixed;
  const Index n = 60, p = 6;
  Rng rng = make_rng(seed);
  std::mt19937_64 g(seed);
  sp.theta = random_matrix(g, p, 1);
  sp.theta(0, 0) = 1.0;
  Matrix f(n, 1);
  double psi = 0.0, star = 0.0;
  const double rc = 0.8 * std::cos(0.27), rs = 0.8 * std::sin(0.27);
  for (Index t = 0; t < n; ++t) {
    const double a = rc * psi + rs * star + 0.3 * standard_normal(rng);
    star = -rs * psi + rc * star + 0.3 * standard_normal(rng);
    psi = a;
    f(t, 0) = psi + (with_break && t >= 30 ? 4.0 : 0.0);
  }
  sp.y = f * sp.theta.transpose() + 0.3 * random_matrix(g, n, p);
  return sp;
}

TEST(Chain, ZeroIterationsIsEmpty) {
  const SmallProblem sp = small_problem(false, 1);
  McmcSettings st;
  st.iterations = 0;
  const ChainOutput out = run_chain(sp.y, sp.spec, sp.theta, st);
  EXPECT_EQ(out.kept, 0);
  EXPECT_EQ(out.draws.rows(), 0);
  EXPECT_EQ(out.label_counts.sum(), 0.0);
}

TEST(Chain, SameSeedIsBitIdentical) {
  const SmallProblem sp = small_problem(true, 2);
  McmcSettings st;
  st.iterations = 30;
  st.burn_in = 10;
  st.seed = 99;
  const ChainOutput a = run_chain(sp.y, sp.spec, sp.theta, st);
  const ChainOutput b = run_chain(sp.y, sp.spec, sp.theta, st);
  EXPECT_EQ(a.kept, 20);
  EXPECT_TRUE((a.draws.array() == b.draws.array()).all());
  EXPECT_TRUE((a.trend_sum.array() == b.trend_sum.array()).all());
  EXPECT_EQ(a.trend_draws, b.trend_draws);
  // worker threads do not change the chains
  const auto one = run_chains(sp.y, sp.spec, sp.theta, st, 2, 1);
  const auto two = run_chains(sp.y, sp.spec, sp.theta, st, 2, 2);
  EXPECT_TRUE((one[0].draws.array() == a.draws.array()).all());
  EXPECT_TRUE((one[1].draws.array() == two[1].draws.array()).all());
  EXPECT_FALSE((one[0].draws.array() == one[1].draws.array()).all());
}

TEST(Chain, UnknownLoadingsKeepIdentification) {
  SmallProblem sp = small_problem(false, 3);
  sp.spec.k = 1;
  sp.spec.theta_mode = ThetaMode::Unknown;
  McmcSettings st;
  st.iterations = 20;
  st.burn_in = 0;
  Rng rng = make_rng(5);
  ChainState s = initial_state(sp.y, sp.spec, sp.theta * 2.0, rng);
  EXPECT_EQ(s.params.Theta(0, 0), 1.0);
  for (int it = 0; it < 20; ++it) {
    gibbs_sweep(s, sp.y, sp.spec, rng);
    EXPECT_EQ(s.params.Theta(0, 0), 1.0);
    EXPECT_TRUE((s.params.noise_var.array() > 0).all());
    EXPECT_GT(s.params.kappa(0), 0.0);
  }
  EXPECT_EQ(s.iteration, 20);
}

TEST(Chain, NoBreakDataWithRareBreakPrior) {
  SmallProblem sp = small_problem(false, 4);
  sp.spec.pi = 1e-4;
  McmcSettings st;
  st.iterations = 2000;
  st.burn_in = 200;
  st.store_trend_draws = false;
  const ChainOutput out = run_chain(sp.y, sp.spec, sp.theta, st);
  const Vector any = (1.0 - out.label_counts.col(0).array() / double(out.kept)).matrix();
  EXPECT_LT(any.maxCoeff(), 0.05);
}

TEST(Chain, RecoversLevelBreak) {
  SmallProblem sp = small_problem(true, 5);
  McmcSettings st;
  st.iterations = 400;
  st.burn_in = 100;
  st.store_trend_draws = false;
  const ChainOutput out = run_chain(sp.y, sp.spec, sp.theta, st);
  double mass = 0.0;
  for (Index t = 28; t <= 32; ++t) {
    mass += out.label_counts(t, encode_label(0, 0, 0, 1)) +
            out.label_counts(t, encode_label(0, 0, 1, 1));
  }
  EXPECT_GT(mass / double(out.kept), 0.5);
  const Vector trend = out.trend_sum.row(0).transpose() / double(out.kept);
  EXPECT_NEAR(trend(50) - trend(10), 4.0, 0.6);
}

TEST(Chain, ParameterNamesMatchVector) {
  DfmSpec spec;
  spec.k = 2;
  spec.kr = 1;
  spec.regressors = Matrix::Ones(5, 1);
  Rng rng = make_rng(1);
  const DfmParams p = draw_from_prior(spec, 4, rng);
  EXPECT_EQ(static_cast<Index>(parameter_names(spec).size()),
            parameter_vector(p, spec).size());
  EXPECT_EQ(parameter_names(spec).front(), "rho_1");
  EXPECT_EQ(parameter_names(spec).back(), "kappa_2");
}

TEST(VarpiStep, SyntheticStatisticsMatchClosedForm) {
  DfmSpec spec;
  spec.k = 2;
  spec.kr = 2;
  spec.initial_level_var = 5.0;
  spec.regressors = Matrix::Ones(3, 2);
  Rng rng = make_rng(9);
  DfmParams params = draw_from_prior(spec, 3, rng);
  params.comp[0].varpi = {true, false};
  params.comp[1].varpi = {false, true};
  std::mt19937_64 g(10);
  const Matrix A = random_matrix(g, 6, 6);
  BetaStats stats;
  stats.loglik0 = -12.5;
  stats.Q = A * A.transpose() + Matrix::Identity(6, 6);
  stats.s = random_matrix(g, 6, 1) * 3.0;
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 0; j < 2; ++j) {
      auto integral = [&](bool with_j) {
        std::vector<Index> idx;
        for (Index c = 0; c < 2; ++c)
          for (Index jj = 0; jj < 2; ++jj) {
            const bool on = (c == i && jj == j)
                                ? with_j
                                : bool(params.comp[static_cast<std::size_t>(c)]
                                           .varpi[static_cast<std::size_t>(jj)]);
            if (on) idx.push_back(beta_slot(spec, c, jj));
          }
        idx.push_back(level_slot(spec, 0));
        idx.push_back(level_slot(spec, 1));
        const Index m = static_cast<Index>(idx.size());
        Vector ss(m), dd(m);
        Matrix QQ(m, m);
        for (Index u = 0; u < m; ++u) {
          ss(u) = stats.s(idx[u]);
          dd(u) = idx[u] % 3 == 2 ? 5.0 : 9.0;
          for (Index v = 0; v < m; ++v) QQ(u, v) = stats.Q(idx[u], idx[v]);
        }
        return gaussian_integral(stats.loglik0, ss, QQ, dd);
      };
      EXPECT_NEAR(varpi_log_odds(stats, spec, params, i, j),
                  integral(true) - integral(false), 1e-10);
    }
  }
}

DfmSpec two_component_spec() {
  DfmSpec spec = testing::geweke_spec();
  spec.k = 2;
  spec.priors.S_kappa = 10.0;  // loadings of order one
  return spec;
}

double loading_log_prior(const DfmParams& params) {
  double lp = 0.0;
  for (Index j = 0; j < params.Theta.cols(); ++j) {
    for (Index r = j + 1; r < params.Theta.rows(); ++r) {
      lp -= 0.5 * params.kappa(j) * params.Theta(r, j) * params.Theta(r, j);
    }
  }
  return lp;
}

double full_loglik(const DfmSpec& spec, const DfmParams& params,
                   const IndicatorSequence& K, const Matrix& y) {
  const CgssModel full = with_factor_observation(
      with_beta(state_regression_model(spec, params, y.rows()),
                pack_beta(spec, params), Vector()),
      params.Theta, selection_matrix(spec.k), params.noise_var);
  return filter_loglik(full, K, Vector(), y);
}

TEST(Shear, TargetTracksFullLikelihood) {
  Rng rng = make_rng(404);
  DfmSpec spec = two_component_spec();
  spec.k = 3;
  spec.kr = 1;
  const Index n = 14, p = 6;
  spec.regressors = random_matrix(rng, n, 1);
  for (int rep = 0; rep < 5; ++rep) {
    DfmParams params = draw_from_prior(spec, p, rng);
    params.noise_var = Vector::Constant(p, 0.3) + 0.2 * random_matrix(rng, p, 1).col(0).cwiseAbs();
    const IndicatorSequence K = draw_indicators(spec, n, rng);
    const Matrix y = random_matrix(rng, n, p);
    const auto reduced_part = [&](const DfmParams& q) {
      return shear_log_target(spec, q, reduce(q.Theta, q.noise_var, y), K) -
             loading_log_prior(q);
    };
    for (Index r = 1; r < spec.k; ++r) {
      for (Index c = 0; c < r; ++c) {
        DfmParams moved = params;
        moved.Theta.col(c) += 0.7 * params.Theta.col(r);
        EXPECT_NEAR(reduced_part(moved) - reduced_part(params),
                    full_loglik(spec, moved, K, y) - full_loglik(spec, params, K, y),
                    1e-8);
      }
    }
  }
}

TEST(Shear, StartHasPatternSpanAndIndependentIncrements) {
  Rng rng = make_rng(405);
  DfmSpec spec = two_component_spec();
  spec.kr = 1;
  const Index n = 40, p = 5;
  spec.regressors = random_matrix(rng, n, 1);
  const Matrix y = random_matrix(rng, n, p);
  const Matrix general = random_matrix(rng, p, 2);
  const Matrix start = initial_state(y, spec, general, rng).params.Theta;
  EXPECT_DOUBLE_EQ(start(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(start(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(start(1, 1), 1.0);
  // same column space: start = general * M for some 2 x 2 M
  const Matrix M = general.colPivHouseholderQr().solve(start);
  EXPECT_LT((general * M - start).norm(), 1e-10);
  // least-squares factor increments, net of [1, w_t, w_{t-1}], are uncorrelated
  const Matrix f = (y * start) * (start.transpose() * start).inverse();
  const Matrix df = f.bottomRows(n - 1) - f.topRows(n - 1);
  Matrix X(n - 1, 3);
  X.col(0).setOnes();
  X.col(1) = spec.regressors.bottomRows(n - 1).col(0);
  X.col(2) = spec.regressors.topRows(n - 1).col(0);
  const Matrix resid = df - X * X.colPivHouseholderQr().solve(df);
  const Matrix C = resid.transpose() * resid;
  EXPECT_LT(std::abs(C(0, 1)), 1e-10 * std::sqrt(C(0, 0) * C(1, 1)));
}

TEST(Shear, AcceptanceSlotsAreNamed) {
  DfmSpec spec = two_component_spec();
  spec.k = 3;
  const auto names = rwmh_names(spec);
  ASSERT_EQ(names.size(), 12u);
  EXPECT_EQ(names[3], "rho_2");
  EXPECT_EQ(names[9], "shear_2_1");
  EXPECT_EQ(names[11], "shear_3_2");
  spec.theta_mode = ThetaMode::Fixed;
  EXPECT_EQ(rwmh_names(spec).size(), 9u);
}

// Successive-conditional check restricted to the blocks that move the
// loadings. The other parameters stay at one prior draw, so forward draws
// condition on them too.
TEST(Geweke, ShearKeepsLoadingPrior) {
  Rng rng = make_rng(406);
  const DfmSpec spec = two_component_spec();
  const Index n = 30, p = 4, sweeps = 20000;
  DfmParams fixed = draw_from_prior(spec, p, rng);
  // with tiny noise the state and loading draws are nearly collinear and the
  // chain moves too slowly for batch-means errors to be trustworthy
  fixed.noise_var.setConstant(1.0);
  const IndicatorSequence K = draw_indicators(spec, n, rng);
  const auto draw = [&](DfmParams& q) {
    const DfmParams d = draw_from_prior(spec, p, rng);
    q = fixed;
    q.Theta = d.Theta;
    q.kappa = d.kappa;
    q.comp[0].level0 = d.comp[0].level0;
    q.comp[1].level0 = d.comp[1].level0;
  };
  const auto states = [&](const DfmParams& q) {
    const CgssModel full = with_factor_observation(
        with_beta(state_regression_model(spec, q, n), pack_beta(spec, q), Vector()),
        q.Theta, selection_matrix(spec.k), q.noise_var);
    return simulate(full, K, Vector(), rng);
  };
  std::vector<double> f1, f2, g1, g2;
  for (Index i = 0; i < sweeps; ++i) {
    DfmParams q;
    draw(q);
    f1.push_back(q.Theta(1, 0));
    f2.push_back(q.Theta(2, 0) * q.Theta(2, 0));
  }
  ChainState s;
  draw(s.params);
  s.K = K;
  Simulation sim = states(s.params);
  s.x = sim.states;
  Matrix y = sim.observations;
  const std::size_t slots = rwmh_names(spec).size();
  s.rwmh_scale = Vector::Constant(static_cast<Index>(slots), 0.5);
  s.accepted.assign(slots, 0);
  s.proposed.assign(slots, 0);
  for (Index i = 0; i < sweeps; ++i) {
    step_state_beta(s, reduce(s.params.Theta, s.params.noise_var, y), spec, rng);
    step_theta_kappa(s, y, spec, rng);
    step_shear(s, y, spec, rng);
    ++s.iteration;
    y = testing::resimulate_observations(s.x, s.params, spec, rng);
    g1.push_back(s.params.Theta(1, 0));
    g2.push_back(s.params.Theta(2, 0) * s.params.Theta(2, 0));
  }
  EXPECT_GT(s.accepted[6], 0);
  for (const auto& r : {testing::compare("E[theta_21]", f1, g1),
                        testing::compare("E[theta_31^2]", f2, g2)}) {
    EXPECT_LT(std::abs(r.z()), 3.0)
        << r.name << " forward " << r.forward_mean << " gibbs " << r.gibbs_mean;
  }
}

// Batch-means errors need batches much longer than the chain's
// autocorrelation time; short runs understate them.
TEST(Geweke, MomentsAgree) {
  const auto rows = testing::geweke_check(40000, 31);
  for (const auto& r : rows) {
    EXPECT_LT(std::abs(r.z()), 3.0)
        << r.name << " forward " << r.forward_mean << " gibbs " << r.gibbs_mean;
  }
}

}  // namespace
}  // namespace cgssm
