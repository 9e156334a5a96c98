#include "cgssm/mcmc.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "cgssm/linalg.hpp"

namespace cgssm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logit(double p) { return std::log(p) - std::log1p(-p); }
double inv_logit(double u) {
  return u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

Vector gaussian_from_precision(Rng& rng, const GaussianPosterior& post) {
  if (post.mean.size() == 0) return post.mean;
  const SpdFactor chol(post.precision);
  if (!chol.ok()) throw NumericalError("posterior precision is singular");
  const Vector z = standard_normal_vector(rng, post.mean.size());
  const Matrix L = chol.lower();
  return post.mean + L.transpose().triangularView<Eigen::Upper>().solve(z);
}

template <typename Fn>
void tagged(int step, const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const SingularInnovationError&) {
    throw;
  } catch (const NumericalError& e) {
    throw NumericalError("step " + std::to_string(step) + " (" + name +
                         "): " + e.what());
  }
}

// Seasonal term psi_t + w_t' beta_i recovered from the cycle state s_t.
double seasonal_value(const Matrix& x, const DfmSpec& spec,
                      const DfmParams& params, Index i, Index t) {
  const double s = x(t, 4 * i);
  if (t > 0 || spec.kr == 0) return s;
  const double wb =
      spec.regressors.row(0).dot(params.comp[static_cast<std::size_t>(i)].beta);
  return s + (1.0 - spec.omega0) * wb;
}

// Components are independent a priori, so start from the rotation whose
// factor increments, net of the regressors, are uncorrelated. Right
// multiplication by a unit lower triangular matrix keeps the pattern.
Matrix decorrelate_start(const Matrix& y, const DfmSpec& spec,
                         const Matrix& Theta) {
  const Index n = y.rows();
  const Index k = spec.k;
  const Index cols = 1 + 2 * spec.kr;
  if (k < 2 || n - 1 <= cols + k) return Theta;
  const Matrix f = (y * Theta) * (Theta.transpose() * Theta).inverse();
  const Matrix df = f.bottomRows(n - 1) - f.topRows(n - 1);
  Matrix X(n - 1, cols);
  X.col(0).setOnes();
  if (spec.kr > 0) {
    X.middleCols(1, spec.kr) = spec.regressors.bottomRows(n - 1);
    X.rightCols(spec.kr) = spec.regressors.topRows(n - 1);
  }
  const Matrix resid = df - X * X.colPivHouseholderQr().solve(df);
  Matrix C = resid.transpose() * resid;
  symmetrize(C);
  const SpdFactor chol(C);
  if (!chol.ok()) return Theta;
  const Matrix R = chol.lower();
  return Theta * (R * R.diagonal().cwiseInverse().asDiagonal());
}

}  // namespace

double adapt_rwmh(double scale, bool accepted, Index iteration) {
  const double j = double(std::max<Index>(iteration, 1));
  return scale * std::exp(kRwmhGain * ((accepted ? 1.0 : 0.0) - kRwmhTarget) / j);
}

double inefficiency_factor(std::span<const double> chain) {
  const Index n = static_cast<Index>(chain.size());
  if (n < 100) {
    throw NumericalError("inefficiency factor needs at least 100 draws");
  }
  double mean = 0.0;
  for (double v : chain) mean += v;
  mean /= double(n);
  double c0 = 0.0;
  for (double v : chain) c0 += (v - mean) * (v - mean);
  c0 /= double(n);
  if (!(c0 > 0.0)) {
    throw NumericalError("inefficiency factor undefined for a constant chain");
  }
  const Index L = static_cast<Index>(std::floor(2.0 * std::cbrt(double(n))));
  double sum = 0.0;
  for (Index l = 1; l <= L; ++l) {
    const double z = double(l) / double(L);
    const double w = z <= 0.5 ? 1.0 - 6.0 * z * z + 6.0 * z * z * z
                              : 2.0 * std::pow(1.0 - z, 3);
    double cl = 0.0;
    for (Index t = l; t < n; ++t) {
      cl += (chain[static_cast<std::size_t>(t)] - mean) *
            (chain[static_cast<std::size_t>(t - l)] - mean);
    }
    sum += w * (cl / double(n)) / c0;
  }
  return 1.0 + 2.0 * sum;
}

Matrix factor_paths(const Matrix& x, Index k) {
  return x * selection_matrix(k).transpose();
}

std::vector<std::array<InvGammaPosterior, 4>> eta_posterior(
    const Matrix& x, const IndicatorSequence& K, const DfmParams& params,
    const DfmSpec& spec) {
  std::vector<std::array<InvGammaPosterior, 4>> out(
      static_cast<std::size_t>(spec.k));
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      out[i][j] = {spec.priors.nu_eta[j] / 2, spec.priors.s_eta[j] / 2};
    }
  }
  for (Index t = 1; t < K.size(); ++t) {
    const BreakLabel b = decode_label(K[t], spec.k);
    if (b.null) continue;
    const Index o = 4 * b.component;
    const double sf = params.comp[static_cast<std::size_t>(b.component)].sigma_f;
    const double e = b.kind == 0
                         ? (x(t, o + 2) - x(t - 1, o + 2) - x(t - 1, o + 3)) / sf
                         : (x(t, o + 3) - x(t - 1, o + 3)) / sf;
    auto& post = out[static_cast<std::size_t>(b.component)]
                    [static_cast<std::size_t>(b.eta_index())];
    post.shape += 0.5;
    post.scale += 0.5 * e * e;
  }
  return out;
}

GaussianPosterior theta_row_posterior(const Vector& series,
                                      const Matrix& factors, Index row,
                                      double noise_var, const Vector& kappa) {
  const Index k = factors.cols();
  const Index nf = free_columns(row, k);
  GaussianPosterior post;
  Vector z = series;
  if (row < k) z -= factors.col(row);
  const auto X = factors.leftCols(nf);
  post.precision = X.transpose() * X / noise_var;
  post.precision.diagonal() += kappa.head(nf);
  const SpdFactor chol(post.precision);
  if (nf > 0 && !chol.ok()) throw RankError("Theta row precision singular");
  post.mean = nf > 0 ? Vector(chol.solve(X.transpose() * z / noise_var)) : Vector();
  return post;
}

std::vector<GammaPosterior> kappa_posterior(const Matrix& Theta,
                                            const DfmSpec& spec) {
  std::vector<GammaPosterior> out;
  for (Index j = 0; j < spec.k; ++j) {
    GammaPosterior g{spec.priors.nu_kappa / 2, spec.priors.S_kappa / 2};
    for (Index r = j + 1; r < Theta.rows(); ++r) {
      g.shape += 0.5;
      g.rate += 0.5 * Theta(r, j) * Theta(r, j);
    }
    out.push_back(g);
  }
  return out;
}

std::vector<InvGammaPosterior> noise_posterior(const Matrix& y,
                                               const Matrix& factors,
                                               const Matrix& Theta,
                                               const DfmSpec& spec) {
  const Matrix resid = y - factors * Theta.transpose();
  std::vector<InvGammaPosterior> out(static_cast<std::size_t>(y.cols()));
  for (Index r = 0; r < y.cols(); ++r) {
    out[static_cast<std::size_t>(r)] = {
        (spec.priors.nu_m + double(y.rows())) / 2,
        (spec.priors.s_m + resid.col(r).squaredNorm()) / 2};
  }
  return out;
}

double varpi_log_odds(const BetaStats& stats, const DfmSpec& spec,
                      const DfmParams& params, Index component, Index j) {
  BetaPrior prior = beta_prior(spec, params);
  const std::size_t slot = static_cast<std::size_t>(beta_slot(spec, component, j));
  prior.included[slot] = true;
  const double with = beta_posterior(stats, prior).log_marginal;
  prior.included[slot] = false;
  const double without = beta_posterior(stats, prior).log_marginal;
  return with - without + logit(spec.priors.p_varpi);
}

RegressionModel reduced_regression(const DfmSpec& spec, const DfmParams& params,
                                   const ReducedObservations& reduced) {
  return with_reduced_observation(
      state_regression_model(spec, params, reduced.yL.rows()),
      selection_matrix(spec.k), reduced);
}

void step_indicators(ChainState& s, const ReducedObservations& red,
                     const DfmSpec& spec, Rng& rng) {
  const RegressionModel model = reduced_regression(spec, s.params, red);
  const CgssModel fixed = with_beta(model, pack_beta(spec, s.params), Vector());
  s.K = sample_indicators(fixed, indicator_prior(spec), Vector(), red.yL, s.K,
                          rng);
}

void step_state_beta(ChainState& s, const ReducedObservations& red,
                     const DfmSpec& spec, Rng& rng) {
  const RegressionModel model = reduced_regression(spec, s.params, red);
  StateBetaDraw d = joint_state_beta_draw(model, s.K, Vector(), red.yL,
                                          beta_prior(spec, s.params), rng);
  s.x = std::move(d.x);
  unpack_beta(spec, d.beta, s.params);
}

void step_eta(ChainState& s, const DfmSpec& spec, Rng& rng) {
  const auto post = eta_posterior(s.x, s.K, s.params, spec);
  for (std::size_t i = 0; i < post.size(); ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      s.params.comp[i].eta[j] =
          std::sqrt(inv_gamma(rng, post[i][j].shape, post[i][j].scale));
    }
  }
}

namespace {

// Log target of one transformed coordinate: marginal likelihood of the
// reduced data given beta plus the log prior on the transformed scale.
double rwmh_target(const DfmSpec& spec, const DfmParams& params,
                   const ReducedObservations& red, const IndicatorSequence& K,
                   Index i, int which) {
  const auto& c = params.comp[static_cast<std::size_t>(i)];
  const DfmPriors& q = spec.priors;
  double lp = 0.0;
  if (which == 0) {
    lp = log_beta_density(c.rho, q.alpha_rho, q.beta_rho) + std::log(c.rho) +
         std::log1p(-c.rho);
  } else if (which == 1) {
    const double v = c.sigma_f * c.sigma_f;
    lp = log_inv_gamma_density(v, q.nu_f / 2, q.s_f / 2) + std::log(2.0 * v);
  } else {
    const double z = (c.lambda - q.lambda_a) / (q.lambda_b - q.lambda_a);
    lp = log_stretched_beta_density(c.lambda, q.alpha_lambda, q.beta_lambda,
                                    q.lambda_a, q.lambda_b) +
         std::log(z) + std::log1p(-z) + std::log(q.lambda_b - q.lambda_a);
  }
  if (!std::isfinite(lp)) return kNegInf;
  const RegressionModel model = reduced_regression(spec, params, red);
  const CgssModel fixed = with_beta(model, pack_beta(spec, params), Vector());
  try {
    return lp + filter_loglik(fixed, K, Vector(), red.yL);
  } catch (const SingularInnovationError&) {
    return kNegInf;
  }
}

double& coordinate(ComponentParams& c, int which) {
  return which == 0 ? c.rho : which == 1 ? c.sigma_f : c.lambda;
}

double to_free(const DfmSpec& spec, double v, int which) {
  if (which == 0) return logit(v);
  if (which == 1) return std::log(v);
  const auto& q = spec.priors;
  return logit((v - q.lambda_a) / (q.lambda_b - q.lambda_a));
}

double from_free(const DfmSpec& spec, double u, int which) {
  if (which == 0) return inv_logit(u);
  if (which == 1) return std::exp(u);
  const auto& q = spec.priors;
  return q.lambda_a + (q.lambda_b - q.lambda_a) * inv_logit(u);
}

}  // namespace

void step_rwmh(ChainState& s, const ReducedObservations& red,
               const DfmSpec& spec, int which, Rng& rng) {
  for (Index i = 0; i < spec.k; ++i) {
    const std::size_t slot = static_cast<std::size_t>(3 * i + which);
    auto& c = s.params.comp[static_cast<std::size_t>(i)];
    const double current = coordinate(c, which);
    const double here = rwmh_target(spec, s.params, red, s.K, i, which);
    const double u = to_free(spec, current, which) +
                     s.rwmh_scale(3 * i + which) * standard_normal(rng);
    const double proposal = from_free(spec, u, which);
    bool accept = false;
    // the inverse transforms saturate far in the tails
    if (std::isfinite(to_free(spec, proposal, which))) {
      coordinate(c, which) = proposal;
      const double there = rwmh_target(spec, s.params, red, s.K, i, which);
      accept = std::log(uniform01(rng)) < there - here;
      if (!accept) coordinate(c, which) = current;
    }
    ++s.proposed[slot];
    if (accept) ++s.accepted[slot];
    s.rwmh_scale(3 * i + which) =
        adapt_rwmh(s.rwmh_scale(3 * i + which), accept, s.iteration + 1);
  }
}

void step_varpi(ChainState& s, const ReducedObservations& red,
                const DfmSpec& spec, Rng& rng) {
  if (spec.kr > 0) {
    const RegressionModel model = reduced_regression(spec, s.params, red);
    const BetaStats stats = beta_stats(model, s.K, Vector(), red.yL);
    for (Index i = 0; i < spec.k; ++i) {
      for (Index j = 0; j < spec.kr; ++j) {
        const double lo = varpi_log_odds(stats, spec, s.params, i, j);
        s.params.comp[static_cast<std::size_t>(i)]
            .varpi[static_cast<std::size_t>(j)] =
            std::log(uniform01(rng)) < -std::log1p(std::exp(-lo));
      }
    }
  }
  // (x, beta) were integrated out above; refresh them under the new flags
  step_state_beta(s, red, spec, rng);
}

void step_theta_kappa(ChainState& s, const Matrix& y, const DfmSpec& spec,
                      Rng& rng) {
  if (spec.theta_mode != ThetaMode::Unknown) return;
  const Matrix f = factor_paths(s.x, spec.k);
  Matrix& Theta = s.params.Theta;
  for (Index r = 0; r < y.cols(); ++r) {
    const GaussianPosterior post = theta_row_posterior(
        y.col(r), f, r, s.params.noise_var(r), s.params.kappa);
    const Vector draw = gaussian_from_precision(rng, post);
    for (Index j = 0; j < draw.size(); ++j) Theta(r, j) = draw(j);
  }
  const auto kp = kappa_posterior(Theta, spec);
  for (Index j = 0; j < spec.k; ++j) {
    s.params.kappa(j) = gamma_rate(rng, kp[static_cast<std::size_t>(j)].shape,
                                   kp[static_cast<std::size_t>(j)].rate);
  }
}

void step_noise(ChainState& s, const Matrix& y, const DfmSpec& spec, Rng& rng) {
  const auto post =
      noise_posterior(y, factor_paths(s.x, spec.k), s.params.Theta, spec);
  for (Index r = 0; r < y.cols(); ++r) {
    const auto& g = post[static_cast<std::size_t>(r)];
    s.params.noise_var(r) = inv_gamma(rng, g.shape, g.scale);
  }
}

std::vector<std::string> rwmh_names(const DfmSpec& spec) {
  std::vector<std::string> names;
  for (Index i = 1; i <= spec.k; ++i) {
    for (const char* base : {"rho_", "sigma_f_", "lambda_"}) {
      names.push_back(base + std::to_string(i));
    }
  }
  if (spec.theta_mode == ThetaMode::Unknown) {
    for (Index r = 1; r < spec.k; ++r) {
      for (Index c = 0; c < r; ++c) {
        names.push_back("shear_" + std::to_string(r + 1) + "_" +
                        std::to_string(c + 1));
      }
    }
  }
  return names;
}

double shear_log_target(const DfmSpec& spec, const DfmParams& params,
                        const ReducedObservations& red,
                        const IndicatorSequence& K) {
  const Matrix& Theta = params.Theta;
  double lp = 0.0;
  for (Index j = 0; j < spec.k; ++j) {
    lp -= 0.5 * params.kappa(j) * Theta.col(j).tail(Theta.rows() - j - 1).squaredNorm();
  }
  const RegressionModel model = reduced_regression(spec, params, red);
  const CgssModel fixed = with_beta(model, pack_beta(spec, params), Vector());
  try {
    return lp + filter_loglik(fixed, K, Vector(), red.yL);
  } catch (const SingularInnovationError&) {
    return kNegInf;
  }
}

void step_shear(ChainState& s, const Matrix& y, const DfmSpec& spec, Rng& rng) {
  if (spec.theta_mode != ThetaMode::Unknown || spec.k < 2) return;
  ReducedObservations red = reduce(s.params.Theta, s.params.noise_var, y);
  double here = shear_log_target(spec, s.params, red, s.K);
  bool moved = false;
  Index slot = 3 * spec.k;
  for (Index r = 1; r < spec.k; ++r) {
    for (Index c = 0; c < r; ++c, ++slot) {
      const std::size_t u = static_cast<std::size_t>(slot);
      const double a = s.rwmh_scale(slot) * standard_normal(rng);
      const Matrix current = s.params.Theta;
      s.params.Theta.col(c) += a * current.col(r);
      ReducedObservations proposal =
          reduce(s.params.Theta, s.params.noise_var, y);
      const double there = shear_log_target(spec, s.params, proposal, s.K);
      const bool accept = std::log(uniform01(rng)) < there - here;
      if (accept) {
        red = std::move(proposal);
        here = there;
        moved = true;
        ++s.accepted[u];
      } else {
        s.params.Theta = current;
      }
      ++s.proposed[u];
      s.rwmh_scale(slot) = adapt_rwmh(s.rwmh_scale(slot), accept, s.iteration + 1);
    }
  }
  // the states were integrated out; refresh them if Theta changed
  if (moved) step_state_beta(s, red, spec, rng);
}

void gibbs_sweep(ChainState& s, const Matrix& y, const DfmSpec& spec,
                 Rng& rng) {
  ReducedObservations red;
  tagged(1, "reduce", [&] { red = reduce(s.params.Theta, s.params.noise_var, y); });
  tagged(1, "indicators", [&] { step_indicators(s, red, spec, rng); });
  tagged(2, "state and beta", [&] { step_state_beta(s, red, spec, rng); });
  tagged(3, "break sizes", [&] { step_eta(s, spec, rng); });
  tagged(4, "rho", [&] { step_rwmh(s, red, spec, 0, rng); });
  tagged(5, "sigma_f", [&] { step_rwmh(s, red, spec, 1, rng); });
  tagged(6, "lambda", [&] { step_rwmh(s, red, spec, 2, rng); });
  tagged(7, "inclusion flags", [&] { step_varpi(s, red, spec, rng); });
  tagged(8, "loadings", [&] { step_theta_kappa(s, y, spec, rng); });
  tagged(8, "loading shears", [&] { step_shear(s, y, spec, rng); });
  tagged(9, "noise variances", [&] { step_noise(s, y, spec, rng); });
  ++s.iteration;
}

ChainState initial_state(const Matrix& y, const DfmSpec& spec,
                         const Matrix& theta_init, Rng& rng) {
  const DfmPriors& q = spec.priors;
  const Index n = y.rows();
  const Index p = y.cols();
  if (theta_init.rows() != p || theta_init.cols() != spec.k) {
    throw DimensionError("initial Theta must be p x k");
  }
  ChainState s;
  s.K = IndicatorSequence(n, spec.support_size());
  s.params.comp.resize(static_cast<std::size_t>(spec.k));
  for (auto& c : s.params.comp) {
    c.rho = q.alpha_rho / (q.alpha_rho + q.beta_rho);
    c.lambda = 0.5 * (q.lambda_a + q.lambda_b);
    c.sigma_f = std::sqrt(q.s_f / std::max(q.nu_f - 2.0, 1.0));
    for (std::size_t j = 0; j < 4; ++j) {
      c.eta[j] = std::sqrt(q.s_eta[j] / std::max(q.nu_eta[j] - 2.0, 1.0));
    }
    c.beta = Vector::Zero(spec.kr);
    c.varpi.assign(static_cast<std::size_t>(spec.kr), true);
    c.level0 = 0.0;
  }
  s.params.kappa = Vector::Constant(spec.k, q.nu_kappa / q.S_kappa);

  Matrix Theta = theta_init;
  if (spec.theta_mode == ThetaMode::Unknown) {
    // top = L U with L unit lower triangular; Theta U^-1 then has the
    // identification pattern and equals Theta when it already had it
    Matrix U = Theta.topRows(spec.k);
    bool ok = true;
    for (Index j = 0; j < spec.k && ok; ++j) {
      ok = std::abs(U(j, j)) > 1e-12 * std::max(1.0, U.norm());
      for (Index i = j + 1; ok && i < spec.k; ++i) {
        U.row(i) -= (U(i, j) / U(j, j)) * U.row(j);
      }
    }
    if (ok) {
      Theta = U.transpose()
                  .triangularView<Eigen::Lower>()
                  .solve(Theta.transpose())
                  .transpose();
    } else {
      Theta.topRows(spec.k).setIdentity();
    }
    Theta = decorrelate_start(y, spec, Theta);
    for (Index r = 0; r < std::min(spec.k, p); ++r) {
      for (Index j = r; j < spec.k; ++j) Theta(r, j) = r == j ? 1.0 : 0.0;
    }
  }
  s.params.Theta = Theta;

  const Matrix gram = Theta.transpose() * Theta;
  const Matrix fhat = y * Theta * gram.inverse();
  const Matrix resid = y - fhat * Theta.transpose();
  s.params.noise_var.resize(p);
  for (Index r = 0; r < p; ++r) {
    const double v = resid.col(r).squaredNorm() / double(std::max<Index>(n, 1));
    const double total = (y.col(r).array() - y.col(r).mean()).square().mean();
    s.params.noise_var(r) = std::max(v, std::max(1e-6 * total, 1e-10));
  }
  const std::size_t slots = rwmh_names(spec).size();
  s.rwmh_scale = Vector::Constant(static_cast<Index>(slots), 0.5);
  s.accepted.assign(slots, 0);
  s.proposed.assign(slots, 0);
  const ReducedObservations red = reduce(s.params.Theta, s.params.noise_var, y);
  step_state_beta(s, red, spec, rng);
  return s;
}

std::vector<std::string> parameter_names(const DfmSpec& spec) {
  std::vector<std::string> names;
  static const char* kEta[4] = {"eta_mu1", "eta_mu2", "eta_delta1",
                                "eta_delta2"};
  for (Index i = 1; i <= spec.k; ++i) {
    const std::string s = "_" + std::to_string(i);
    names.push_back("rho" + s);
    names.push_back("lambda" + s);
    names.push_back("sigma_f" + s);
    for (const char* e : kEta) names.push_back(e + s);
    names.push_back("level0" + s);
    for (Index j = 1; j <= spec.kr; ++j) {
      names.push_back("beta" + s + "_" + std::to_string(j));
    }
    for (Index j = 1; j <= spec.kr; ++j) {
      names.push_back("varpi" + s + "_" + std::to_string(j));
    }
  }
  if (spec.theta_mode == ThetaMode::Unknown) {
    for (Index i = 1; i <= spec.k; ++i) {
      names.push_back("kappa_" + std::to_string(i));
    }
  }
  return names;
}

Vector parameter_vector(const DfmParams& params, const DfmSpec& spec) {
  std::vector<double> v;
  for (const auto& c : params.comp) {
    v.push_back(c.rho);
    v.push_back(c.lambda);
    v.push_back(c.sigma_f);
    for (double e : c.eta) v.push_back(e);
    v.push_back(c.level0);
    for (Index j = 0; j < spec.kr; ++j) v.push_back(c.beta(j));
    for (Index j = 0; j < spec.kr; ++j) {
      v.push_back(c.varpi[static_cast<std::size_t>(j)] ? 1.0 : 0.0);
    }
  }
  if (spec.theta_mode == ThetaMode::Unknown) {
    for (Index i = 0; i < spec.k; ++i) v.push_back(params.kappa(i));
  }
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

ChainOutput run_chain(const Matrix& y, const DfmSpec& spec,
                      const Matrix& theta_init, const McmcSettings& settings) {
  if (settings.thin < 1 || settings.burn_in < 0 || settings.iterations < 0) {
    throw ConfigError("mcmc: need iterations >= 0, burn_in >= 0, thin >= 1");
  }
  const Index n = y.rows();
  const Index p = y.cols();
  const Index k = spec.k;
  ChainOutput out;
  out.names = parameter_names(spec);
  const Index kept_max =
      settings.iterations > settings.burn_in
          ? (settings.iterations - settings.burn_in + settings.thin - 1) /
                settings.thin
          : 0;
  out.draws.resize(kept_max, static_cast<Index>(out.names.size()));
  out.label_counts = Matrix::Zero(n, spec.support_size());
  out.trend_sum = Matrix::Zero(k, n);
  out.seasonal_sum = Matrix::Zero(k, n);
  out.theta_sum = Matrix::Zero(p, k);
  out.noise_sum = Vector::Zero(p);
  out.noise_sq_sum = Vector::Zero(p);
  if (settings.iterations == 0) return out;

  Rng rng = make_rng(settings.seed);
  ChainState s = initial_state(y, spec, theta_init, rng);
  if (settings.store_trend_draws) {
    out.trend_draws.reserve(static_cast<std::size_t>(kept_max * k * n));
  }
  for (Index it = 0; it < settings.iterations; ++it) {
    try {
      gibbs_sweep(s, y, spec, rng);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(it) + ": " + e.what());
    }
    if (it < settings.burn_in || (it - settings.burn_in) % settings.thin != 0) {
      continue;
    }
    out.draws.row(out.kept) = parameter_vector(s.params, spec).transpose();
    for (Index t = 0; t < n; ++t) out.label_counts(t, s.K[t]) += 1.0;
    for (Index i = 0; i < k; ++i) {
      for (Index t = 0; t < n; ++t) {
        const double trend = s.x(t, 4 * i + 2);
        out.trend_sum(i, t) += trend;
        out.seasonal_sum(i, t) += seasonal_value(s.x, spec, s.params, i, t);
        if (settings.store_trend_draws) out.trend_draws.push_back(trend);
      }
    }
    out.theta_sum += s.params.Theta;
    const Vector sd = s.params.noise_var.cwiseSqrt();
    out.noise_sum += sd;
    out.noise_sq_sum += s.params.noise_var;
    ++out.kept;
  }
  out.rwmh_scale = s.rwmh_scale;
  out.accepted = s.accepted;
  out.proposed = s.proposed;
  return out;
}

std::vector<ChainOutput> run_chains(const Matrix& y, const DfmSpec& spec,
                                    const Matrix& theta_init,
                                    const McmcSettings& settings, int chains,
                                    int threads) {
  if (chains < 1) throw ConfigError("mcmc.chains must be >= 1");
  std::vector<ChainOutput> outs(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
  std::vector<McmcSettings> per(static_cast<std::size_t>(chains), settings);
  Rng seeder = make_rng(settings.seed);
  for (int c = 0; c < chains; ++c) {
    per[static_cast<std::size_t>(c)].seed = c == 0 ? settings.seed : split_seed(seeder);
  }
  auto work = [&](int c) {
    try {
      outs[static_cast<std::size_t>(c)] =
          run_chain(y, spec, theta_init, per[static_cast<std::size_t>(c)]);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };
  const int pool = std::max(1, std::min(threads, chains));
  if (pool == 1) {
    for (int c = 0; c < chains; ++c) work(c);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < pool; ++w) {
      workers.emplace_back([&] {
        for (int c = next++; c < chains; c = next++) work(c);
      });
    }
    for (auto& t : workers) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outs;
}

}  // namespace cgssm
