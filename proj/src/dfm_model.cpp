#include "cgssm/dfm_model.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

namespace cgssm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double beta_draw(Rng& rng, double a, double b) {
  const double x = gamma_rate(rng, a, 1.0);
  const double y = gamma_rate(rng, b, 1.0);
  return x / (x + y);
}

}  // namespace

void DfmSpec::validate(Index n) const {
  std::ostringstream bad;
  auto check = [&bad](bool ok, const char* what) {
    if (!ok) bad << "\n  " << what;
  };
  const DfmPriors& q = priors;
  check(k >= 1, "model.k must be >= 1");
  check(kr >= 0, "model regressor count must be >= 0");
  check(kr == 0 || (regressors.rows() == n && regressors.cols() == kr),
        "regressors must be n x kr");
  check(pi > 0.0 && pi < 1.0, "model.pi must lie in (0, 1)");
  check(omega0 == omega0, "model.omega0 must be a number");
  check(initial_level_var > 0.0, "model.initial_level_var must be > 0");
  check(initial_slope_var >= 0.0, "model.initial_slope_var must be >= 0");
  check(q.alpha_rho > 0 && q.beta_rho > 0, "priors.alpha_rho/beta_rho must be > 0");
  check(q.nu_f > 0 && q.s_f > 0, "priors.nu_f/s_f must be > 0");
  for (int j = 0; j < 4; ++j) {
    check(q.nu_eta[static_cast<std::size_t>(j)] > 0 &&
              q.s_eta[static_cast<std::size_t>(j)] > 0,
          "priors break-size nu/s must be > 0");
  }
  check(q.alpha_lambda > 0 && q.beta_lambda > 0,
        "priors.alpha_lambda/beta_lambda must be > 0");
  check(q.lambda_a < q.lambda_b, "priors.lambda_a must be < priors.lambda_b");
  check(q.nu_m > 0 && q.s_m > 0, "priors.nu_m/s_m must be > 0");
  check(q.sigma_beta > 0, "priors.sigma_beta must be > 0");
  check(q.p_varpi > 0 && q.p_varpi < 1, "priors.p_varpi must lie in (0, 1)");
  check(q.nu_kappa > 0 && q.S_kappa > 0, "priors.nu_kappa/S_kappa must be > 0");
  const std::string msg = bad.str();
  if (!msg.empty()) throw ConfigError("invalid model specification:" + msg);
}

BreakLabel decode_label(int label, Index k) {
  BreakLabel b;
  if (label <= 0) return b;
  const Index idx = label - 1;
  b.null = false;
  b.kind = idx < 2 * k ? 0 : 1;
  const Index within = idx - b.kind * 2 * k;
  b.component = within / 2;
  b.size = static_cast<int>(within % 2);
  return b;
}

int encode_label(Index component, int kind, int size, Index k) {
  return static_cast<int>(1 + kind * 2 * k + 2 * component + size);
}

Matrix selection_matrix(Index k) {
  Matrix Phi = Matrix::Zero(k, 4 * k);
  for (Index i = 0; i < k; ++i) {
    Phi(i, 4 * i) = 1.0;
    Phi(i, 4 * i + 2) = 1.0;
  }
  return Phi;
}

Matrix transition_matrix(const DfmSpec& spec, const DfmParams& params) {
  Matrix F = Matrix::Zero(spec.state_dim(), spec.state_dim());
  for (Index i = 0; i < spec.k; ++i) {
    const auto& c = params.comp[static_cast<std::size_t>(i)];
    const double rc = c.rho * std::cos(c.lambda);
    const double rs = c.rho * std::sin(c.lambda);
    const Index o = 4 * i;
    F(o, o) = rc;
    F(o, o + 1) = rs;
    F(o + 1, o) = -rs;
    F(o + 1, o + 1) = rc;
    F(o + 2, o + 2) = 1.0;
    F(o + 2, o + 3) = 1.0;
    F(o + 3, o + 3) = 1.0;
  }
  return F;
}

Matrix innovation_loading(const DfmSpec& spec, const DfmParams& params,
                          int label) {
  Matrix G = Matrix::Zero(spec.state_dim(), spec.state_dim());
  const BreakLabel b = decode_label(label, spec.k);
  for (Index i = 0; i < spec.k; ++i) {
    const auto& c = params.comp[static_cast<std::size_t>(i)];
    G(4 * i, 4 * i) = c.sigma_f;
    G(4 * i + 1, 4 * i + 1) = c.sigma_f;
    if (!b.null && b.component == i) {
      const Index d = 4 * i + 2 + b.kind;
      G(d, d) = c.sigma_f * c.eta[static_cast<std::size_t>(b.eta_index())];
    }
  }
  return G;
}

Index beta_slot(const DfmSpec& spec, Index component, Index j) {
  return component * (spec.kr + 1) + j;
}

Index level_slot(const DfmSpec& spec, Index component) {
  return component * (spec.kr + 1) + spec.kr;
}

Matrix design_matrix(const DfmSpec& spec, const DfmParams& params, Index t) {
  Matrix W = Matrix::Zero(spec.state_dim(), spec.beta_dim());
  for (Index i = 0; i < spec.k; ++i) {
    const auto& c = params.comp[static_cast<std::size_t>(i)];
    if (t == 0) {
      for (Index j = 0; j < spec.kr; ++j) {
        W(4 * i, beta_slot(spec, i, j)) = spec.omega0 * spec.regressors(0, j);
      }
      W(4 * i + 2, level_slot(spec, i)) = 1.0;
      continue;
    }
    const double rc = c.rho * std::cos(c.lambda);
    const double rs = c.rho * std::sin(c.lambda);
    for (Index j = 0; j < spec.kr; ++j) {
      const double now = spec.regressors(t, j);
      const double before = spec.regressors(t - 1, j);
      W(4 * i, beta_slot(spec, i, j)) = now - rc * before;
      W(4 * i + 1, beta_slot(spec, i, j)) = rs * before;
    }
  }
  return W;
}

Matrix initial_state_cov(const DfmSpec& spec, const DfmParams& params) {
  Matrix V = Matrix::Zero(spec.state_dim(), spec.state_dim());
  for (Index i = 0; i < spec.k; ++i) {
    const auto& c = params.comp[static_cast<std::size_t>(i)];
    const double v = c.sigma_f * c.sigma_f / (1.0 - c.rho * c.rho);
    V(4 * i, 4 * i) = v;
    V(4 * i + 1, 4 * i + 1) = v;
    V(4 * i + 3, 4 * i + 3) = spec.initial_slope_var;
  }
  return V;
}

Vector pack_beta(const DfmSpec& spec, const DfmParams& params) {
  Vector beta(spec.beta_dim());
  for (Index i = 0; i < spec.k; ++i) {
    const auto& c = params.comp[static_cast<std::size_t>(i)];
    for (Index j = 0; j < spec.kr; ++j) beta(beta_slot(spec, i, j)) = c.beta(j);
    beta(level_slot(spec, i)) = c.level0;
  }
  return beta;
}

void unpack_beta(const DfmSpec& spec, const Vector& beta, DfmParams& params) {
  for (Index i = 0; i < spec.k; ++i) {
    auto& c = params.comp[static_cast<std::size_t>(i)];
    c.beta.resize(spec.kr);
    for (Index j = 0; j < spec.kr; ++j) c.beta(j) = beta(beta_slot(spec, i, j));
    c.level0 = beta(level_slot(spec, i));
  }
}

BetaPrior beta_prior(const DfmSpec& spec, const DfmParams& params) {
  BetaPrior prior;
  prior.mean = Vector::Zero(spec.beta_dim());
  prior.variance.resize(spec.beta_dim());
  prior.included.assign(static_cast<std::size_t>(spec.beta_dim()), true);
  const double vb = spec.priors.sigma_beta * spec.priors.sigma_beta;
  for (Index i = 0; i < spec.k; ++i) {
    const auto& c = params.comp[static_cast<std::size_t>(i)];
    for (Index j = 0; j < spec.kr; ++j) {
      const Index s = beta_slot(spec, i, j);
      prior.variance(s) = vb;
      prior.included[static_cast<std::size_t>(s)] =
          c.varpi[static_cast<std::size_t>(j)];
    }
    prior.variance(level_slot(spec, i)) = spec.initial_level_var;
  }
  return prior;
}

SystemMatrices assemble(const DfmSpec& spec, const DfmParams& params, Index t,
                        int label) {
  SystemMatrices s;
  const Index p = params.Theta.rows();
  s.g = Vector::Zero(p);
  s.H = params.Theta * selection_matrix(spec.k);
  s.G = params.noise_var.cwiseSqrt().asDiagonal();
  s.F = transition_matrix(spec, params);
  s.Gamma = innovation_loading(spec, params, label);
  s.h = t == 0 ? Vector::Zero(spec.state_dim()).eval()
               : (design_matrix(spec, params, t) * pack_beta(spec, params)).eval();
  return s;
}

RegressionModel state_regression_model(const DfmSpec& spec,
                                       const DfmParams& params, Index n) {
  const Index k = spec.k;
  const Index m = spec.state_dim();
  auto designs = std::make_shared<std::vector<Matrix>>();
  designs->reserve(static_cast<std::size_t>(n));
  for (Index t = 0; t < n; ++t) designs->push_back(design_matrix(spec, params, t));
  auto loadings = std::make_shared<std::vector<Matrix>>();
  for (int s = 0; s < spec.support_size(); ++s) {
    loadings->push_back(innovation_loading(spec, params, s));
  }
  const Matrix F = transition_matrix(spec, params);
  const Matrix Phi = selection_matrix(k);
  auto provider = [F, Phi, loadings, k, m](Index, int label, const Vector&) {
    SystemMatrices s;
    s.g = Vector::Zero(k);
    s.H = Phi;
    s.G = Matrix::Identity(k, k);
    s.h = Vector::Zero(m);
    s.F = F;
    s.Gamma = (*loadings)[static_cast<std::size_t>(label)];
    return s;
  };
  auto design = [designs](Index t, int, const Vector&) {
    return (*designs)[static_cast<std::size_t>(t)];
  };
  CgssModel base(n, k, m, m, provider, Vector::Zero(m),
                 initial_state_cov(spec, params));
  return RegressionModel{std::move(base), design, spec.beta_dim()};
}

IndicatorPrior indicator_prior(const DfmSpec& spec) {
  IndicatorPrior prior;
  prior.support_size = spec.support_size();
  const double null_mass = std::log1p(-spec.pi);
  const double break_mass = std::log(spec.pi / double(4 * spec.k));
  prior.log_prior = [null_mass, break_mass](Index, int label,
                                            const IndicatorSequence&) {
    return label == 0 ? null_mass : break_mass;
  };
  return prior;
}

double log_beta_density(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) return kNegInf;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double log_stretched_beta_density(double x, double a, double b, double lo,
                                  double hi) {
  return log_beta_density((x - lo) / (hi - lo), a, b) - std::log(hi - lo);
}

double log_inv_gamma_density(double v, double shape, double scale) {
  if (!(v > 0.0)) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) -
         (shape + 1.0) * std::log(v) - scale / v;
}

double log_gamma_density(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(x) - rate * x;
}

double log_normal_density(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

Index free_columns(Index row, Index k) { return std::min(row, k); }

double log_priors(const DfmParams& params, const DfmSpec& spec) {
  const DfmPriors& q = spec.priors;
  double lp = 0.0;
  for (const auto& c : params.comp) {
    lp += log_beta_density(c.rho, q.alpha_rho, q.beta_rho);
    lp += log_stretched_beta_density(c.lambda, q.alpha_lambda, q.beta_lambda,
                                     q.lambda_a, q.lambda_b);
    lp += log_inv_gamma_density(c.sigma_f * c.sigma_f, q.nu_f / 2, q.s_f / 2);
    for (std::size_t j = 0; j < 4; ++j) {
      lp += log_inv_gamma_density(c.eta[j] * c.eta[j], q.nu_eta[j] / 2,
                                  q.s_eta[j] / 2);
    }
    for (Index j = 0; j < spec.kr; ++j) {
      if (c.varpi[static_cast<std::size_t>(j)]) {
        lp += std::log(q.p_varpi) +
              log_normal_density(c.beta(j), 0.0, q.sigma_beta * q.sigma_beta);
      } else {
        if (c.beta(j) != 0.0) return kNegInf;
        lp += std::log1p(-q.p_varpi);
      }
    }
    lp += log_normal_density(c.level0, 0.0, spec.initial_level_var);
  }
  if (spec.theta_mode == ThetaMode::Unknown) {
    const Index k = spec.k;
    for (Index i = 0; i < k; ++i) {
      lp += log_gamma_density(params.kappa(i), q.nu_kappa / 2, q.S_kappa / 2);
    }
    for (Index r = 0; r < params.Theta.rows(); ++r) {
      const Index nf = free_columns(r, k);
      for (Index j = 0; j < k; ++j) {
        const double v = params.Theta(r, j);
        if (j < nf) {
          lp += log_normal_density(v, 0.0, 1.0 / params.kappa(j));
        } else if (v != (r == j ? 1.0 : 0.0)) {
          return kNegInf;
        }
      }
    }
  }
  for (Index r = 0; r < params.noise_var.size(); ++r) {
    lp += log_inv_gamma_density(params.noise_var(r), q.nu_m / 2, q.s_m / 2);
  }
  return lp;
}

DfmParams draw_from_prior(const DfmSpec& spec, Index p, Rng& rng) {
  const DfmPriors& q = spec.priors;
  DfmParams params;
  params.comp.resize(static_cast<std::size_t>(spec.k));
  for (auto& c : params.comp) {
    c.rho = beta_draw(rng, q.alpha_rho, q.beta_rho);
    c.lambda = q.lambda_a + (q.lambda_b - q.lambda_a) *
                                beta_draw(rng, q.alpha_lambda, q.beta_lambda);
    c.sigma_f = std::sqrt(inv_gamma(rng, q.nu_f / 2, q.s_f / 2));
    for (std::size_t j = 0; j < 4; ++j) {
      c.eta[j] = std::sqrt(inv_gamma(rng, q.nu_eta[j] / 2, q.s_eta[j] / 2));
    }
    c.beta = Vector::Zero(spec.kr);
    c.varpi.assign(static_cast<std::size_t>(spec.kr), false);
    for (Index j = 0; j < spec.kr; ++j) {
      const bool in = uniform01(rng) < q.p_varpi;
      c.varpi[static_cast<std::size_t>(j)] = in;
      if (in) c.beta(j) = q.sigma_beta * standard_normal(rng);
    }
    c.level0 = std::sqrt(spec.initial_level_var) * standard_normal(rng);
  }
  params.kappa.resize(spec.k);
  for (Index i = 0; i < spec.k; ++i) {
    params.kappa(i) = gamma_rate(rng, q.nu_kappa / 2, q.S_kappa / 2);
  }
  params.Theta = Matrix::Zero(p, spec.k);
  for (Index r = 0; r < p; ++r) {
    const Index nf = free_columns(r, spec.k);
    for (Index j = 0; j < nf; ++j) {
      params.Theta(r, j) = standard_normal(rng) / std::sqrt(params.kappa(j));
    }
    if (r < spec.k) params.Theta(r, r) = 1.0;
  }
  params.noise_var.resize(p);
  for (Index r = 0; r < p; ++r) {
    params.noise_var(r) = inv_gamma(rng, q.nu_m / 2, q.s_m / 2);
  }
  return params;
}

IndicatorSequence draw_indicators(const DfmSpec& spec, Index n, Rng& rng) {
  IndicatorSequence k(n, spec.support_size());
  const int breaks = spec.support_size() - 1;
  for (Index t = 0; t < n; ++t) {
    if (uniform01(rng) < spec.pi) {
      k[t] = 1 + static_cast<int>(std::min<double>(
                     breaks - 1, std::floor(uniform01(rng) * breaks)));
    }
  }
  return k;
}

}  // namespace cgssm
