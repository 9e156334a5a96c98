#include "cgssm/kalman.hpp"

#include <string>
#include <utility>

namespace cgssm {

namespace {

void check_observations(const CgssModel& model,
                        const IndicatorSequence& indicators,
                        const Matrix& observations) {
  if (indicators.size() != model.n()) {
    throw DimensionError("indicator length " +
                         std::to_string(indicators.size()) + " != n=" +
                         std::to_string(model.n()));
  }
  if (observations.rows() != model.n() || observations.cols() != model.p()) {
    throw DimensionError("observations are " +
                         std::to_string(observations.rows()) + "x" +
                         std::to_string(observations.cols()) + ", expected " +
                         std::to_string(model.n()) + "x" +
                         std::to_string(model.p()));
  }
}

}  // namespace

FilterState filter_update(const Vector& m_pred, const Matrix& V_pred,
                          const SystemMatrices& mats, const Vector& y,
                          Index t) {
  FilterState s;
  s.m_pred = m_pred;
  s.V_pred = V_pred;
  const Matrix HV = mats.H * V_pred;
  s.R = HV * mats.H.transpose() + mats.G * mats.G.transpose();
  symmetrize(s.R);
  const SpdFactor chol(s.R);
  if (!chol.ok()) throw SingularInnovationError(t, "filter");

  s.eta = y - mats.g - mats.H * m_pred;
  const Matrix RiH = chol.solve(mats.H);  // R^{-1} H
  s.score = RiH.transpose() * s.eta;
  s.info = mats.H.transpose() * RiH;
  symmetrize(s.info);

  s.m_filt = m_pred + V_pred * s.score;
  s.V_filt = V_pred - HV.transpose() * (RiH * V_pred);
  symmetrize(s.V_filt);

  const double p = static_cast<double>(y.size());
  s.loglik = -0.5 * (p * kLog2Pi + chol.log_det() + chol.quad_inv(s.eta));
  return s;
}

FilterState filter_step(const FilterState& prev, const SystemMatrices& mats,
                        const Vector& y, Index t) {
  Vector m_pred = mats.h + mats.F * prev.m_filt;
  Matrix V_pred = mats.F * prev.V_filt * mats.F.transpose() +
                  mats.Gamma * mats.Gamma.transpose();
  symmetrize(V_pred);
  return filter_update(m_pred, V_pred, mats, y, t);
}

FilterState filter_first(const CgssModel& model, const SystemMatrices& mats,
                         const Vector& y) {
  return filter_update(model.init_mean(), model.init_cov(), mats, y, 0);
}

std::vector<FilterState> run_filter(const CgssModel& model,
                                    const IndicatorSequence& indicators,
                                    const Vector& omega,
                                    const Matrix& observations) {
  check_observations(model, indicators, observations);
  std::vector<FilterState> out;
  out.reserve(static_cast<std::size_t>(model.n()));
  for (Index t = 0; t < model.n(); ++t) {
    const SystemMatrices mats = model.matrices(t, indicators[t], omega);
    const Vector y = observations.row(t).transpose();
    out.push_back(t == 0 ? filter_first(model, mats, y)
                         : filter_step(out.back(), mats, y, t));
  }
  return out;
}

double filter_loglik(const CgssModel& model, const IndicatorSequence& indicators,
                     const Vector& omega, const Matrix& observations) {
  check_observations(model, indicators, observations);
  double total = 0.0;
  FilterState state;
  for (Index t = 0; t < model.n(); ++t) {
    const SystemMatrices mats = model.matrices(t, indicators[t], omega);
    const Vector y = observations.row(t).transpose();
    state = t == 0 ? filter_first(model, mats, y)
                   : filter_step(state, mats, y, t);
    total += state.loglik;
  }
  return total;
}

Matrix smoothed_states(const CgssModel& model,
                       const IndicatorSequence& indicators, const Vector& omega,
                       const Matrix& observations) {
  const std::vector<FilterState> pass =
      run_filter(model, indicators, omega, observations);
  const Index n = model.n();
  const Index m = model.m();
  Matrix xhat(n, m);
  Vector r = Vector::Zero(m);
  const Matrix eye = Matrix::Identity(m, m);
  for (Index t = n - 1; t >= 0; --t) {
    const FilterState& s = pass[static_cast<std::size_t>(t)];
    if (t + 1 < n) {
      const SystemMatrices next = model.matrices(t + 1, indicators[t + 1], omega);
      // L_t = F_{t+1} (I - V_t H' R^{-1} H)
      const Matrix L = next.F * (eye - s.V_pred * s.info);
      r = s.score + L.transpose() * r;
    } else {
      r = s.score;
    }
    xhat.row(t) = (s.m_pred + s.V_pred * r).transpose();
  }
  return xhat;
}

Matrix simulation_smoother(const CgssModel& model,
                           const IndicatorSequence& indicators,
                           const Vector& omega, const Matrix& observations,
                           Rng& rng) {
  check_observations(model, indicators, observations);
  const Simulation plus = simulate(model, indicators, omega, rng);
  const Matrix xhat = smoothed_states(model, indicators, omega, observations);
  const Matrix xhat_plus =
      smoothed_states(model, indicators, omega, plus.observations);
  return xhat - xhat_plus + plus.states;
}

Matrix simulation_smoother(const CgssModel& model,
                           const IndicatorSequence& indicators,
                           const Vector& omega, const Matrix& observations,
                           std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return simulation_smoother(model, indicators, omega, observations, rng);
}

CgssModel with_beta(const RegressionModel& model, const Vector& beta,
                    const Vector& omega) {
  if (beta.size() != model.k) {
    throw DimensionError("beta has length " + std::to_string(beta.size()) +
                         ", expected " + std::to_string(model.k));
  }
  const CgssModel& base = model.base;
  auto design = model.design;
  auto provider = [base, design, beta](Index t, int label,
                                       const Vector& omega) {
    SystemMatrices s = base.matrices(t, label, omega);
    if (t > 0 && beta.size() > 0) s.h += design(t, label, omega) * beta;
    return s;
  };
  Vector m1 = base.init_mean();
  if (beta.size() > 0) {
    m1 += design(0, 0, omega) * beta;
  }
  return CgssModel(base.n(), base.p(), base.m(), base.r(), std::move(provider),
                   std::move(m1), base.init_cov());
}

BetaStats beta_stats(const RegressionModel& model,
                     const IndicatorSequence& indicators, const Vector& omega,
                     const Matrix& observations) {
  const CgssModel& base = model.base;
  check_observations(base, indicators, observations);
  const Index k = model.k;
  const Index m = base.m();
  BetaStats out{0.0, Vector::Zero(k), Matrix::Zero(k, k)};
  FilterState state;
  Matrix A_filt;  // d m_filt / d beta
  for (Index t = 0; t < base.n(); ++t) {
    const SystemMatrices mats = base.matrices(t, indicators[t], omega);
    const Vector y = observations.row(t).transpose();
    Matrix A_pred;
    if (t == 0) {
      state = filter_first(base, mats, y);
      A_pred = k > 0 ? model.design(0, 0, omega) : Matrix(m, 0);
    } else {
      state = filter_step(state, mats, y, t);
      A_pred = mats.F * A_filt;
      if (k > 0) A_pred += model.design(t, indicators[t], omega);
    }
    out.loglik0 += state.loglik;
    if (k > 0) {
      out.s += A_pred.transpose() * state.score;
      out.Q += A_pred.transpose() * state.info * A_pred;
      A_filt = A_pred - state.V_pred * (state.info * A_pred);
    }
  }
  symmetrize(out.Q);
  return out;
}

BetaPosterior beta_posterior(const BetaStats& stats, const BetaPrior& prior) {
  const Index k = stats.s.size();
  if (prior.mean.size() != k || prior.variance.size() != k ||
      (!prior.included.empty() &&
       static_cast<Index>(prior.included.size()) != k)) {
    throw DimensionError("beta prior does not match beta length " +
                         std::to_string(k));
  }
  BetaPosterior post;
  for (Index j = 0; j < k; ++j) {
    if (prior.included.empty() || prior.included[static_cast<std::size_t>(j)]) {
      post.index.push_back(j);
    }
  }
  const Index q = static_cast<Index>(post.index.size());
  Vector b0(q), s(q);
  Vector p0(q);
  Matrix Q(q, q);
  for (Index a = 0; a < q; ++a) {
    const Index ia = post.index[static_cast<std::size_t>(a)];
    b0(a) = prior.mean(ia);
    if (!(prior.variance(ia) > 0.0)) {
      throw NumericalError("beta prior variance must be positive");
    }
    p0(a) = 1.0 / prior.variance(ia);
    s(a) = stats.s(ia);
    for (Index b = 0; b < q; ++b) {
      Q(a, b) = stats.Q(ia, post.index[static_cast<std::size_t>(b)]);
    }
  }
  post.precision = Q;
  post.precision.diagonal() += p0;
  const SpdFactor chol(post.precision);
  if (!chol.ok()) {
    throw NumericalError("degenerate regression: beta posterior precision is "
                         "singular");
  }
  const Vector rhs = s + p0.cwiseProduct(b0);
  post.mean = chol.solve(rhs);
  const double log_det_p0 = p0.array().log().sum();
  post.log_marginal =
      stats.loglik0 +
      0.5 * (post.mean.dot(post.precision * post.mean) -
             b0.dot(p0.cwiseProduct(b0))) +
      0.5 * (log_det_p0 - chol.log_det());
  return post;
}

StateBetaDraw joint_state_beta_draw(const RegressionModel& model,
                                    const IndicatorSequence& indicators,
                                    const Vector& omega,
                                    const Matrix& observations,
                                    const BetaPrior& prior, Rng& rng) {
  const BetaStats stats = beta_stats(model, indicators, omega, observations);
  const BetaPosterior post = beta_posterior(stats, prior);
  Vector beta = Vector::Zero(model.k);
  const Index q = static_cast<Index>(post.index.size());
  if (q > 0) {
    const SpdFactor chol(post.precision);
    // draw N(mean, P^{-1}) as mean + L'^{-1} z with P = L L'
    const Vector z = standard_normal_vector(rng, q);
    const Matrix L = chol.lower();
    const Vector dev = L.transpose().triangularView<Eigen::Upper>().solve(z);
    for (Index a = 0; a < q; ++a) {
      beta(post.index[static_cast<std::size_t>(a)]) = post.mean(a) + dev(a);
    }
  }
  const CgssModel fixed = with_beta(model, beta, omega);
  Matrix x = simulation_smoother(fixed, indicators, omega, observations, rng);
  return {std::move(x), std::move(beta)};
}

StateBetaDraw joint_state_beta_draw(const RegressionModel& model,
                                    const IndicatorSequence& indicators,
                                    const Vector& omega,
                                    const Matrix& observations,
                                    const BetaPrior& prior,
                                    std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return joint_state_beta_draw(model, indicators, omega, observations, prior,
                               rng);
}

}  // namespace cgssm
