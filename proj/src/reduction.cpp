#include "cgssm/reduction.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

#include "cgssm/linalg.hpp"

namespace cgssm {

namespace {

void check_noise(const Vector& noise_var) {
  if (!(noise_var.array() > 0.0).all() || !noise_var.allFinite()) {
    throw DataError("noise variances must be positive and finite");
  }
}

// (Theta' S^-1 Theta)^-1 and S^-1 Theta for diagonal S.
void projection(const Matrix& Theta, const Vector& noise_var, Matrix& weighted,
                Matrix& SigmaL) {
  check_noise(noise_var);
  weighted = Theta.array().colwise() / noise_var.array();
  Matrix A = Theta.transpose() * weighted;
  symmetrize(A);
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (!(ev(0) > 1e-12 * ev(ev.size() - 1))) {
    throw RankError("reduction: Theta' Sigma^-1 Theta is rank deficient");
  }
  const SpdFactor chol(A);
  SigmaL = chol.inverse();
  symmetrize(SigmaL);
}

void check_shapes(const Matrix& Theta, Index p_obs) {
  if (Theta.rows() != p_obs) {
    throw DimensionError("reduction: Theta has " +
                         std::to_string(Theta.rows()) + " rows, data has " +
                         std::to_string(p_obs) + " series");
  }
  if (Theta.cols() < 1 || Theta.cols() > Theta.rows()) {
    throw RankError("reduction: Theta must have 1 <= k <= p columns");
  }
}

}  // namespace

ReducedObservations reduce(const Matrix& Theta, const Vector& noise_var,
                           const Matrix& observations) {
  check_shapes(Theta, observations.cols());
  if (noise_var.size() != Theta.rows()) {
    throw DimensionError("reduction: noise variance length must equal p");
  }
  ReducedObservations out;
  Matrix weighted;
  projection(Theta, noise_var, weighted, out.SigmaL);
  out.yL = (observations * weighted) * out.SigmaL;
  return out;
}

ReducedObservations reduce_time_varying(const Matrix& Theta,
                                        const Matrix& noise_var,
                                        const Matrix& observations) {
  check_shapes(Theta, observations.cols());
  if (noise_var.rows() != observations.rows() ||
      noise_var.cols() != observations.cols()) {
    throw DimensionError("reduction: noise variances must be n x p");
  }
  ReducedObservations out;
  out.time_varying = true;
  out.yL.resize(observations.rows(), Theta.cols());
  out.SigmaL_t.resize(static_cast<std::size_t>(observations.rows()));
  Matrix weighted;
  for (Index t = 0; t < observations.rows(); ++t) {
    Matrix& S = out.SigmaL_t[static_cast<std::size_t>(t)];
    projection(Theta, noise_var.row(t).transpose(), weighted, S);
    out.yL.row(t) = (observations.row(t) * weighted) * S;
  }
  return out;
}

CgssModel with_factor_observation(const CgssModel& state_model,
                                  const Matrix& Theta, const Matrix& Phi,
                                  const Vector& noise_var) {
  check_noise(noise_var);
  if (Theta.cols() != Phi.rows() || Phi.cols() != state_model.m() ||
      noise_var.size() != Theta.rows()) {
    throw DimensionError("factor observation: Theta, Phi, noise shapes differ");
  }
  const Index p = Theta.rows();
  const Matrix H = Theta * Phi;
  const Vector sd = noise_var.cwiseSqrt();
  auto inner = state_model.provider();
  auto provider = [inner, H, sd, p](Index t, int label, const Vector& omega) {
    SystemMatrices s = inner(t, label, omega);
    s.g = Vector::Zero(p);
    s.H = H;
    s.G = sd.asDiagonal();
    return s;
  };
  return CgssModel(state_model.n(), p, state_model.m(), state_model.r(),
                   provider, state_model.init_mean(), state_model.init_cov());
}

CgssModel with_reduced_observation(const CgssModel& state_model,
                                   const Matrix& Phi,
                                   const ReducedObservations& reduced) {
  const Index k = Phi.rows();
  if (Phi.cols() != state_model.m() || reduced.yL.cols() != k) {
    throw DimensionError("reduced observation: Phi and yL shapes differ");
  }
  std::vector<Matrix> chol;
  if (reduced.time_varying) {
    for (const Matrix& S : reduced.SigmaL_t) chol.push_back(SpdFactor(S).lower());
  } else {
    chol.push_back(SpdFactor(reduced.SigmaL).lower());
  }
  auto inner = state_model.provider();
  const bool tv = reduced.time_varying;
  auto provider = [inner, Phi, chol, tv, k](Index t, int label,
                                            const Vector& omega) {
    SystemMatrices s = inner(t, label, omega);
    s.g = Vector::Zero(k);
    s.H = Phi;
    s.G = chol[tv ? static_cast<std::size_t>(t) : 0];
    return s;
  };
  return CgssModel(state_model.n(), k, state_model.m(), state_model.r(),
                   provider, state_model.init_mean(), state_model.init_cov());
}

RegressionModel with_factor_observation(const RegressionModel& state_model,
                                        const Matrix& Theta, const Matrix& Phi,
                                        const Vector& noise_var) {
  return RegressionModel{
      with_factor_observation(state_model.base, Theta, Phi, noise_var),
      state_model.design, state_model.k};
}

RegressionModel with_reduced_observation(const RegressionModel& state_model,
                                         const Matrix& Phi,
                                         const ReducedObservations& reduced) {
  return RegressionModel{
      with_reduced_observation(state_model.base, Phi, reduced),
      state_model.design, state_model.k};
}

double marginal_state_loglik(const CgssModel& state_model, const Matrix& Phi,
                             const ReducedObservations& reduced,
                             const IndicatorSequence& indicators,
                             const Vector& omega) {
  return filter_loglik(with_reduced_observation(state_model, Phi, reduced),
                       indicators, omega, reduced.yL);
}

double naive_loglog_slope(const std::vector<BenchRow>& rows, Index p_min) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const BenchRow& r : rows) {
    if (r.p < p_min) continue;
    const double x = std::log(double(r.p));
    const double y = std::log(r.naive_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace cgssm
