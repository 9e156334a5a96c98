#include "cgssm/ssm.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "cgssm/linalg.hpp"

namespace cgssm {

namespace {

void expect_shape(const char* name, Index rows, Index cols, Index want_rows,
                  Index want_cols, Index t) {
  if (rows != want_rows || cols != want_cols) {
    throw DimensionError(std::string(name) + " at t=" + std::to_string(t) +
                         " is " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", expected " +
                         std::to_string(want_rows) + "x" +
                         std::to_string(want_cols));
  }
}

}  // namespace

void IndicatorSequence::validate() const {
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] < 0 || labels[t] >= support_size) {
      throw DimensionError("indicator label " + std::to_string(labels[t]) +
                           " at t=" + std::to_string(t) +
                           " outside support of size " +
                           std::to_string(support_size));
    }
  }
}

CgssModel::CgssModel(Index n, Index p, Index m, Index r,
                     SystemProvider provider, Vector init_mean, Matrix init_cov)
    : n_(n),
      p_(p),
      m_(m),
      r_(r),
      provider_(std::move(provider)),
      init_mean_(std::move(init_mean)),
      init_cov_(std::move(init_cov)) {
  if (n_ < 0 || p_ < 1 || m_ < 1 || r_ < 0) {
    throw DimensionError("model dimensions must satisfy n>=0, p>=1, m>=1, r>=0");
  }
  expect_shape("m_1", init_mean_.rows(), init_mean_.cols(), m_, 1, 0);
  expect_shape("V_1", init_cov_.rows(), init_cov_.cols(), m_, m_, 0);
  const double scale = std::max(1.0, init_cov_.cwiseAbs().maxCoeff());
  if ((init_cov_ - init_cov_.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * scale) {
    throw DimensionError("V_1 is not symmetric");
  }
  if (min_eigenvalue(init_cov_) < -1e-9 * scale) {
    throw DimensionError("V_1 is not positive semi-definite");
  }
  if (!provider_) throw DimensionError("model has no system-matrix provider");
}

SystemMatrices CgssModel::matrices(Index t, int label,
                                   const Vector& omega) const {
  SystemMatrices s = provider_(t, label, omega);
  expect_shape("g", s.g.rows(), s.g.cols(), p_, 1, t);
  expect_shape("H", s.H.rows(), s.H.cols(), p_, m_, t);
  expect_shape("G", s.G.rows(), s.G.cols(), p_, p_, t);
  if (t > 0) {
    expect_shape("h", s.h.rows(), s.h.cols(), m_, 1, t);
    expect_shape("F", s.F.rows(), s.F.cols(), m_, m_, t);
    expect_shape("Gamma", s.Gamma.rows(), s.Gamma.cols(), m_, r_, t);
  }
  return s;
}

CgssModel CgssModel::with_length(Index n) const {
  CgssModel copy = *this;
  copy.n_ = n;
  return copy;
}

Vector draw_gaussian(Rng& rng, const Vector& mean, const Matrix& cov) {
  const Matrix c = psd_sqrt(cov);
  if (c.cols() == 0) return mean;
  return mean + c * standard_normal_vector(rng, c.cols());
}

Simulation simulate(const CgssModel& model, const IndicatorSequence& indicators,
                    const Vector& omega, Rng& rng) {
  if (indicators.size() != model.n()) {
    throw DimensionError("indicator sequence length " +
                         std::to_string(indicators.size()) +
                         " does not match n=" + std::to_string(model.n()));
  }
  indicators.validate();
  Simulation out{Matrix(model.n(), model.p()), Matrix(model.n(), model.m())};
  Vector x;
  for (Index t = 0; t < model.n(); ++t) {
    const SystemMatrices s = model.matrices(t, indicators[t], omega);
    if (t == 0) {
      x = draw_gaussian(rng, model.init_mean(), model.init_cov());
    } else {
      x = s.h + s.F * x;
      if (model.r() > 0) x += s.Gamma * standard_normal_vector(rng, model.r());
    }
    Vector y = s.g + s.H * x;
    y += s.G * standard_normal_vector(rng, model.p());
    out.states.row(t) = x.transpose();
    out.observations.row(t) = y.transpose();
  }
  return out;
}

Simulation simulate(const CgssModel& model, const IndicatorSequence& indicators,
                    const Vector& omega, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return simulate(model, indicators, omega, rng);
}

}  // namespace cgssm
