#include "cgssm/k_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cgssm/linalg.hpp"

namespace cgssm {

BackwardCache backward_pass(const CgssModel& model,
                            const IndicatorSequence& current,
                            const Vector& omega, const Matrix& observations) {
  const Index n = model.n();
  const Index m = model.m();
  if (current.size() != n) {
    throw DimensionError("indicator length does not match n");
  }
  if (observations.rows() != n || observations.cols() != model.p()) {
    throw DimensionError("observations do not match (n, p)");
  }
  BackwardCache cache;
  cache.Omega.assign(static_cast<std::size_t>(n), Matrix::Zero(m, m));
  cache.mu.assign(static_cast<std::size_t>(n), Vector::Zero(m));
  if (n == 0) return cache;

  const Matrix eye = Matrix::Identity(m, m);
  for (Index t = n - 2; t >= 0; --t) {
    const std::size_t next = static_cast<std::size_t>(t + 1);
    const Matrix& Om = cache.Omega[next];
    const Vector& mu = cache.mu[next];
    // transition into t+1 and observation at t+1
    const SystemMatrices s = model.matrices(t + 1, current[t + 1], omega);
    const Vector y = observations.row(t + 1).transpose();

    const Matrix J = s.H * s.Gamma;  // p x r
    Matrix R = J * J.transpose() + s.G * s.G.transpose();
    const SpdFactor chol(R);
    if (!chol.ok()) throw SingularInnovationError(t + 1, "backward pass");

    const Matrix RiJ = chol.solve(J);
    const Matrix RiH = chol.solve(s.H);
    const Matrix B = RiJ * s.Gamma.transpose();             // p x m
    const Matrix E = eye - B.transpose() * s.H;             // m x m
    const Matrix A = E * s.F;                               // m x m
    const Matrix M = RiH * s.F;                             // p x m
    const Index r = s.Gamma.cols();
    Matrix N = s.Gamma *
               (Matrix::Identity(r, r) - J.transpose() * RiJ) *
               s.Gamma.transpose();
    symmetrize(N);
    const Matrix C = psd_sqrt(N);                           // m x rank
    Matrix D = Matrix::Identity(C.cols(), C.cols()) +
               C.transpose() * Om * C;
    const SpdFactor dchol(D);
    if (!dchol.ok()) {
      throw NumericalError("backward pass: I + C' Omega C not positive "
                           "definite at t=" + std::to_string(t + 1));
    }
    const Matrix L = Om * C * dchol.solve(C.transpose());   // m x m
    const Matrix Kbar = eye - L;
    Matrix S = Kbar * Om;
    symmetrize(S);
    const Vector resid = y - s.g;
    const Vector q = Om * (E * s.h + B.transpose() * resid);

    Matrix Om_t = A.transpose() * S * A + M.transpose() * s.H * s.F;
    symmetrize(Om_t);
    cache.Omega[static_cast<std::size_t>(t)] = std::move(Om_t);
    cache.mu[static_cast<std::size_t>(t)] =
        A.transpose() * (Kbar * (mu - q)) +
        M.transpose() * (resid - s.H * s.h);
  }
  return cache;
}

double combine_future(const Matrix& Omega, const Vector& mu,
                      const Vector& m_filt, const Matrix& V_filt) {
  const Matrix T = psd_sqrt(V_filt);
  const Index c = T.cols();
  const Vector o = mu - Omega * m_filt;
  const double base = m_filt.dot(Omega * m_filt - 2.0 * mu);
  if (c == 0) return -0.5 * base;
  Matrix Z = T.transpose() * Omega * T;
  Z.diagonal().array() += 1.0;
  const SpdFactor chol(Z);
  if (!chol.ok()) {
    throw NumericalError("future-density combination: Z not positive definite");
  }
  const Vector To = T.transpose() * o;
  const Vector ZiTo = chol.solve(To);
  return -0.5 * chol.log_det() - 0.5 * (base - ZiTo.dot(To));
}

CandidateSet evaluate_candidates(const CgssModel& model,
                                 const IndicatorPrior& prior,
                                 const Vector& omega, const Matrix& observations,
                                 const IndicatorSequence& current,
                                 const BackwardCache& cache, Index t,
                                 const FilterState* incoming) {
  const int S = prior.support_size;
  CandidateSet out;
  out.log_weight.resize(static_cast<std::size_t>(S));
  out.states.resize(static_cast<std::size_t>(S));
  const Vector y = observations.row(t).transpose();
  const Matrix& Om = cache.Omega[static_cast<std::size_t>(t)];
  const Vector& mu = cache.mu[static_cast<std::size_t>(t)];
  for (int label = 0; label < S; ++label) {
    const double lp = prior.log_prior(t, label, current);
    const std::size_t i = static_cast<std::size_t>(label);
    if (lp == -std::numeric_limits<double>::infinity()) {
      out.log_weight[i] = lp;
      continue;
    }
    const SystemMatrices mats = model.matrices(t, label, omega);
    FilterState st = (t == 0 || incoming == nullptr)
                         ? filter_first(model, mats, y)
                         : filter_step(*incoming, mats, y, t);
    const double future = combine_future(Om, mu, st.m_filt, st.V_filt);
    out.log_weight[i] = st.loglik + future + lp;
    out.states[i] = std::move(st);
  }
  return out;
}

IndicatorSequence sample_indicators(const CgssModel& model,
                                    const IndicatorPrior& prior,
                                    const Vector& omega,
                                    const Matrix& observations,
                                    const IndicatorSequence& current, Rng& rng,
                                    SweepTrace* trace) {
  if (current.support_size != prior.support_size) {
    throw DimensionError("indicator support does not match prior support");
  }
  current.validate();
  IndicatorSequence next = current;
  const BackwardCache cache =
      backward_pass(model, current, omega, observations);
  if (trace) {
    trace->backward_steps += std::max<Index>(model.n() - 1, 0);
    trace->pmf.clear();
  }
  FilterState incoming;
  for (Index t = 0; t < model.n(); ++t) {
    CandidateSet cands =
        evaluate_candidates(model, prior, omega, observations, next, cache, t,
                            t == 0 ? nullptr : &incoming);
    Index chosen = 0;
    try {
      chosen = categorical_from_log(rng, cands.log_weight);
    } catch (const NumericalError&) {
      throw NumericalError("impossible state: every candidate for K_t has zero "
                           "weight at t=" + std::to_string(t));
    }
    if (trace) {
      trace->filter_steps += prior.support_size;
      trace->pmf.push_back(normalize_log_weights(cands.log_weight));
    }
    next[t] = static_cast<int>(chosen);
    // the filter step under the drawn label was already computed above
    incoming = std::move(cands.states[static_cast<std::size_t>(chosen)]);
  }
  return next;
}

IndicatorSequence sample_indicators(const CgssModel& model,
                                    const IndicatorPrior& prior,
                                    const Vector& omega,
                                    const Matrix& observations,
                                    const IndicatorSequence& current,
                                    std::uint64_t seed, SweepTrace* trace) {
  Rng rng = make_rng(seed);
  return sample_indicators(model, prior, omega, observations, current, rng,
                           trace);
}

}  // namespace cgssm
