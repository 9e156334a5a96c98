#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "cgssm/dfm_model.hpp"
#include "cgssm/reduction.hpp"

namespace cgssm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

DfmSpec bench_spec(Index k) {
  DfmSpec spec;
  spec.k = k;
  spec.kr = 0;
  spec.initial_slope_var = 1.0;
  spec.initial_level_var = 1.0;
  return spec;
}

DfmParams bench_params(const DfmSpec& spec, Index p, Rng& rng) {
  DfmParams params = draw_from_prior(spec, p, rng);
  for (Index i = 0; i < spec.k; ++i) {
    auto& c = params.comp[static_cast<std::size_t>(i)];
    c.rho = 0.8 + 0.1 * double(i % 2);
    c.lambda = 2.0 * std::numbers::pi / 23.0;
    c.sigma_f = 0.5;
    c.eta = {6.0, 12.0, 0.25, 0.5};
  }
  for (Index r = 0; r < p; ++r) {
    for (Index j = 0; j < free_columns(r, spec.k); ++j) {
      params.Theta(r, j) = standard_normal(rng);
    }
  }
  params.noise_var = Vector::Constant(p, 0.25);
  return params;
}

struct BenchProblem {
  BenchProblem(Index p, const BenchOptions& o, Rng rng)
      : spec(bench_spec(o.k)),
        params(bench_params(spec, p, rng)),
        state(state_regression_model(spec, params, o.n)),
        K(draw_indicators(spec, o.n, rng)) {}
  DfmSpec spec;
  DfmParams params;
  RegressionModel state;
  IndicatorSequence K;
  Matrix y;
};

BenchProblem make_problem(Index p, const BenchOptions& o) {
  Rng rng = make_rng(o.seed + static_cast<std::uint64_t>(p));
  BenchProblem b(p, o, make_rng(o.seed + 7919 * static_cast<std::uint64_t>(p)));
  const CgssModel full = with_factor_observation(
      with_beta(b.state, pack_beta(b.spec, b.params), Vector()),
      b.params.Theta, selection_matrix(o.k), b.params.noise_var);
  b.y = simulate(full, b.K, Vector(), rng).observations;
  return b;
}

double naive_sweep(const BenchProblem& b, Index n, Rng& rng) {
  const auto start = Clock::now();
  const CgssModel base =
      with_beta(b.state, pack_beta(b.spec, b.params), Vector()).with_length(n);
  const CgssModel full = with_factor_observation(
      base, b.params.Theta, selection_matrix(b.spec.k), b.params.noise_var);
  IndicatorSequence K(n, b.spec.support_size());
  for (Index t = 0; t < n; ++t) K[t] = b.K[t];
  sample_indicators(full, indicator_prior(b.spec), Vector(), b.y.topRows(n), K,
                    rng);
  return seconds_since(start);
}

double reduced_sweep(const BenchProblem& b, Rng& rng) {
  const auto start = Clock::now();
  const ReducedObservations red = reduce(b.params.Theta, b.params.noise_var, b.y);
  const CgssModel base = with_beta(b.state, pack_beta(b.spec, b.params), Vector());
  const CgssModel model =
      with_reduced_observation(base, selection_matrix(b.spec.k), red);
  sample_indicators(model, indicator_prior(b.spec), Vector(), red.yL, b.K, rng);
  return seconds_since(start);
}

}  // namespace

std::vector<BenchRow> bench_reduction(const std::vector<Index>& p_grid,
                                      const BenchOptions& options) {
  std::vector<BenchRow> rows;
  const int reps = std::max(1, options.repetitions);
  for (Index p : p_grid) {
    if (p < options.k) throw ConfigError("bench: every p must be >= k");
    const BenchProblem b = make_problem(p, options);
    Rng rng = make_rng(options.seed);
    BenchRow row;
    row.p = p;

    row.reduced_seconds = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
      row.reduced_seconds = std::min(row.reduced_seconds, reduced_sweep(b, rng));
    }

    // probe a short prefix to predict the cost of a full naive sweep
    const Index n = options.n;
    const Index probe_n = std::min<Index>(n, 4);
    const double probe = naive_sweep(b, probe_n, rng);
    const double predicted = probe * double(n) / double(probe_n);
    if (predicted <= options.naive_budget_seconds) {
      row.naive_seconds = std::numeric_limits<double>::infinity();
      const int naive_reps =
          predicted * reps <= options.naive_budget_seconds ? reps : 1;
      for (int r = 0; r < naive_reps; ++r) {
        row.naive_seconds = std::min(row.naive_seconds, naive_sweep(b, n, rng));
      }
    } else {
      const Index short_n = std::clamp<Index>(
          static_cast<Index>(options.naive_budget_seconds / predicted * double(n)),
          probe_n, n);
      row.naive_seconds = naive_sweep(b, short_n, rng) * double(n) / double(short_n);
      row.naive_estimated = short_n < n;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cgssm
