#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgssm/reduction.hpp"

namespace cgssm {

inline constexpr const char* kVersion = "1.0.0";

/// Worker-thread cap: CGSSM_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
int worker_threads();

/// Generates a data set from the component recursions and writes
/// data.csv, regressors.csv, truth_*.csv and a ready-to-run fit.ini.
void simulate_command(const std::filesystem::path& config,
                      const std::filesystem::path& out_dir);

/// EOF basis of a CSV or grid data file: eof_loadings.csv,
/// eof_explained.csv and eof_means.csv.
void eof_command(const std::filesystem::path& data, double threshold,
                 Index k_max, bool standardize,
                 const std::filesystem::path& out_dir);

struct FitOverrides {
  std::optional<int> chains;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

/// Runs the sampler described by `config` and writes the posterior
/// summaries. `out_dir` empty means the config's output.dir.
void fit_command(const std::filesystem::path& config,
                 const std::filesystem::path& out_dir,
                 const FitOverrides& overrides);

/// Times indicator sweeps with and without the reduction: bench.csv and
/// bench.txt.
std::vector<BenchRow> bench_command(const std::vector<Index>& p_grid,
                                    const BenchOptions& options,
                                    const std::filesystem::path& out_dir);

/// Reads a fit output directory and writes report.txt, trend_bands.csv
/// and break_heat.csv into it.
void diagnose_command(const std::filesystem::path& dir);

/// Parses "5,50,100" into sizes; ConfigError on bad entries.
std::vector<Index> parse_index_list(const std::string& text);

/// Type-7 sample quantile of unsorted values.
double sample_quantile(std::vector<double> values, double q);

}  // namespace cgssm
