#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgssm/dfm_model.hpp"
#include "cgssm/mcmc.hpp"

namespace cgssm {

enum class DataMode { Series, Grid };

/// Settings of the `fit` command.
struct FitConfig {
  std::filesystem::path data_path;
  DataMode mode = DataMode::Series;
  std::filesystem::path regressors_path;  // empty: no regressors
  DfmSpec spec;                           // regressors filled at load time
  double eof_threshold = 0.01;
  Index k_max = 10;
  bool eof_standardize = false;
  McmcSettings mcmc;
  int chains = 1;
  std::filesystem::path output_dir;
  std::string source_text;  // raw file bytes, hashed into the manifest
};

/// Settings of the `simulate` command; defaults give the two-factor
/// design with breaks on both factors.
struct BreakEvent {
  Index component = 0;  // 0-based
  Index time = 0;       // 1-based
  double size = 0.0;
};

struct SimulateConfig {
  Index n = 300;
  Index p = 400;
  Index k = 2;
  Index kr = 3;
  std::vector<double> rho = {0.8, 0.9};
  std::vector<double> lambda;  // default 2 pi / 23 for every component
  std::vector<double> sigma_f = {0.5, 0.5};
  std::vector<double> beta = {0.8, 0.9, 0.001};  // shared by all components
  double noise_sd = 0.5;
  double initial_level = 0.0;
  std::vector<BreakEvent> level_breaks = {
      {0, 200, 3.0}, {1, 50, 3.0}, {1, 75, -3.5}, {1, 100, 4.0}, {1, 150, -3.0}};
  std::vector<BreakEvent> slope_breaks = {{1, 240, 0.5}};
  std::uint64_t seed = 1;
  // settings copied into the generated fit configuration
  Index fit_iterations = 5000;
  Index fit_burn_in = 1000;
  std::string source_text;
};

/// Parse INI text. Every problem is collected and reported in one
/// ConfigError. Relative paths resolve against `base_dir`.
FitConfig parse_fit_config(const std::string& text,
                           const std::filesystem::path& base_dir);
FitConfig load_fit_config(const std::filesystem::path& path);

SimulateConfig parse_simulate_config(const std::string& text);
SimulateConfig load_simulate_config(const std::filesystem::path& path);

/// "c:t:size; c:t:size" with 1-based component and time.
std::vector<BreakEvent> parse_break_list(const std::string& text);
std::string format_break_list(const std::vector<BreakEvent>& events);

}  // namespace cgssm
