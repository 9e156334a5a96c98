#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "cgssm/commands.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian changepoint detection in dynamic factor models"};
  app.set_version_flag("--version", std::string(cgssm::kVersion));
  app.require_subcommand(1);

  std::string config, out, data, dir, pgrid = "5,50,100,500";
  double threshold = 0.01;
  long long k_max = 10;
  bool standardize = false;
  std::optional<int> chains;
  std::optional<std::uint64_t> seed;
  cgssm::BenchOptions bench;
  long long bench_n = bench.n, bench_k = bench.k;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic data set with known breaks");
  sim->add_option("--config", config, "simulation config (INI)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "output directory")->required();

  auto* eof = app.add_subcommand("eof", "empirical orthogonal functions of a data file");
  eof->add_option("--data", data, "CSV or CGSG grid file")->required()->check(CLI::ExistingFile);
  eof->add_option("--threshold", threshold, "minimum explained-variance fraction")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  eof->add_option("--k-max", k_max, "maximum number of components")->capture_default_str()
      ->check(CLI::PositiveNumber);
  eof->add_flag("--standardize", standardize, "scale each series to unit variance");
  eof->add_option("--out", out, "output directory")->required();

  auto* fit = app.add_subcommand("fit", "run the MCMC sampler");
  fit->add_option("--config", config, "fit config (INI)")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", out, "output directory (default: output.dir)");
  fit->add_option("--chains", chains, "number of chains")->check(CLI::PositiveNumber);
  fit->add_option("--seed", seed, "base seed");

  auto* bn = app.add_subcommand("bench", "time indicator sweeps with and without the reduction");
  bn->add_option("--pgrid", pgrid, "comma-separated series counts")->capture_default_str();
  bn->add_option("--n", bench_n, "series length")->capture_default_str()->check(CLI::PositiveNumber);
  bn->add_option("--k", bench_k, "number of factors")->capture_default_str()->check(CLI::PositiveNumber);
  bn->add_option("--reps", bench.repetitions, "repetitions (minimum is reported)")
      ->capture_default_str()->check(CLI::PositiveNumber);
  bn->add_option("--budget", bench.naive_budget_seconds,
                 "seconds allowed per naive sweep before extrapolating")->capture_default_str();
  bn->add_option("--seed", bench.seed, "seed")->capture_default_str();
  bn->add_option("--out", out, "output directory")->required();

  auto* dg = app.add_subcommand("diagnose", "summarize a fit output directory");
  dg->add_option("--dir", dir, "fit output directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) {
      cgssm::simulate_command(config, out);
    } else if (*eof) {
      cgssm::eof_command(data, threshold, k_max, standardize, out);
    } else if (*fit) {
      cgssm::FitOverrides o;
      o.chains = chains;
      o.seed = seed;
      o.threads = cgssm::worker_threads();
      cgssm::fit_command(config, out, o);
    } else if (*bn) {
      bench.n = bench_n;
      bench.k = bench_k;
      const auto rows = cgssm::bench_command(cgssm::parse_index_list(pgrid), bench, out);
      for (const auto& r : rows) {
        std::printf("p=%-5lld naive %.4g s%s reduced %.4g s speedup %.3g\n",
                    static_cast<long long>(r.p), r.naive_seconds,
                    r.naive_estimated ? "*" : "", r.reduced_seconds, r.speedup());
      }
    } else if (*dg) {
      cgssm::diagnose_command(dir);
    }
  } catch (const cgssm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cgssm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const cgssm::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
