#include <gtest/gtest.h>

#include <numbers>

#include "cgssm/config.hpp"
#include "temp_dir.hpp"

namespace cgssm {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse_fit_config(text, "/base");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int problem_count(const std::string& msg) {
  int lines = 0;
  for (char c : msg) lines += c == '\n';
  return lines;
}

TEST(Config, GoldenDefaultsMatchPriorTable) {
  const FitConfig c = parse_fit_config("[data]\npath = y.csv\n", "/base");
  const DfmPriors& q = c.spec.priors;
  EXPECT_EQ(q.alpha_rho, 15.0);
  EXPECT_EQ(q.beta_rho, 1.5);
  EXPECT_EQ(q.nu_f, 10.0);
  EXPECT_EQ(q.s_f, 0.1);
  EXPECT_EQ(q.nu_eta, (std::array<double, 4>{3.0, 3.0, 3.0, 3.0}));
  EXPECT_EQ(q.s_eta, (std::array<double, 4>{30.0, 300.0, 0.1, 0.4}));
  EXPECT_EQ(q.alpha_lambda, 2.0);
  EXPECT_EQ(q.beta_lambda, 2.0);
  EXPECT_EQ(q.lambda_a, 0.0);
  EXPECT_EQ(q.lambda_b, 4.0 * std::numbers::pi / 23.0);
  EXPECT_EQ(q.nu_m, 10.0);
  EXPECT_EQ(q.s_m, 0.1);
  EXPECT_EQ(q.sigma_beta, 3.0);
  EXPECT_EQ(q.p_varpi, 0.5);
  EXPECT_EQ(q.nu_kappa, 10.0);
  EXPECT_EQ(q.S_kappa, 0.01);
  EXPECT_EQ(c.mcmc.iterations, 5000);
  EXPECT_EQ(c.mcmc.burn_in, 1000);
  EXPECT_EQ(c.mcmc.thin, 1);
  EXPECT_EQ(c.chains, 1);
  EXPECT_EQ(c.eof_threshold, 0.01);
  EXPECT_EQ(c.data_path, std::filesystem::path("/base/y.csv"));
  EXPECT_EQ(c.spec.theta_mode, ThetaMode::Unknown);
}

TEST(Config, OverridesAreRead) {
  const FitConfig c = parse_fit_config(
      "[data]\npath = /abs/g.cgsg\nmode = grid\n[model]\nk = 3\ntheta_mode = eof\n"
      "[priors]\nalpha_rho = 20\ns_eta_delta2 = 0.5\n[mcmc]\niterations = 10\nburn_in = 2\n"
      "thin = 2\nseed = 99\nchains = 4\ntrend_draws = false\n[output]\ndir = out\n",
      "/base");
  EXPECT_EQ(c.data_path, std::filesystem::path("/abs/g.cgsg"));
  EXPECT_EQ(c.mode, DataMode::Grid);
  EXPECT_EQ(c.spec.k, 3);
  EXPECT_EQ(c.spec.theta_mode, ThetaMode::Fixed);
  EXPECT_EQ(c.spec.priors.alpha_rho, 20.0);
  EXPECT_EQ(c.spec.priors.s_eta[3], 0.5);
  EXPECT_EQ(c.mcmc.seed, 99u);
  EXPECT_EQ(c.chains, 4);
  EXPECT_FALSE(c.mcmc.store_trend_draws);
  EXPECT_EQ(c.output_dir, std::filesystem::path("/base/out"));
}

TEST(Config, MissingDataPathIsSingleError) {
  const std::string msg = error_of("[model]\nk = 2\n");
  EXPECT_NE(msg.find("data.path"), std::string::npos) << msg;
  EXPECT_EQ(problem_count(msg), 1) << msg;
}

TEST(Config, EveryBadKeyReportedAtOnce) {
  const std::string msg = error_of(
      "[data]\npath = y.csv\nmode = cube\n[model]\nk = two\ntheta_mode = pca\n"
      "[priors]\nalpha_rho = -1\nnu_f = 0\nbogus = 1\n[mcmc]\nthin = 0\n[extra]\na = 1\n");
  for (const char* what : {"data.mode", "model.k", "theta_mode", "alpha_rho", "nu_f",
                           "priors.bogus", "mcmc.thin", "[extra]"}) {
    EXPECT_NE(msg.find(what), std::string::npos) << what << " missing from\n" << msg;
  }
  EXPECT_GE(problem_count(msg), 8);
}

TEST(Config, SyntaxErrorCitesLine) {
  const std::string msg = error_of("[data]\npath = y.csv\n[model\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, SimulateDefaultsGiveTwoFactorDesign) {
  const SimulateConfig c = parse_simulate_config("");
  EXPECT_EQ(c.n, 300);
  EXPECT_EQ(c.p, 400);
  EXPECT_EQ(c.k, 2);
  EXPECT_EQ(c.kr, 3);
  EXPECT_EQ(c.rho, (std::vector<double>{0.8, 0.9}));
  EXPECT_EQ(c.lambda, (std::vector<double>(2, 2.0 * std::numbers::pi / 23.0)));
  EXPECT_EQ(c.sigma_f, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(c.beta, (std::vector<double>{0.8, 0.9, 0.001}));
  EXPECT_EQ(format_break_list(c.level_breaks), "1:200:3; 2:50:3; 2:75:-3.5; 2:100:4; 2:150:-3");
  EXPECT_EQ(format_break_list(c.slope_breaks), "2:240:0.5");
}

TEST(Config, BreakListRoundTrip) {
  const auto events = parse_break_list("1:10:2.5; 2:20:-1 ;");
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[1].component, 1);
  EXPECT_EQ(events[1].time, 20);
  EXPECT_EQ(parse_break_list(format_break_list(events)).size(), 2u);
  EXPECT_THROW(parse_break_list("1-10-2"), ConfigError);
  EXPECT_THROW(parse_break_list("0:10:2"), ConfigError);
}

TEST(Config, SimulateValidationCollectsProblems) {
  try {
    parse_simulate_config("[simulate]\nn = 50\nrho = 0.5\nbeta = 1,2\nnoise_sd = 0\n");
    FAIL() << "no error";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* what : {"rho", "beta", "noise_sd", "time 200"}) {
      EXPECT_NE(msg.find(what), std::string::npos) << what << "\n" << msg;
    }
  }
}

TEST(Config, LoadResolvesRelativeToFile) {
  testing::TempDir dir;
  const auto p = dir.write("run.ini", "[data]\npath = sub/y.csv\n");
  EXPECT_EQ(load_fit_config(p).data_path, dir.path() / "sub/y.csv");
  EXPECT_THROW(load_fit_config(dir / "none.ini"), ConfigError);
}

}  // namespace
}  // namespace cgssm
