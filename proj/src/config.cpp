#include "cgssm/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "cgssm/io.hpp"

namespace cgssm {

namespace {

namespace pt = boost::property_tree;

// Typed access to an INI tree that records every problem instead of
// stopping at the first one.
class Reader {
 public:
  explicit Reader(const std::string& text) {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
    }
  }

  void allow(const std::string& section, std::set<std::string> keys) {
    allowed_[section] = std::move(keys);
  }

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  template <typename T>
  void get(const std::string& key, T& value) {
    const auto raw = tree_.get_optional<std::string>(key);
    if (!raw) return;
    if (!convert(*raw, value)) problem(key + ": cannot read '" + *raw + "'");
  }

  void get_list(const std::string& key, std::vector<double>& value) {
    const auto raw = tree_.get_optional<std::string>(key);
    if (!raw) return;
    std::vector<double> out;
    std::stringstream ss(*raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double v = 0.0;
      if (!convert(item, v)) {
        problem(key + ": cannot read list entry '" + item + "'");
        return;
      }
      out.push_back(v);
    }
    value = std::move(out);
  }

  void problem(const std::string& what) { problems_.push_back(what); }

  void finish(const char* what) {
    for (const auto& [section, body] : tree_) {
      const auto it = allowed_.find(section);
      if (it == allowed_.end()) {
        problem("unknown section [" + section + "]");
        continue;
      }
      if (body.empty() && !body.data().empty()) {
        problem("key '" + section + "' outside any section");
        continue;
      }
      for (const auto& [key, unused] : body) {
        if (!it->second.count(key)) problem("unknown key " + section + "." + key);
      }
    }
    if (problems_.empty()) return;
    std::string msg = std::string("invalid ") + what + " configuration:";
    for (const auto& p : problems_) msg += "\n  " + p;
    throw ConfigError(msg);
  }

 private:
  static std::string trimmed(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  }
  static bool convert(const std::string& raw, double& v) {
    const std::string s = trimmed(raw);
    if (s.empty()) return false;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(v);
  }
  static bool convert(const std::string& raw, Index& v) {
    const std::string s = trimmed(raw);
    long long x = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty()) return false;
    v = static_cast<Index>(x);
    return true;
  }
  static bool convert(const std::string& raw, int& v) {
    Index x = 0;
    if (!convert(raw, x)) return false;
    v = static_cast<int>(x);
    return true;
  }
  static bool convert(const std::string& raw, std::uint64_t& v) {
    const std::string s = trimmed(raw);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc() && r.ptr == s.data() + s.size() && !s.empty();
  }
  static bool convert(const std::string& raw, bool& v) {
    const std::string s = trimmed(raw);
    if (s == "true" || s == "1" || s == "yes") return v = true, true;
    if (s == "false" || s == "0" || s == "no") return v = false, true;
    return false;
  }
  static bool convert(const std::string& raw, std::string& v) {
    v = trimmed(raw);
    return true;
  }

  pt::ptree tree_;
  std::map<std::string, std::set<std::string>> allowed_;
  std::vector<std::string> problems_;
};

const std::set<std::string> kPriorKeys = {
    "alpha_rho",     "beta_rho",      "nu_f",          "s_f",
    "nu_eta_mu1",    "s_eta_mu1",     "nu_eta_mu2",    "s_eta_mu2",
    "nu_eta_delta1", "s_eta_delta1",  "nu_eta_delta2", "s_eta_delta2",
    "alpha_lambda",  "beta_lambda",   "lambda_a",      "lambda_b",
    "nu_m",          "s_m",           "sigma_beta",    "p_varpi",
    "nu_kappa",      "s_kappa"};

void read_priors(Reader& r, DfmPriors& q) {
  r.get("priors.alpha_rho", q.alpha_rho);
  r.get("priors.beta_rho", q.beta_rho);
  r.get("priors.nu_f", q.nu_f);
  r.get("priors.s_f", q.s_f);
  static const char* kEta[4] = {"mu1", "mu2", "delta1", "delta2"};
  for (std::size_t j = 0; j < 4; ++j) {
    r.get(std::string("priors.nu_eta_") + kEta[j], q.nu_eta[j]);
    r.get(std::string("priors.s_eta_") + kEta[j], q.s_eta[j]);
  }
  r.get("priors.alpha_lambda", q.alpha_lambda);
  r.get("priors.beta_lambda", q.beta_lambda);
  r.get("priors.lambda_a", q.lambda_a);
  r.get("priors.lambda_b", q.lambda_b);
  r.get("priors.nu_m", q.nu_m);
  r.get("priors.s_m", q.s_m);
  r.get("priors.sigma_beta", q.sigma_beta);
  r.get("priors.p_varpi", q.p_varpi);
  r.get("priors.nu_kappa", q.nu_kappa);
  r.get("priors.s_kappa", q.S_kappa);
}

}  // namespace

FitConfig parse_fit_config(const std::string& text,
                           const std::filesystem::path& base_dir) {
  Reader r(text);
  r.allow("data", {"path", "mode", "regressors"});
  r.allow("model", {"k", "k_max", "theta_mode", "eof_threshold", "eof_standardize",
                    "pi", "omega0", "initial_level_var", "initial_slope_var"});
  r.allow("priors", kPriorKeys);
  r.allow("mcmc", {"iterations", "burn_in", "thin", "seed", "chains", "trend_draws"});
  r.allow("output", {"dir"});
  r.allow("simulate", {});  // generated configs may carry an empty section

  FitConfig c;
  c.source_text = text;
  std::string path, mode = "series", regressors, theta_mode = "unknown", out;
  r.get("data.path", path);
  r.get("data.mode", mode);
  r.get("data.regressors", regressors);
  if (path.empty()) r.problem("data.path is required");
  if (mode == "series") {
    c.mode = DataMode::Series;
  } else if (mode == "grid") {
    c.mode = DataMode::Grid;
  } else {
    r.problem("data.mode must be 'series' or 'grid', got '" + mode + "'");
  }
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base_dir / fp;
  };
  if (!path.empty()) c.data_path = resolve(path);
  if (!regressors.empty()) c.regressors_path = resolve(regressors);

  r.get("model.k", c.spec.k);
  r.get("model.k_max", c.k_max);
  r.get("model.theta_mode", theta_mode);
  r.get("model.eof_threshold", c.eof_threshold);
  r.get("model.eof_standardize", c.eof_standardize);
  r.get("model.pi", c.spec.pi);
  r.get("model.omega0", c.spec.omega0);
  r.get("model.initial_level_var", c.spec.initial_level_var);
  r.get("model.initial_slope_var", c.spec.initial_slope_var);
  if (theta_mode == "unknown") {
    c.spec.theta_mode = ThetaMode::Unknown;
  } else if (theta_mode == "eof") {
    c.spec.theta_mode = ThetaMode::Fixed;
  } else {
    r.problem("model.theta_mode must be 'unknown' or 'eof', got '" + theta_mode + "'");
  }
  if (c.spec.k < 1) r.problem("model.k must be >= 1");
  if (c.k_max < 1) r.problem("model.k_max must be >= 1");
  if (!(c.eof_threshold >= 0.0 && c.eof_threshold < 1.0)) {
    r.problem("model.eof_threshold must lie in [0, 1)");
  }
  read_priors(r, c.spec.priors);

  r.get("mcmc.iterations", c.mcmc.iterations);
  r.get("mcmc.burn_in", c.mcmc.burn_in);
  r.get("mcmc.thin", c.mcmc.thin);
  r.get("mcmc.seed", c.mcmc.seed);
  r.get("mcmc.chains", c.chains);
  r.get("mcmc.trend_draws", c.mcmc.store_trend_draws);
  if (c.mcmc.iterations < 0) r.problem("mcmc.iterations must be >= 0");
  if (c.mcmc.burn_in < 0) r.problem("mcmc.burn_in must be >= 0");
  if (c.mcmc.thin < 1) r.problem("mcmc.thin must be >= 1");
  if (c.chains < 1) r.problem("mcmc.chains must be >= 1");
  r.get("output.dir", out);
  if (!out.empty()) c.output_dir = resolve(out);

  // prior and model ranges (k and the regressors are checked once data load)
  DfmSpec probe = c.spec;
  probe.k = std::max<Index>(probe.k, 1);
  probe.kr = 0;
  try {
    probe.validate(0);
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    std::istringstream lines(msg);
    std::string line;
    std::getline(lines, line);  // heading
    while (std::getline(lines, line)) r.problem(line.substr(line.find_first_not_of(' ')));
  }
  r.finish("fit");
  return c;
}

FitConfig load_fit_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot open config file " + path.string());
  }
  return parse_fit_config(text, path.parent_path());
}

std::vector<BreakEvent> parse_break_list(const std::string& text) {
  std::vector<BreakEvent> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    BreakEvent e;
    long long comp = 0, t = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(item);
    if (!(is >> comp >> c1 >> t >> c2 >> e.size) || c1 != ':' || c2 != ':' ||
        comp < 1 || t < 1) {
      throw ConfigError("break entry '" + item + "' must read component:time:size");
    }
    std::string rest;
    if (is >> rest) throw ConfigError("break entry '" + item + "' has trailing text");
    e.component = static_cast<Index>(comp - 1);
    e.time = static_cast<Index>(t);
    out.push_back(e);
  }
  return out;
}

std::string format_break_list(const std::vector<BreakEvent>& events) {
  std::string out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i) out += "; ";
    out += std::to_string(events[i].component + 1) + ":" +
           std::to_string(events[i].time) + ":" + format_double(events[i].size);
  }
  return out;
}

SimulateConfig parse_simulate_config(const std::string& text) {
  Reader r(text);
  r.allow("simulate", {"n", "p", "k", "kr", "rho", "lambda", "sigma_f", "beta",
                       "noise_sd", "initial_level", "level_breaks", "slope_breaks",
                       "seed", "fit_iterations", "fit_burn_in"});
  SimulateConfig c;
  c.source_text = text;
  r.get("simulate.n", c.n);
  r.get("simulate.p", c.p);
  r.get("simulate.k", c.k);
  r.get("simulate.kr", c.kr);
  r.get_list("simulate.rho", c.rho);
  r.get_list("simulate.lambda", c.lambda);
  r.get_list("simulate.sigma_f", c.sigma_f);
  r.get_list("simulate.beta", c.beta);
  r.get("simulate.noise_sd", c.noise_sd);
  r.get("simulate.initial_level", c.initial_level);
  r.get("simulate.seed", c.seed);
  r.get("simulate.fit_iterations", c.fit_iterations);
  r.get("simulate.fit_burn_in", c.fit_burn_in);
  for (const char* key : {"simulate.level_breaks", "simulate.slope_breaks"}) {
    if (!r.has(key)) continue;
    std::string raw;
    r.get(key, raw);
    try {
      (std::string(key) == "simulate.level_breaks" ? c.level_breaks : c.slope_breaks) =
          parse_break_list(raw);
    } catch (const ConfigError& e) {
      r.problem(std::string(key) + ": " + e.what());
    }
  }
  if (c.lambda.empty()) c.lambda.assign(static_cast<std::size_t>(std::max<Index>(c.k, 0)),
                                        2.0 * std::numbers::pi / 23.0);
  if (c.n < 2) r.problem("simulate.n must be >= 2");
  if (c.k < 1) r.problem("simulate.k must be >= 1");
  if (c.p < c.k) r.problem("simulate.p must be >= simulate.k");
  if (c.kr < 0) r.problem("simulate.kr must be >= 0");
  const auto per_k = [&](const std::vector<double>& v, const char* name) {
    if (static_cast<Index>(v.size()) != c.k) {
      r.problem(std::string("simulate.") + name + " needs one value per component (" +
                std::to_string(c.k) + ")");
    }
  };
  per_k(c.rho, "rho");
  per_k(c.lambda, "lambda");
  per_k(c.sigma_f, "sigma_f");
  for (double v : c.rho) {
    if (!(v >= 0.0 && v < 1.0)) r.problem("simulate.rho entries must lie in [0, 1)");
  }
  for (double v : c.sigma_f) {
    if (!(v >= 0.0)) r.problem("simulate.sigma_f entries must be >= 0");
  }
  if (static_cast<Index>(c.beta.size()) != c.kr) {
    r.problem("simulate.beta needs kr (" + std::to_string(c.kr) + ") values");
  }
  if (!(c.noise_sd > 0.0)) r.problem("simulate.noise_sd must be > 0");
  for (const auto* list : {&c.level_breaks, &c.slope_breaks}) {
    for (const BreakEvent& e : *list) {
      if (e.component >= c.k || e.time < 2 || e.time > c.n) {
        r.problem("break at component " + std::to_string(e.component + 1) + ", time " +
                  std::to_string(e.time) + " is outside 1..k x 2..n");
      }
    }
  }
  if (c.fit_iterations < 0 || c.fit_burn_in < 0) {
    r.problem("simulate.fit_iterations and fit_burn_in must be >= 0");
  }
  r.finish("simulate");
  return c;
}

SimulateConfig load_simulate_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot open config file " + path.string());
  }
  return parse_simulate_config(text);
}

}  // namespace cgssm
