#include "cgssm/commands.hpp"

#include "json.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "cgssm/config.hpp"
#include "cgssm/eof.hpp"
#include "cgssm/io.hpp"
#include "cgssm/mcmc.hpp"

namespace cgssm {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw DataError("cannot create output directory " + dir.string());
  }
}

std::vector<std::string> one_based(Index n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index t = 1; t <= n; ++t) out.push_back(std::to_string(t));
  return out;
}

std::string label_name(int label, Index k) {
  if (label == 0) return "null";
  const BreakLabel b = decode_label(label, k);
  return "c" + std::to_string(b.component + 1) + (b.kind == 0 ? "_level" : "_slope") +
         std::to_string(b.size + 1);
}

// Columns `prefix_1..prefix_k` keyed by t = 1..n.
SeriesData component_table(const std::string& prefix, const Matrix& values_kn) {
  SeriesData d;
  d.index = one_based(values_kn.cols());
  for (Index i = 1; i <= values_kn.rows(); ++i) d.names.push_back(prefix + "_" + std::to_string(i));
  d.values = values_kn.transpose();
  return d;
}

// Data file in either format; grid pixels become columns r<row>_c<col>.
struct LoadedData {
  SeriesData series;
  bool grid = false;
  std::uint32_t rows = 0, cols = 0;
};

bool looks_like_grid(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string(magic, 4) == "CGSG";
}

LoadedData load_data(const fs::path& path, std::optional<DataMode> mode) {
  LoadedData d;
  const bool grid = mode ? *mode == DataMode::Grid : looks_like_grid(path);
  if (!grid) {
    d.series = load_csv(path);
    return d;
  }
  const GridDataset g = load_grid(path);
  d.grid = true;
  d.rows = g.rows;
  d.cols = g.cols;
  d.series.index = one_based(g.values.rows());
  for (std::uint32_t r = 1; r <= g.rows; ++r)
    for (std::uint32_t c = 1; c <= g.cols; ++c)
      d.series.names.push_back("r" + std::to_string(r) + "_c" + std::to_string(c));
  d.series.values = g.values;
  return d;
}

// Loadings rows: series name, or pixel plus grid coordinates.
void write_loadings(const fs::path& path, const LoadedData& data, const Matrix& Theta,
                    const std::string& prefix) {
  std::vector<std::string> header;
  if (data.grid) {
    header = {"pixel", "row", "col"};
  } else {
    header = {"series"};
  }
  for (Index j = 1; j <= Theta.cols(); ++j) header.push_back(prefix + "_" + std::to_string(j));
  std::vector<std::vector<std::string>> rows;
  for (Index r = 0; r < Theta.rows(); ++r) {
    std::vector<std::string> row;
    if (data.grid) {
      row = {std::to_string(r + 1), std::to_string(r / data.cols + 1),
             std::to_string(r % data.cols + 1)};
    } else {
      row = {data.series.names[static_cast<std::size_t>(r)]};
    }
    for (Index j = 0; j < Theta.cols(); ++j) row.push_back(format_double(Theta(r, j)));
    rows.push_back(std::move(row));
  }
  write_table(path, header, rows);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint64_t get_le(const std::string& buf, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= std::uint64_t(static_cast<unsigned char>(buf[at + i])) << (8 * i);
  }
  return v;
}

// Trend draws: "CGTD", u32 version, u32 k, u32 n, u64 draws, then
// draws x k x n little-endian float64.
void write_trend_draws(const fs::path& path, const std::vector<const std::vector<double>*>& chains,
                       Index k, Index n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  std::uint64_t total = 0;
  for (const auto* c : chains) total += c->size() / static_cast<std::size_t>(k * n);
  out.write("CGTD", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(k));
  put_u32(out, static_cast<std::uint32_t>(n));
  put_u64(out, total);
  for (const auto* c : chains) {
    for (double v : *c) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof v);
      put_u64(out, bits);
    }
  }
  if (!out) throw DataError("write failed for " + path.string());
}

struct TrendDraws {
  Index k = 0, n = 0, draws = 0;
  std::vector<double> values;  // draw-major, then component, then t
};

TrendDraws read_trend_draws(const fs::path& path) {
  const std::string buf = read_file(path);
  if (buf.size() < 24 || buf.compare(0, 4, "CGTD") != 0) {
    throw DataError(path.string() + ": not a trend-draw file");
  }
  TrendDraws d;
  d.k = static_cast<Index>(get_le(buf, 8, 4));
  d.n = static_cast<Index>(get_le(buf, 12, 4));
  d.draws = static_cast<Index>(get_le(buf, 16, 8));
  const std::size_t count = static_cast<std::size_t>(d.k * d.n * d.draws);
  if (buf.size() != 24 + 8 * count) {
    throw DataError(path.string() + ": expected " + std::to_string(24 + 8 * count) +
                    " bytes, found " + std::to_string(buf.size()));
  }
  d.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t bits = get_le(buf, 24 + 8 * i, 8);
    std::memcpy(&d.values[i], &bits, sizeof bits);
  }
  return d;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
         "." + std::to_string(EIGEN_MINOR_VERSION);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a;
  return v.empty() ? std::nan("") : s / double(v.size());
}

}  // namespace

int worker_threads() {
  if (const char* env = std::getenv("CGSSM_THREADS")) {
    int v = 0;
    const std::string s(env);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec == std::errc() && r.ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    long long v = 0;
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    const std::string s = a == std::string::npos ? "" : item.substr(a, b - a + 1);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || v < 1) {
      throw ConfigError("list entry '" + item + "' is not a positive integer");
    }
    out.push_back(static_cast<Index>(v));
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

double sample_quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double h = (double(values.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - double(lo)) * (values[hi] - values[lo]);
}

// --- simulate -----------------------------------------------------------

void simulate_command(const fs::path& config, const fs::path& out_dir) {
  const SimulateConfig c = load_simulate_config(config);
  ensure_dir(out_dir);
  Rng rng = make_rng(c.seed);
  const Index n = c.n, p = c.p, k = c.k, kr = c.kr;

  Matrix Theta = Matrix::Zero(p, k);
  for (Index r = 0; r < p; ++r) {
    for (Index j = 0; j < free_columns(r, k); ++j) Theta(r, j) = standard_normal(rng);
    if (r < k) Theta(r, r) = 1.0;
  }
  Matrix W(n, kr);
  for (Index t = 0; t < n; ++t)
    for (Index j = 0; j < kr; ++j) W(t, j) = standard_normal(rng);
  const Vector beta = Eigen::Map<const Vector>(c.beta.data(), kr);

  Matrix level_jump = Matrix::Zero(k, n), slope_jump = Matrix::Zero(k, n);
  for (const auto& e : c.level_breaks) level_jump(e.component, e.time - 1) += e.size;
  for (const auto& e : c.slope_breaks) slope_jump(e.component, e.time - 1) += e.size;

  Matrix cycle(k, n), trend(k, n), slope(k, n), seasonal(k, n), factor(k, n);
  for (Index i = 0; i < k; ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    const double rho = c.rho[ii], lam = c.lambda[ii], sf = c.sigma_f[ii];
    const double rc = rho * std::cos(lam), rs = rho * std::sin(lam);
    const double stationary = sf / std::sqrt(1.0 - rho * rho);
    double psi = stationary * standard_normal(rng);
    double star = stationary * standard_normal(rng);
    double mu = c.initial_level, delta = 0.0;
    for (Index t = 0; t < n; ++t) {
      if (t > 0) {
        const double e1 = sf * standard_normal(rng);
        const double e2 = sf * standard_normal(rng);
        const double next = rc * psi + rs * star + e1;
        star = -rs * psi + rc * star + e2;
        psi = next;
        mu = mu + delta + level_jump(i, t);
        delta = delta + slope_jump(i, t);
      }
      cycle(i, t) = psi;
      trend(i, t) = mu;
      slope(i, t) = delta;
      seasonal(i, t) = psi + (kr > 0 ? W.row(t).dot(beta) : 0.0);
      factor(i, t) = seasonal(i, t) + mu;
    }
  }
  Matrix y = factor.transpose() * Theta.transpose();
  for (Index t = 0; t < n; ++t)
    for (Index r = 0; r < p; ++r) y(t, r) += c.noise_sd * standard_normal(rng);

  SeriesData data;
  data.index = one_based(n);
  for (Index r = 1; r <= p; ++r) data.names.push_back("s" + std::to_string(r));
  data.values = y;
  save_csv(out_dir / "data.csv", data);
  if (kr > 0) {
    SeriesData reg;
    reg.index = one_based(n);
    for (Index j = 1; j <= kr; ++j) reg.names.push_back("w" + std::to_string(j));
    reg.values = W;
    save_csv(out_dir / "regressors.csv", reg);
  }

  std::vector<std::vector<std::string>> breaks;
  for (const auto* list : {&c.level_breaks, &c.slope_breaks}) {
    const char* kind = list == &c.level_breaks ? "level" : "slope";
    for (const auto& e : *list) {
      breaks.push_back({std::to_string(e.component + 1), std::to_string(e.time), kind,
                        format_double(e.size)});
    }
  }
  std::sort(breaks.begin(), breaks.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(std::stoi(a[0]), std::stoi(a[1]), a[2]) <
           std::make_tuple(std::stoi(b[0]), std::stoi(b[1]), b[2]);
  });
  write_table(out_dir / "truth_breaks.csv", {"component", "t", "kind", "size"}, breaks);

  SeriesData paths;
  paths.index = one_based(n);
  Matrix all(n, 5 * k);
  for (Index i = 0; i < k; ++i) {
    const std::string s = "_" + std::to_string(i + 1);
    for (const char* name : {"factor", "trend", "slope", "seasonal", "cycle"}) {
      paths.names.push_back(name + s);
    }
    all.col(5 * i) = factor.row(i).transpose();
    all.col(5 * i + 1) = trend.row(i).transpose();
    all.col(5 * i + 2) = slope.row(i).transpose();
    all.col(5 * i + 3) = seasonal.row(i).transpose();
    all.col(5 * i + 4) = cycle.row(i).transpose();
  }
  paths.values = all;
  save_csv(out_dir / "truth_paths.csv", paths);

  LoadedData shape;
  shape.series.names = data.names;
  write_loadings(out_dir / "truth_loadings.csv", shape, Theta, "theta");

  std::vector<std::vector<std::string>> params;
  for (Index i = 0; i < k; ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    const std::string s = "_" + std::to_string(i + 1);
    params.push_back({"rho" + s, format_double(c.rho[ii])});
    params.push_back({"lambda" + s, format_double(c.lambda[ii])});
    params.push_back({"sigma_f" + s, format_double(c.sigma_f[ii])});
    params.push_back({"level0" + s, format_double(c.initial_level)});
    for (Index j = 0; j < kr; ++j) {
      params.push_back({"beta" + s + "_" + std::to_string(j + 1), format_double(beta(j))});
    }
  }
  params.push_back({"noise_sd", format_double(c.noise_sd)});
  write_table(out_dir / "truth_params.csv", {"parameter", "value"}, params);

  std::ofstream ini(out_dir / "fit.ini");
  ini << "[data]\npath = data.csv\nmode = series\n";
  if (kr > 0) ini << "regressors = regressors.csv\n";
  ini << "\n[model]\nk = " << k << "\ntheta_mode = unknown\n"
      << "\n[mcmc]\niterations = " << c.fit_iterations << "\nburn_in = " << c.fit_burn_in
      << "\nthin = 1\nseed = " << c.seed << "\nchains = 1\n"
      << "\n[output]\ndir = fit\n";
  if (!ini) throw DataError("cannot write " + (out_dir / "fit.ini").string());
}

// --- eof ----------------------------------------------------------------

void eof_command(const fs::path& data_path, double threshold, Index k_max,
                 bool standardize, const fs::path& out_dir) {
  const LoadedData data = load_data(data_path, std::nullopt);
  const EofBasis b = compute_eof(data.series.values, threshold, k_max, standardize);
  ensure_dir(out_dir);
  write_loadings(out_dir / "eof_loadings.csv", data, b.Theta, "eof");
  std::vector<std::vector<std::string>> rows;
  double cum = 0.0;
  for (Index j = 0; j < b.explained.size(); ++j) {
    cum += b.explained(j);
    rows.push_back({std::to_string(j + 1), format_double(b.explained(j)), format_double(cum)});
  }
  write_table(out_dir / "eof_explained.csv", {"component", "explained", "cumulative"}, rows);
  rows.clear();
  for (Index r = 0; r < b.col_means.size(); ++r) {
    rows.push_back({data.series.names[static_cast<std::size_t>(r)],
                    format_double(b.col_means(r)), format_double(b.col_scales(r))});
  }
  write_table(out_dir / "eof_means.csv", {"series", "mean", "scale"}, rows);
}

// --- fit ----------------------------------------------------------------

void fit_command(const fs::path& config_path, const fs::path& out_arg,
                 const FitOverrides& overrides) {
  FitConfig cfg = load_fit_config(config_path);
  if (overrides.chains) {
    if (*overrides.chains < 1) throw ConfigError("--chains must be >= 1");
    cfg.chains = *overrides.chains;
  }
  if (overrides.seed) cfg.mcmc.seed = *overrides.seed;
  const fs::path out_dir = out_arg.empty() ? cfg.output_dir : out_arg;
  if (out_dir.empty()) throw ConfigError("no output directory: pass --out or set output.dir");

  const LoadedData data = load_data(cfg.data_path, cfg.mode);
  Matrix y = data.series.values;
  const Index n = y.rows();
  const Index p = y.cols();
  DfmSpec spec = cfg.spec;
  if (!cfg.regressors_path.empty()) {
    const SeriesData reg = load_csv(cfg.regressors_path);
    if (reg.values.rows() != n) {
      throw DataError(cfg.regressors_path.string() + ": has " +
                      std::to_string(reg.values.rows()) + " rows, data have " +
                      std::to_string(n));
    }
    spec.regressors = reg.values;
    spec.kr = reg.values.cols();
  }

  Matrix theta_init;
  if (spec.theta_mode == ThetaMode::Fixed) {
    const EofBasis basis = compute_eof(y, cfg.eof_threshold, cfg.k_max, cfg.eof_standardize);
    y = (y.rowwise() - basis.col_means.transpose()).array().rowwise() /
        basis.col_scales.transpose().array();
    theta_init = basis.Theta;
    spec.k = basis.Theta.cols();
  } else {
    if (spec.k > std::min(n, p)) {
      throw DataError("model.k = " + std::to_string(spec.k) + " exceeds min(n, p) = " +
                      std::to_string(std::min(n, p)));
    }
    const EofBasis basis = compute_eof(y, 0.0, spec.k);
    if (basis.Theta.cols() < spec.k) {
      throw DataError("data support only " + std::to_string(basis.Theta.cols()) +
                      " components, model.k = " + std::to_string(spec.k));
    }
    theta_init = basis.Theta;
  }
  spec.validate(n);

  const std::vector<ChainOutput> chains =
      run_chains(y, spec, theta_init, cfg.mcmc, cfg.chains, overrides.threads);
  ensure_dir(out_dir);

  const Index k = spec.k;
  const int S = spec.support_size();
  Index kept = 0;
  for (const auto& c : chains) kept += c.kept;
  const double inv = kept > 0 ? 1.0 / double(kept) : std::nan("");
  const std::vector<std::string>& names = chains.front().names;
  const Index np = static_cast<Index>(names.size());

  // params.csv
  {
    std::vector<std::vector<std::string>> rows;
    for (Index j = 0; j < np; ++j) {
      std::vector<double> pooled;
      std::vector<double> ifs;
      for (const auto& c : chains) {
        std::vector<double> col(static_cast<std::size_t>(c.kept));
        for (Index d = 0; d < c.kept; ++d) col[static_cast<std::size_t>(d)] = c.draws(d, j);
        pooled.insert(pooled.end(), col.begin(), col.end());
        try {
          ifs.push_back(inefficiency_factor(col));
        } catch (const NumericalError&) {
          // constant or short chain: IF undefined
        }
      }
      const double m = mean_of(pooled);
      double v = 0.0;
      for (double a : pooled) v += (a - m) * (a - m);
      const double sd = pooled.size() > 1 ? std::sqrt(v / double(pooled.size() - 1)) : std::nan("");
      const double inef = ifs.size() == chains.size() ? mean_of(ifs) : std::nan("");
      rows.push_back({names[static_cast<std::size_t>(j)], format_double(m), format_double(sd),
                      format_double(inef)});
    }
    write_table(out_dir / "params.csv", {"parameter", "mean", "sd", "if"}, rows);
  }

  Matrix labels = Matrix::Zero(n, S);
  Matrix trend = Matrix::Zero(k, n), seasonal = Matrix::Zero(k, n);
  Matrix theta = Matrix::Zero(p, k);
  Vector noise = Vector::Zero(p), noise_sq = Vector::Zero(p);
  for (const auto& c : chains) {
    if (c.kept == 0) continue;
    labels += c.label_counts;
    trend += c.trend_sum;
    seasonal += c.seasonal_sum;
    theta += c.theta_sum;
    noise += c.noise_sum;
    noise_sq += c.noise_sq_sum;
  }
  labels *= inv;
  trend *= inv;
  seasonal *= inv;
  theta *= inv;
  noise *= inv;
  noise_sq *= inv;

  // breaks.csv, break_labels.csv, break_any.csv
  {
    std::vector<std::vector<std::string>> rows;
    for (Index i = 0; i < k; ++i) {
      for (Index t = 0; t < n; ++t) {
        const double l1 = labels(t, encode_label(i, 0, 0, k));
        const double l2 = labels(t, encode_label(i, 0, 1, k));
        const double s1 = labels(t, encode_label(i, 1, 0, k));
        const double s2 = labels(t, encode_label(i, 1, 1, k));
        rows.push_back({std::to_string(i + 1), std::to_string(t + 1), format_double(l1 + l2),
                        format_double(s1 + s2), format_double(l1), format_double(l2),
                        format_double(s1), format_double(s2)});
      }
    }
    write_table(out_dir / "breaks.csv",
                {"component", "t", "level", "slope", "level_size1", "level_size2",
                 "slope_size1", "slope_size2"},
                rows);
    SeriesData lab;
    lab.index = one_based(n);
    for (int s = 0; s < S; ++s) lab.names.push_back(label_name(s, k));
    lab.values = labels;
    save_csv(out_dir / "break_labels.csv", lab);
    rows.clear();
    for (Index t = 0; t < n; ++t) {
      rows.push_back({std::to_string(t + 1), format_double(labels.row(t).tail(S - 1).sum())});
    }
    write_table(out_dir / "break_any.csv", {"t", "any"}, rows);
  }

  save_csv(out_dir / "trend.csv", component_table("trend", trend));
  save_csv(out_dir / "seasonal.csv", component_table("seasonal", seasonal));
  write_loadings(out_dir / "loadings.csv", data, theta, "theta");
  {
    std::vector<std::vector<std::string>> rows;
    for (Index r = 0; r < p; ++r) {
      const double sd = std::sqrt(std::max(0.0, noise_sq(r) - noise(r) * noise(r)));
      rows.push_back({data.series.names[static_cast<std::size_t>(r)], format_double(noise(r)),
                      format_double(sd)});
    }
    write_table(out_dir / "noise.csv", {"series", "sigma_m_mean", "sigma_m_sd"}, rows);
  }
  {
    std::vector<std::string> header = {"draw", "chain"};
    header.insert(header.end(), names.begin(), names.end());
    std::vector<std::vector<std::string>> rows;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      for (Index d = 0; d < chains[c].kept; ++d) {
        std::vector<std::string> row = {std::to_string(rows.size() + 1), std::to_string(c + 1)};
        for (Index j = 0; j < np; ++j) row.push_back(format_double(chains[c].draws(d, j)));
        rows.push_back(std::move(row));
      }
    }
    write_table(out_dir / "draws.csv", header, rows);
    rows.clear();
    const std::vector<std::string> rw = rwmh_names(spec);
    for (std::size_t c = 0; c < chains.size(); ++c) {
      const auto& ch = chains[c];
      for (std::size_t s = 0; s < ch.accepted.size(); ++s) {
        const double rate = ch.proposed[s] > 0 ? double(ch.accepted[s]) / double(ch.proposed[s])
                                               : std::nan("");
        rows.push_back({std::to_string(c + 1),
                        rw[s],
                        std::to_string(ch.accepted[s]), std::to_string(ch.proposed[s]),
                        format_double(rate), format_double(ch.rwmh_scale(static_cast<Index>(s)))});
      }
    }
    write_table(out_dir / "acceptance.csv",
                {"chain", "parameter", "accepted", "proposed", "rate", "scale"}, rows);
  }
  if (cfg.mcmc.store_trend_draws) {
    std::vector<const std::vector<double>*> parts;
    for (const auto& c : chains) parts.push_back(&c.trend_draws);
    write_trend_draws(out_dir / "trend_draws.bin", parts, k, n);
  }

  nlohmann::json m;
  m["tool"] = "cgssm";
  m["version"] = kVersion;
  m["eigen_version"] = eigen_version();
  m["compiler"] = std::string("gcc ") + __VERSION__;
  m["config_sha256"] = sha256_hex(cfg.source_text);
  m["data_sha256"] = sha256_hex(read_file(cfg.data_path));
  m["seed"] = cfg.mcmc.seed;
  m["chains"] = cfg.chains;
  m["iterations"] = cfg.mcmc.iterations;
  m["burn_in"] = cfg.mcmc.burn_in;
  m["thin"] = cfg.mcmc.thin;
  m["kept_draws"] = kept;
  m["n"] = n;
  m["p"] = p;
  m["k"] = k;
  m["kr"] = spec.kr;
  m["theta_mode"] = spec.theta_mode == ThetaMode::Unknown ? "unknown" : "eof";
  m["timestamp"] = utc_timestamp();
  nlohmann::json files = nlohmann::json::object();
  std::vector<std::string> written = {"params.csv",   "breaks.csv",   "break_labels.csv",
                                      "break_any.csv", "trend.csv",    "seasonal.csv",
                                      "loadings.csv",  "noise.csv",    "draws.csv",
                                      "acceptance.csv"};
  if (cfg.mcmc.store_trend_draws) written.push_back("trend_draws.bin");
  for (const auto& name : written) files[name] = sha256_hex(read_file(out_dir / name));
  m["outputs"] = files;
  std::ofstream mf(out_dir / "manifest.json");
  mf << m.dump(2) << '\n';
  if (!mf) throw DataError("cannot write manifest.json");
}

// --- bench --------------------------------------------------------------

std::vector<BenchRow> bench_command(const std::vector<Index>& p_grid,
                                    const BenchOptions& options, const fs::path& out_dir) {
  const std::vector<BenchRow> rows = bench_reduction(p_grid, options);
  ensure_dir(out_dir);
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({std::to_string(r.p), format_double(r.naive_seconds),
                     format_double(r.reduced_seconds), format_double(r.speedup()),
                     r.naive_estimated ? "1" : "0"});
  }
  write_table(out_dir / "bench.csv",
              {"p", "naive_seconds", "reduced_seconds", "speedup", "naive_estimated"}, cells);
  std::ofstream txt(out_dir / "bench.txt");
  txt << "indicator sweep timing, n = " << options.n << ", k = " << options.k
      << ", best of " << options.repetitions << "\n\n";
  txt << std::setw(8) << "p" << std::setw(16) << "naive [s]" << std::setw(16) << "reduced [s]"
      << std::setw(12) << "speedup" << "\n";
  double rmin = INFINITY, rmax = 0.0;
  for (const auto& r : rows) {
    txt << std::setw(8) << r.p << std::setw(15) << std::setprecision(4) << r.naive_seconds
        << (r.naive_estimated ? "*" : " ") << std::setw(16) << r.reduced_seconds
        << std::setw(12) << r.speedup() << "\n";
    rmin = std::min(rmin, r.reduced_seconds);
    rmax = std::max(rmax, r.reduced_seconds);
  }
  txt << "\n* extrapolated from a shortened series\n";
  txt << "naive log-log slope (p >= 50): " << naive_loglog_slope(rows, 50) << "\n";
  txt << "reduced time max/min ratio: " << rmax / rmin << "\n";
  if (!txt) throw DataError("cannot write bench.txt");
  return rows;
}

// --- diagnose ---------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> read_rows(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

void diagnose_command(const fs::path& dir) {
  for (const char* f : {"draws.csv", "acceptance.csv", "break_labels.csv", "trend_draws.bin"}) {
    if (!fs::exists(dir / f)) {
      throw DataError("diagnose: " + (dir / f).string() +
                      " is missing; run fit first (with mcmc.trend_draws = true)");
    }
  }
  const SeriesData draws = load_csv(dir / "draws.csv");
  if (draws.names.empty() || draws.names.front() != "chain") {
    throw DataError("diagnose: " + (dir / "draws.csv").string() + " has no chain column");
  }
  const Index total = draws.values.rows();
  const Vector chain_id = draws.values.col(0);
  const int chains = total > 0 ? static_cast<int>(chain_id.maxCoeff()) : 0;

  std::ostringstream rep;
  rep << "posterior summary: " << total << " kept draws in " << chains << " chain(s)\n\n";
  rep << std::left << std::setw(16) << "parameter" << std::right << std::setw(13) << "mean"
      << std::setw(13) << "sd" << std::setw(13) << "q05" << std::setw(13) << "q50"
      << std::setw(13) << "q95" << std::setw(10) << "IF" << std::setw(10) << "ESS"
      << std::setw(7) << "thin" << std::setw(13) << "first10%" << std::setw(13) << "last50%"
      << std::setw(9) << "z" << "\n";
  for (std::size_t j = 1; j < draws.names.size(); ++j) {
    std::vector<double> all;
    std::vector<double> ifs;
    double early = 0.0, late = 0.0, early_sq = 0.0, late_sq = 0.0;
    Index ne = 0, nl = 0;
    for (int c = 1; c <= chains; ++c) {
      std::vector<double> v;
      for (Index d = 0; d < total; ++d) {
        if (chain_id(d) == c) v.push_back(draws.values(d, static_cast<Index>(j)));
      }
      all.insert(all.end(), v.begin(), v.end());
      try {
        ifs.push_back(inefficiency_factor(v));
      } catch (const NumericalError&) {
      }
      const std::size_t e_end = v.size() / 10, l_begin = v.size() / 2;
      for (std::size_t d = 0; d < e_end; ++d) {
        early += v[d];
        early_sq += v[d] * v[d];
        ++ne;
      }
      for (std::size_t d = l_begin; d < v.size(); ++d) {
        late += v[d];
        late_sq += v[d] * v[d];
        ++nl;
      }
    }
    const double m = mean_of(all);
    double var = 0.0;
    for (double a : all) var += (a - m) * (a - m);
    const double sd = all.size() > 1 ? std::sqrt(var / double(all.size() - 1)) : std::nan("");
    const double inef = !ifs.empty() && ifs.size() == std::size_t(chains) ? mean_of(ifs) : std::nan("");
    const double ess = double(all.size()) / inef;
    const double me = ne ? early / double(ne) : std::nan("");
    const double ml = nl ? late / double(nl) : std::nan("");
    // block z-score with both variances inflated by the inefficiency factor
    const double ve = ne ? (early_sq / double(ne) - me * me) * inef / double(ne) : std::nan("");
    const double vl = nl ? (late_sq / double(nl) - ml * ml) * inef / double(nl) : std::nan("");
    const double z = (me - ml) / std::sqrt(ve + vl);
    rep << std::left << std::setw(16) << draws.names[j] << std::right << std::setprecision(5)
        << std::setw(13) << m << std::setw(13) << sd << std::setw(13)
        << sample_quantile(all, 0.05) << std::setw(13) << sample_quantile(all, 0.5)
        << std::setw(13) << sample_quantile(all, 0.95) << std::setw(10) << std::setprecision(3)
        << inef << std::setw(10) << std::setprecision(5) << ess << std::setw(7)
        << (std::isfinite(inef) ? std::to_string(static_cast<long>(std::ceil(inef))) : "nan")
        << std::setw(13) << me << std::setw(13) << ml << std::setw(9) << std::setprecision(3)
        << z << "\n";
  }

  const auto acc = read_rows(dir / "acceptance.csv");
  rep << "\nrandom-walk Metropolis acceptance (target " << kRwmhTarget << ")\n";
  for (std::size_t r = 1; r < acc.size(); ++r) {
    if (acc[r].size() < 6) {
      throw DataError((dir / "acceptance.csv").string() + ":" + std::to_string(r + 1) +
                      ": expected 6 fields");
    }
    rep << "  chain " << acc[r][0] << "  " << std::left << std::setw(12) << acc[r][1]
        << std::right << " rate " << std::setprecision(4) << std::stod(acc[r][4])
        << "  final step " << std::stod(acc[r][5]) << "\n";
  }
  {
    std::ofstream out(dir / "report.txt");
    out << rep.str();
    if (!out) throw DataError("cannot write report.txt");
  }

  const TrendDraws td = read_trend_draws(dir / "trend_draws.bin");
  {
    std::vector<std::vector<std::string>> rows;
    std::vector<double> v(static_cast<std::size_t>(td.draws));
    for (Index i = 0; i < td.k; ++i) {
      for (Index t = 0; t < td.n; ++t) {
        for (Index d = 0; d < td.draws; ++d) {
          v[static_cast<std::size_t>(d)] =
              td.values[static_cast<std::size_t>((d * td.k + i) * td.n + t)];
        }
        rows.push_back({std::to_string(i + 1), std::to_string(t + 1),
                        format_double(mean_of(v)), format_double(sample_quantile(v, 0.05)),
                        format_double(sample_quantile(v, 0.5)),
                        format_double(sample_quantile(v, 0.95))});
      }
    }
    write_table(dir / "trend_bands.csv", {"component", "t", "mean", "q05", "q50", "q95"}, rows);
  }

  const SeriesData labels = load_csv(dir / "break_labels.csv");
  const Index S = labels.values.cols();
  if (S < 5 || (S - 1) % 4 != 0) {
    throw DataError((dir / "break_labels.csv").string() + ": expected 4k + 1 label columns");
  }
  const Index k = (S - 1) / 4;
  std::vector<std::vector<std::string>> heat;
  for (Index t = 0; t < labels.values.rows(); ++t) {
    for (Index i = 0; i < k; ++i) {
      for (int kind = 0; kind < 2; ++kind) {
        const double prob = labels.values(t, encode_label(i, kind, 0, k)) +
                            labels.values(t, encode_label(i, kind, 1, k));
        heat.push_back({labels.index[static_cast<std::size_t>(t)], std::to_string(i + 1),
                        kind == 0 ? "level" : "slope", format_double(prob)});
      }
    }
  }
  write_table(dir / "break_heat.csv", {"t", "component", "kind", "probability"}, heat);
}

}  // namespace cgssm
