#include "cgssm/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstring>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace cgssm {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(const std::string& cell, double& v) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  if (*first == '+') ++first;
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, v);
  return res.ec == std::errc() && res.ptr == last;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& buf, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= std::uint32_t(static_cast<unsigned char>(buf[at + i])) << (8 * i);
  }
  return v;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SeriesData load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  auto fail = [&](Index line, const std::string& what) -> DataError {
    return DataError(path.string() + ":" + std::to_string(line) + ": " + what);
  };
  SeriesData data;
  std::string line;
  Index line_no = 0;
  if (!std::getline(in, line)) throw fail(1, "empty file, expected a header row");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split(line);
  if (header.size() < 2) throw fail(line_no, "header needs a time column and at least one series");
  data.index_name = header[0];
  data.names.assign(header.begin() + 1, header.end());
  const std::size_t p = data.names.size();

  std::vector<double> flat;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != p + 1) {
      throw fail(line_no, "expected " + std::to_string(p + 1) + " fields, found " +
                              std::to_string(cells.size()));
    }
    if (!seen.insert(cells[0]).second) {
      throw fail(line_no, "duplicate time label '" + cells[0] + "'");
    }
    data.index.push_back(cells[0]);
    for (std::size_t j = 1; j <= p; ++j) {
      double v = 0.0;
      if (!parse_double(cells[j], v) || !std::isfinite(v)) {
        throw fail(line_no, "column '" + data.names[j - 1] +
                                "' holds a non-numeric value '" + cells[j] + "'");
      }
      flat.push_back(v);
    }
  }
  const Index n = static_cast<Index>(data.index.size());
  if (n == 0) throw fail(line_no, "no data rows");
  data.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(flat.data(), n,
                                                                 static_cast<Index>(p));
  return data;
}

std::string format_double(double v) {
  std::array<char, 40> buf{};
  const int len = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

void save_csv(const std::filesystem::path& path, const SeriesData& data) {
  if (static_cast<Index>(data.index.size()) != data.values.rows() ||
      static_cast<Index>(data.names.size()) != data.values.cols()) {
    throw DimensionError("save_csv: labels do not match the value matrix");
  }
  std::ofstream out = open_out(path);
  out << data.index_name;
  for (const auto& name : data.names) out << ',' << name;
  out << '\n';
  for (Index t = 0; t < data.values.rows(); ++t) {
    out << data.index[static_cast<std::size_t>(t)];
    for (Index j = 0; j < data.values.cols(); ++j) out << ',' << format_double(data.values(t, j));
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

void write_table(const std::filesystem::path& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& cells) {
  std::ofstream out = open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (const auto& row : cells) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

GridDataset load_grid(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  constexpr std::size_t kHeader = 20;
  if (buf.size() < kHeader) {
    throw DataError(path.string() + ": truncated header, expected 20 bytes, found " +
                    std::to_string(buf.size()));
  }
  if (buf.compare(0, 4, "CGSG") != 0) throw DataError(path.string() + ": bad magic, expected CGSG");
  const std::uint32_t version = get_u32(buf, 4);
  if (version != kGridVersion) {
    throw DataError(path.string() + ": unsupported grid version " + std::to_string(version));
  }
  GridDataset g;
  g.rows = get_u32(buf, 8);
  g.cols = get_u32(buf, 12);
  const std::uint32_t T = get_u32(buf, 16);
  const std::uint64_t count = std::uint64_t(T) * g.rows * g.cols;
  const std::uint64_t expected = kHeader + 8 * count;
  if (buf.size() != expected) {
    throw DataError(path.string() + ": payload size mismatch, expected " +
                    std::to_string(expected) + " bytes, found " + std::to_string(buf.size()));
  }
  const Index pixels = Index(g.rows) * Index(g.cols);
  g.values.resize(T, pixels);
  std::size_t at = kHeader;
  for (Index t = 0; t < Index(T); ++t) {
    for (Index j = 0; j < pixels; ++j) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        bits |= std::uint64_t(static_cast<unsigned char>(buf[at + b])) << (8 * b);
      }
      at += 8;
      double v;
      std::memcpy(&v, &bits, sizeof v);
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ": non-finite value at frame " +
                        std::to_string(t) + ", pixel " + std::to_string(j));
      }
      g.values(t, j) = v;
    }
  }
  return g;
}

void save_grid(const std::filesystem::path& path, const GridDataset& grid) {
  if (grid.values.cols() != Index(grid.rows) * Index(grid.cols)) {
    throw DimensionError("save_grid: values must have rows * cols columns");
  }
  std::string buf = "CGSG";
  put_u32(buf, kGridVersion);
  put_u32(buf, grid.rows);
  put_u32(buf, grid.cols);
  put_u32(buf, grid.T());
  buf.reserve(buf.size() + 8 * static_cast<std::size_t>(grid.values.size()));
  for (Index t = 0; t < grid.values.rows(); ++t) {
    for (Index j = 0; j < grid.values.cols(); ++j) {
      const double v = grid.values(t, j);
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof v);
      for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
  }
  std::ofstream out = open_out(path, true);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256 digest failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

}  // namespace cgssm
