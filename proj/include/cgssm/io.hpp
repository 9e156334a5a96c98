#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cgssm/types.hpp"

namespace cgssm {

/// n x p numeric table keyed by a time index column.
struct SeriesData {
  std::string index_name = "t";
  std::vector<std::string> index;  // n time labels, unique
  std::vector<std::string> names;  // p column names
  Matrix values;                   // n x p
};

/// Reads a header row, then rows of `time,v1,...,vp`. Throws DataError
/// naming the file and line on ragged rows, non-numeric cells or repeated
/// time labels.
SeriesData load_csv(const std::filesystem::path& path);

/// Writes `data` with every value at 17 significant digits, so that
/// load_csv reproduces it bit for bit.
void save_csv(const std::filesystem::path& path, const SeriesData& data);

/// Shortest-safe text of a double: 17 significant digits.
std::string format_double(double v);

/// Generic table writer: header, then one line per row of `cells`.
void write_table(const std::filesystem::path& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& cells);

/// Spatial grid observed over time.
struct GridDataset {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  Matrix values;  // T x (rows * cols), pixel index r * cols + c
  std::uint32_t T() const { return static_cast<std::uint32_t>(values.rows()); }
};

inline constexpr std::uint32_t kGridVersion = 1;

/// Binary layout: "CGSG", u32 version, u32 rows, u32 cols, u32 T, then
/// T * rows * cols little-endian float64, time-major and row-major within
/// each frame.
GridDataset load_grid(const std::filesystem::path& path);
void save_grid(const std::filesystem::path& path, const GridDataset& grid);

/// Reads a whole file as bytes; DataError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(const std::string& bytes);

}  // namespace cgssm
