#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "gradlab/spectral.hpp"

namespace gradlab {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Strict parse of a full token; throws ConfigError naming `what`.
double parse_double(std::string_view token, std::string_view what = "number");

/// Dense matrix file: first token n, then n*n whitespace-separated entries
/// in row-major order. Throws IoError on read failure, ConfigError on bad
/// content.
DenseProblem read_matrix_file(const std::filesystem::path& path);

/// Writes text to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// A trajectory CSV read back: header names and one row of cells per line.
/// Empty cells are NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::istream& in);

}  // namespace gradlab
