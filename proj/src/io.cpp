#include "gradlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gradlab/errors.hpp"

namespace gradlab {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

double parse_double(std::string_view token, std::string_view what) {
  if (token == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
    throw ConfigError(std::string(what) + ": cannot parse '" + std::string(token) + "' as a number");
  }
  return value;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

DenseProblem read_matrix_file(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string token;
  if (!(in >> token)) throw ConfigError(path.string() + ": empty matrix file");
  const double n_value = parse_double(token, path.string() + ": dimension");
  if (!(n_value >= 1.0) || n_value != std::floor(n_value)) {
    throw ConfigError(path.string() + ": first entry must be a positive integer dimension");
  }
  DenseProblem dense;
  dense.n = static_cast<std::size_t>(n_value);
  dense.matrix.reserve(dense.n * dense.n);
  while (in >> token) {
    dense.matrix.push_back(parse_double(token, path.string() + ": entry " + std::to_string(dense.matrix.size())));
  }
  if (dense.matrix.size() != dense.n * dense.n) {
    throw ConfigError(path.string() + ": expected " + std::to_string(dense.n * dense.n) + " entries, found " +
                      std::to_string(dense.matrix.size()));
  }
  return dense;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw StructuralError("CSV has no column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& text) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(text);
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (!text.empty() && text.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw StructuralError("CSV is empty");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) throw StructuralError("CSV row has the wrong number of cells");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      row.push_back(c.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(c, "CSV cell"));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace gradlab
