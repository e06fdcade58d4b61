#include "robust_smix/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "robust_smix/errors.hpp"

namespace robust_smix {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool parse_double(const std::string& field, double& out) {
  const std::string f = trim(field);
  if (f.empty()) return false;
  const char* begin = f.data();
  const char* end = f.data() + f.size();
  if (*begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

MaskedDataset parse_csv(std::istream& in, const std::set<std::string>& missing_markers) {
  std::string line;
  if (!next_line(in, line)) throw ParseError("empty input: missing header row", 1);
  std::vector<std::string> names = split_line(line);
  for (auto& n : names) n = trim(n);
  const std::size_t d = names.size();

  std::vector<std::vector<double>> values;
  std::vector<std::vector<bool>> mask;
  std::size_t lineno = 1;
  while (next_line(in, line)) {
    ++lineno;
    // With one feature an empty line is a missing cell, not a blank line.
    if (line.empty() && d > 1) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != d) {
      throw ParseError(fmt::format("line {}: expected {} fields, found {}", lineno, d, cells.size()), lineno);
    }
    std::vector<double> row(d);
    std::vector<bool> obs(d);
    for (std::size_t c = 0; c < d; ++c) {
      const std::string cell = trim(cells[c]);
      if (missing_markers.count(cell)) {
        obs[c] = false;
        row[c] = 0.0;
        continue;
      }
      double v = 0.0;
      if (!parse_double(cell, v) || !std::isfinite(v)) {
        throw ParseError(fmt::format("line {}, column {}: cannot parse '{}'", lineno, c + 1, cell), lineno, c + 1);
      }
      obs[c] = true;
      row[c] = v;
    }
    values.push_back(std::move(row));
    mask.push_back(std::move(obs));
  }

  const auto J = static_cast<Eigen::Index>(values.size());
  Matrix m(J, static_cast<Eigen::Index>(d));
  BoolMatrix b(J, static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < J; ++j) {
    for (std::size_t c = 0; c < d; ++c) {
      m(j, static_cast<Eigen::Index>(c)) = values[static_cast<std::size_t>(j)][c];
      b(j, static_cast<Eigen::Index>(c)) = mask[static_cast<std::size_t>(j)][c];
    }
  }
  return MaskedDataset(std::move(m), std::move(b), std::move(names));
}

MaskedDataset load_csv(const std::string& path, const std::set<std::string>& missing_markers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_csv(in, missing_markers);
}

void save_csv(const std::string& path, const MaskedDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const auto& names = data.names();
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  for (Eigen::Index j = 0; j < data.rows(); ++j) {
    for (Eigen::Index c = 0; c < data.dim(); ++c) {
      if (c) out << ',';
      if (data.observed(j, c)) out << format_double(data.value(j, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError("missing column '" + name + "'", 1);
}

Table read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  Table t;
  std::string line;
  if (!next_line(in, line)) throw ParseError(path + ": empty file", 1);
  t.header = split_line(line);
  std::size_t lineno = 1;
  while (next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw ParseError(fmt::format("{} line {}: expected {} fields, found {}", path, lineno, t.header.size(),
                                   cells.size()),
                       lineno);
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

void write_table(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace robust_smix
