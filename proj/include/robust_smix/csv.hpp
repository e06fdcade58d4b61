#pragma once

#include <istream>
#include <set>
#include <string>
#include <vector>

#include "robust_smix/model.hpp"

namespace robust_smix {

inline const std::set<std::string> kDefaultMissingMarkers = {"", "NaN", "NA"};

/// Header row of feature names, then one numeric row per observation. Cells
/// equal to a marker become missing. Throws ParseError on ragged rows
/// (line number) or unparseable cells (line and 1-based column).
MaskedDataset parse_csv(std::istream& in, const std::set<std::string>& missing_markers = kDefaultMissingMarkers);
MaskedDataset load_csv(const std::string& path, const std::set<std::string>& missing_markers = kDefaultMissingMarkers);

/// Missing cells are written as empty fields; numbers with 17 significant digits.
void save_csv(const std::string& path, const MaskedDataset& data);

/// Raw string table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ParseError when absent.
  std::size_t column(const std::string& name) const;
};

Table read_table(const std::string& path);
void write_table(const std::string& path, const Table& table);

/// Locale-independent double parsing of a whole field.
bool parse_double(const std::string& field, double& out);
std::string format_double(double v);

}  // namespace robust_smix
