#ifndef DSHIFT_CSV_HPP_
#define DSHIFT_CSV_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dshift/dataset.hpp"

namespace dshift {

enum class Role { Feature, Output, Covariate, Group, Weight };

struct ColumnRole {
  Role role = Role::Feature;
  /// Covariate name, for Role::Covariate.
  std::string name;
};

/// Maps CSV header names to roles. Feature order follows the schema order.
/// Columns absent from the schema are ignored.
struct Schema {
  std::vector<std::pair<std::string, ColumnRole>> columns;
  /// 0: regression output; K >= 2: class labels in {0..K-1}; -1: infer K
  /// from the largest label.
  int num_classes = 0;

  /// Parses "feature", "output", "group", "weight" or "covariate:<name>".
  static ColumnRole parse_role(std::string_view text);
  /// Parses "col:role,col:role,...", e.g. "x0:feature,age:covariate:age".
  static Schema parse(std::string_view text, int num_classes = 0);
  /// Schema that reproduces the column layout written by write_csv.
  static Schema of(const Dataset &data);
};

/// Comma-separated, '.' decimal, header row first, "\n" or "\r\n" endings.
/// Empty cells in a mapped column are errors.
Dataset parse_csv(std::string_view text, const Schema &schema);
Dataset load_csv(const std::filesystem::path &path, const Schema &schema);

/// Columns in order: features, output, covariates, group, weight. Numbers use
/// the shortest representation that parses back to the same double.
std::string to_csv(const Dataset &data);
void write_csv(const Dataset &data, const std::filesystem::path &path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);
/// Locale-independent parse of a full cell; throws InvalidArgument on junk.
double parse_double(std::string_view cell);

/// Quotes a cell containing a comma, quote or newline.
std::string csv_escape(std::string_view cell);

/// Splits a CSV document into rows of cells; double-quoted cells may hold
/// commas and doubled quotes.
std::vector<std::vector<std::string>> read_rows(std::string_view text);
std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view contents);

} // namespace dshift

#endif /* DSHIFT_CSV_HPP_ */
