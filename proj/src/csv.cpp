#include "dshift/csv.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "dshift/error.hpp"

namespace dshift {

ColumnRole Schema::parse_role(std::string_view text) {
  if (text == "feature") return {Role::Feature, {}};
  if (text == "output") return {Role::Output, {}};
  if (text == "group") return {Role::Group, {}};
  if (text == "weight") return {Role::Weight, {}};
  constexpr std::string_view prefix = "covariate:";
  if (text.substr(0, prefix.size()) == prefix && text.size() > prefix.size()) {
    return {Role::Covariate, std::string(text.substr(prefix.size()))};
  }
  if (text == "covariate") {
    throw InvalidArgument("covariate role needs a name: covariate:<name>");
  }
  throw InvalidArgument("unknown column role '" + std::string(text) + "'");
}

Schema Schema::parse(std::string_view text, int num_classes) {
  Schema schema;
  schema.num_classes = num_classes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const auto item = text.substr(start, end - start);
    start = end + 1;
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw InvalidArgument("schema entry '" + std::string(item) +
                            "' must be column:role");
    }
    schema.columns.emplace_back(std::string(item.substr(0, colon)),
                                parse_role(item.substr(colon + 1)));
  }
  if (schema.columns.empty()) throw InvalidArgument("empty schema");
  return schema;
}

Schema Schema::of(const Dataset &data) {
  Schema schema;
  schema.num_classes = data.num_classes;
  for (const auto &name : data.column_names) {
    schema.columns.emplace_back(name, ColumnRole{Role::Feature, {}});
  }
  if (data.outputs) {
    schema.columns.emplace_back(data.output_name, ColumnRole{Role::Output, {}});
  }
  for (const auto &c : data.covariates) {
    schema.columns.emplace_back(c.name, ColumnRole{Role::Covariate, c.name});
  }
  if (data.groups) {
    schema.columns.emplace_back(data.group_name, ColumnRole{Role::Group, {}});
  }
  if (data.weights) {
    schema.columns.emplace_back(data.weight_name, ColumnRole{Role::Weight, {}});
  }
  return schema;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view cell) {
  // from_chars rejects a leading '+', which is legal in scientific output.
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || res.ec != std::errc() ||
      res.ptr != cell.data() + cell.size()) {
    throw InvalidArgument("non-numeric cell '" + std::string(cell) + "'");
  }
  return value;
}

std::vector<std::vector<std::string>> read_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c != '"') {
          cells.back() += c;
        } else if (i + 1 < line.size() && line[i + 1] == '"') {
          cells.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.emplace_back();
      } else {
        cells.back() += c;
      }
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

Dataset parse_csv(std::string_view text, const Schema &schema) {
  const auto rows = read_rows(text);
  if (rows.empty()) throw InvalidArgument("CSV has no header row");
  const auto &header = rows.front();
  std::map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < header.size(); ++j) position[header[j]] = j;

  const auto n = static_cast<Index>(rows.size() - 1);
  if (n == 0) throw InvalidArgument("CSV has zero data rows");

  auto column_index = [&](const std::string &name) {
    const auto it = position.find(name);
    if (it == position.end()) {
      throw InvalidArgument("column '" + name + "' named in schema is absent");
    }
    return it->second;
  };
  auto cell = [&](Index i, std::size_t j) -> const std::string & {
    const auto &row = rows[static_cast<std::size_t>(i) + 1];
    if (row.size() != header.size()) {
      throw InvalidArgument("row " + std::to_string(i + 1) + " has " +
                            std::to_string(row.size()) + " cells, header has " +
                            std::to_string(header.size()));
    }
    if (row[j].empty()) {
      throw InvalidArgument("empty cell in column '" + header[j] + "' at row " +
                            std::to_string(i + 1));
    }
    return row[j];
  };
  auto numeric_column = [&](std::size_t j) {
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) {
      try {
        v(i) = parse_double(cell(i, j));
      } catch (const InvalidArgument &e) {
        throw InvalidArgument(std::string(e.what()) + " in column '" +
                              header[j] + "' at row " + std::to_string(i + 1));
      }
    }
    return v;
  };

  Dataset d;
  std::vector<std::size_t> feature_cols;
  for (const auto &[name, role] : schema.columns) {
    const auto j = column_index(name);
    switch (role.role) {
    case Role::Feature:
      feature_cols.push_back(j);
      d.column_names.push_back(name);
      break;
    case Role::Output:
      if (d.outputs) throw InvalidArgument("schema maps two output columns");
      d.outputs = numeric_column(j);
      d.output_name = name;
      break;
    case Role::Covariate:
      d.set_covariate(role.name, numeric_column(j));
      break;
    case Role::Group: {
      if (d.groups) throw InvalidArgument("schema maps two group columns");
      std::vector<std::string> g(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = cell(i, j);
      d.groups = std::move(g);
      d.group_name = name;
      break;
    }
    case Role::Weight:
      if (d.weights) throw InvalidArgument("schema maps two weight columns");
      d.weights = numeric_column(j);
      d.weight_name = name;
      break;
    }
  }
  d.features.resize(n, static_cast<Index>(feature_cols.size()));
  for (std::size_t k = 0; k < feature_cols.size(); ++k) {
    d.features.col(static_cast<Index>(k)) = numeric_column(feature_cols[k]);
  }
  if (d.outputs && schema.num_classes != 0) {
    if (schema.num_classes < 0) {
      const double top = d.outputs->size() ? d.outputs->maxCoeff() : 0.0;
      d.num_classes = std::max(2, static_cast<int>(top) + 1);
    } else {
      d.num_classes = schema.num_classes;
    }
  }
  d.validate();
  return d;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Dataset load_csv(const std::filesystem::path &path, const Schema &schema) {
  if (!std::filesystem::exists(path)) {
    throw IoError("missing file '" + path.string() + "'");
  }
  return parse_csv(read_file(path), schema);
}

std::string to_csv(const Dataset &data) {
  std::string out;
  std::vector<std::string> header = data.column_names;
  if (data.outputs) header.push_back(data.output_name);
  for (const auto &c : data.covariates) header.push_back(c.name);
  if (data.groups) header.push_back(data.group_name);
  if (data.weights) header.push_back(data.weight_name);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out += ',';
    out += header[j];
  }
  out += '\n';
  for (Index i = 0; i < data.rows(); ++i) {
    bool first = true;
    auto put = [&](std::string_view s) {
      if (!first) out += ',';
      out += s;
      first = false;
    };
    for (Index j = 0; j < data.cols(); ++j) put(format_double(data.features(i, j)));
    if (data.outputs) put(format_double((*data.outputs)(i)));
    for (const auto &c : data.covariates) put(format_double(c.values(i)));
    if (data.groups) put((*data.groups)[static_cast<std::size_t>(i)]);
    if (data.weights) put(format_double((*data.weights)(i)));
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset &data, const std::filesystem::path &path) {
  write_file(path, to_csv(data));
}

std::string csv_escape(std::string_view cell) {
  if (cell.find_first_of(",\"\n") == std::string_view::npos) return std::string(cell);
  std::string q = "\"";
  for (char c : cell) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

} // namespace dshift
