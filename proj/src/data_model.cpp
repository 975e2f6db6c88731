#include "mixcit/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mixcit/errors.hpp"

namespace mixcit {

namespace {

std::string quote(std::string_view s) { return "'" + std::string(s) + "'"; }

void check_cell(double v, ColumnKind kind, const std::string& where) {
  if (!std::isfinite(v))
    throw DataError(where + ": value must be finite");
  if (kind == ColumnKind::Categorical) {
    if (v < 0.0 || v != std::floor(v))
      throw DataError(where + ": categorical code must be a non-negative integer");
  }
}

std::string cell_location(std::size_t line, const std::string& col_name) {
  std::ostringstream os;
  os << "line " << line << ", column " << quote(col_name);
  return os.str();
}

double parse_double(const std::string& cell, const std::string& where) {
  if (cell.empty()) throw DataError(where + ": empty cell");
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &consumed);
  } catch (const std::exception&) {
    throw DataError(where + ": cannot parse " + quote(cell) + " as a number");
  }
  while (consumed < cell.size() && std::isspace(static_cast<unsigned char>(cell[consumed])))
    ++consumed;
  if (consumed != cell.size())
    throw DataError(where + ": cannot parse " + quote(cell) + " as a number");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

void format_value(std::string& out, double v, ColumnKind kind) {
  char buf[40];
  if (kind == ColumnKind::Categorical) {
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  } else {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
  }
  out += buf;
}

}  // namespace

std::string_view column_kind_code(ColumnKind k) {
  switch (k) {
    case ColumnKind::Continuous: return "c";
    case ColumnKind::DiscreteNumeric: return "dn";
    case ColumnKind::Categorical: return "cat";
  }
  return "?";
}

ColumnKind column_kind_from_code(std::string_view code) {
  if (code == "c") return ColumnKind::Continuous;
  if (code == "dn") return ColumnKind::DiscreteNumeric;
  if (code == "cat") return ColumnKind::Categorical;
  throw ConfigError("unknown column type code " + quote(code) +
                    " (expected c, dn or cat)");
}

std::string_view preprocessing_name(Preprocessing p) {
  switch (p) {
    case Preprocessing::None: return "none";
    case Preprocessing::Standardize: return "std";
    case Preprocessing::ScaleToUnit: return "scale";
    case Preprocessing::RankTransform: return "rank";
  }
  return "?";
}

Preprocessing preprocessing_from_name(std::string_view name) {
  if (name == "none") return Preprocessing::None;
  if (name == "std") return Preprocessing::Standardize;
  if (name == "scale") return Preprocessing::ScaleToUnit;
  if (name == "rank") return Preprocessing::RankTransform;
  throw ConfigError("unknown preprocessing " + quote(name) +
                    " (expected none, std, scale or rank)");
}

Dataset::Dataset(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw DataError("dataset needs at least one column");
  n_rows_ = columns_[0].values.size();
  if (n_rows_ == 0) throw DataError("dataset needs at least one row");

  std::set<std::string> names;
  for (const Column& col : columns_) {
    if (col.values.size() != n_rows_)
      throw DataError("column " + quote(col.name) + " has " +
                      std::to_string(col.values.size()) + " rows, expected " +
                      std::to_string(n_rows_));
    if (!names.insert(col.name).second)
      throw DataError("duplicate column name " + quote(col.name));
    for (std::size_t i = 0; i < col.values.size(); ++i)
      check_cell(col.values[i], col.kind,
                 "column " + quote(col.name) + ", row " + std::to_string(i));
  }
}

void VariablePartition::validate(const Dataset& ds) const {
  if (x_cols.empty() || y_cols.empty())
    throw ConfigError("partition: x and y column lists must be non-empty");
  std::set<std::size_t> seen;
  auto check_group = [&](const std::vector<std::size_t>& group, const char* tag) {
    for (std::size_t c : group) {
      if (c >= ds.n_cols())
        throw ConfigError(std::string("partition: ") + tag + " column index " +
                          std::to_string(c) + " out of range");
      if (!seen.insert(c).second)
        throw ConfigError("partition: column index " + std::to_string(c) +
                          " appears in more than one group");
    }
  };
  check_group(x_cols, "x");
  check_group(y_cols, "y");
  check_group(z_cols, "z");
}

Dataset load_dataset(const std::string& path,
                     const std::vector<ColumnKind>& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + quote(path));

  std::string line;
  if (!std::getline(in, line)) throw DataError(quote(path) + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() != schema.size())
    throw DataError(quote(path) + ": schema has " +
                    std::to_string(schema.size()) + " kinds but the file has " +
                    std::to_string(header.size()) + " columns");

  std::vector<Column> cols(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    cols[c].name = header[c];
    cols[c].kind = schema[c];
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != cols.size())
      throw DataError(quote(path) + ", line " + std::to_string(line_no) +
                      ": expected " + std::to_string(cols.size()) +
                      " fields, got " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::string where =
          quote(path) + ", " + cell_location(line_no, cols[c].name);
      const double v = parse_double(fields[c], where);
      check_cell(v, cols[c].kind, where);
      cols[c].values.push_back(v);
    }
  }
  return Dataset(std::move(cols));
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + quote(path));
  std::string line;
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    if (c) line += ',';
    line += ds.column(c).name;
  }
  line += '\n';
  out << line;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    line.clear();
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
      if (c) line += ',';
      format_value(line, ds.column(c).values[i], ds.column(c).kind);
    }
    line += '\n';
    out << line;
  }
}

void save_dataset_json(const Dataset& ds, const std::string& path) {
  nlohmann::json doc;
  doc["n_rows"] = ds.n_rows();
  doc["columns"] = nlohmann::json::array();
  for (const Column& col : ds.columns()) {
    nlohmann::json jc;
    jc["name"] = col.name;
    jc["kind"] = std::string(column_kind_code(col.kind));
    jc["values"] = col.values;
    doc["columns"].push_back(std::move(jc));
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + quote(path));
  out << doc.dump(2) << '\n';
}

namespace {

std::vector<double> rank_transform(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    // ranks are 1-based; ties take the average rank of their block
    const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) out[order[t]] = rank / static_cast<double>(n);
    i = j + 1;
  }
  return out;
}

}  // namespace

Dataset apply_preprocessing(const Dataset& ds, Preprocessing p) {
  if (p == Preprocessing::None) return ds;

  std::vector<Column> cols = ds.columns();
  for (Column& col : cols) {
    if (col.kind != ColumnKind::Continuous) continue;
    const std::size_t n = col.values.size();
    switch (p) {
      case Preprocessing::Standardize: {
        double mean = 0.0;
        for (double v : col.values) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : col.values) ss += (v - mean) * (v - mean);
        if (n < 2 || ss == 0.0)
          throw DataError("standardize: column " + quote(col.name) +
                          " is constant");
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        for (double& v : col.values) v = (v - mean) / sd;
        break;
      }
      case Preprocessing::ScaleToUnit: {
        const auto [lo_it, hi_it] =
            std::minmax_element(col.values.begin(), col.values.end());
        const double lo = *lo_it, hi = *hi_it;
        if (lo == hi)
          throw DataError("scale: column " + quote(col.name) + " is constant");
        for (double& v : col.values) v = (v - lo) / (hi - lo);
        break;
      }
      case Preprocessing::RankTransform:
        col.values = rank_transform(col.values);
        break;
      case Preprocessing::None:
        break;
    }
  }
  return Dataset(std::move(cols));
}

}  // namespace mixcit
