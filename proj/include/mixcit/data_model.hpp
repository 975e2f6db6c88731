#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mixcit {

enum class ColumnKind { Continuous, DiscreteNumeric, Categorical };

// Continuous and DiscreteNumeric share distance semantics; Categorical
// carries code identity only.
inline bool is_numeric(ColumnKind k) { return k != ColumnKind::Categorical; }

// CLI type codes: "c", "dn", "cat"
std::string_view column_kind_code(ColumnKind k);
ColumnKind column_kind_from_code(std::string_view code);

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  // Categorical columns hold non-negative integer codes stored as doubles;
  // numeric columns hold finite reals.
  std::vector<double> values;
};

// Immutable after construction; safe to share across threads.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Column> columns);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }
  const Column& column(std::size_t c) const { return columns_.at(c); }
  const std::vector<Column>& columns() const { return columns_; }

 private:
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
};

struct VariablePartition {
  std::vector<std::size_t> x_cols;
  std::vector<std::size_t> y_cols;
  std::vector<std::size_t> z_cols;  // may be empty

  // disjoint, in range, x and y non-empty
  void validate(const Dataset& ds) const;
};

enum class Preprocessing { None, Standardize, ScaleToUnit, RankTransform };

std::string_view preprocessing_name(Preprocessing p);
Preprocessing preprocessing_from_name(std::string_view name);

// CSV with a header row; schema length must match the column count.
// Categorical cells must parse as non-negative integers, numeric cells as
// finite reals. Errors carry the file line and column of the offense.
Dataset load_dataset(const std::string& path,
                     const std::vector<ColumnKind>& schema);

void save_dataset_csv(const Dataset& ds, const std::string& path);

// {"columns": [{"name", "kind", "values"}...]} mirror of the CSV layout
void save_dataset_json(const Dataset& ds, const std::string& path);

// Transforms continuous columns only; Categorical and DiscreteNumeric pass
// through unchanged. Standardize / ScaleToUnit reject constant columns.
Dataset apply_preprocessing(const Dataset& ds, Preprocessing p);

}  // namespace mixcit
