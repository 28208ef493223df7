#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bounty/schema.hpp"

namespace bounty {

// One feature's values. Numeric features use `numeric`, categorical
// features use `codes` (indices into the feature's allowed values).
struct Column {
  std::vector<double> numeric;
  std::vector<std::int32_t> codes;

  bool operator==(const Column&) const = default;
};

// Schema-typed columnar table with one real label per row. Immutable after
// construction and safe to share between threads.
class Dataset {
 public:
  Dataset(std::shared_ptr<const Schema> schema, std::vector<Column> columns,
          std::vector<double> labels);

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  std::size_t rows() const { return labels_.size(); }
  std::span<const double> labels() const { return labels_; }

  std::span<const double> numeric(std::size_t feature) const;
  std::span<const std::int32_t> codes(std::size_t feature) const;

  // Row subset in the given order.
  Dataset select(std::span<const std::size_t> rows) const;

  bool operator==(const Dataset& other) const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<Column> columns_;
  std::vector<double> labels_;
};

// Row-at-a-time builder used by loaders and generators. Values are checked
// against the schema as they are appended.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(std::shared_ptr<const Schema> schema);

  void reserve(std::size_t rows);
  void set_numeric(std::size_t feature, double value);
  void set_category(std::size_t feature, std::int32_t code);
  // Commits the pending row. Throws LabelOutOfRange when outside the schema range.
  void finish_row(double label);

  std::size_t rows() const { return labels_.size(); }
  Dataset build() &&;

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<Column> columns_;
  std::vector<double> labels_;
  std::vector<double> pending_numeric_;
  std::vector<std::int32_t> pending_codes_;
  std::vector<bool> pending_set_;
};

// RFC-4180 CSV with a header row naming every schema feature and the label,
// in any order. Columns the schema does not mention are ignored.
Dataset load_csv(std::shared_ptr<const Schema> schema, std::string_view bytes);
Dataset load_csv_file(std::shared_ptr<const Schema> schema, const std::string& path);

// Header in schema order followed by the label column.
std::string write_csv(const Dataset& dataset);

}  // namespace bounty
