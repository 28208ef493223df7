#include "bounty/dataset.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "bounty/error.hpp"
#include "bounty/numeric_text.hpp"

namespace bounty {

Dataset::Dataset(std::shared_ptr<const Schema> schema, std::vector<Column> columns,
                 std::vector<double> labels)
    : schema_(std::move(schema)), columns_(std::move(columns)), labels_(std::move(labels)) {
  if (!schema_) throw Error(Errc::bad_schema, "dataset requires a schema");
  if (columns_.size() != schema_->feature_count()) {
    throw Error(Errc::length_mismatch, "column count does not match schema");
  }
  const auto n = labels_.size();
  const auto& label = schema_->label();
  for (std::size_t r = 0; r < n; ++r) {
    if (!(labels_[r] >= label.lo && labels_[r] <= label.hi)) {
      throw Error(Errc::label_out_of_range,
                  "label at row " + std::to_string(r) + " is outside the schema range");
    }
  }
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    const auto& spec = schema_->feature(f);
    const auto& col = columns_[f];
    if (spec.kind == FeatureKind::numeric) {
      if (col.numeric.size() != n || !col.codes.empty()) {
        throw Error(Errc::length_mismatch, "numeric column '" + spec.name + "' has wrong length");
      }
      for (double v : col.numeric) {
        if (!std::isfinite(v)) {
          throw Error(Errc::type_mismatch, "non-finite value in column '" + spec.name + "'");
        }
      }
    } else {
      if (col.codes.size() != n || !col.numeric.empty()) {
        throw Error(Errc::length_mismatch,
                    "categorical column '" + spec.name + "' has wrong length");
      }
      const auto limit = static_cast<std::int32_t>(spec.allowed_values.size());
      for (auto c : col.codes) {
        if (c < 0 || c >= limit) {
          throw Error(Errc::type_mismatch, "category code out of range in '" + spec.name + "'");
        }
      }
    }
  }
}

std::span<const double> Dataset::numeric(std::size_t feature) const {
  return columns_.at(feature).numeric;
}

std::span<const std::int32_t> Dataset::codes(std::size_t feature) const {
  return columns_.at(feature).codes;
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  std::vector<Column> columns(columns_.size());
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    const auto& src = columns_[f];
    auto& dst = columns[f];
    if (schema_->feature(f).kind == FeatureKind::numeric) {
      dst.numeric.reserve(rows.size());
      for (auto r : rows) dst.numeric.push_back(src.numeric.at(r));
    } else {
      dst.codes.reserve(rows.size());
      for (auto r : rows) dst.codes.push_back(src.codes.at(r));
    }
  }
  std::vector<double> labels;
  labels.reserve(rows.size());
  for (auto r : rows) labels.push_back(labels_.at(r));
  return Dataset(schema_, std::move(columns), std::move(labels));
}

bool Dataset::operator==(const Dataset& other) const {
  return *schema_ == *other.schema_ && columns_ == other.columns_ && labels_ == other.labels_;
}

DatasetBuilder::DatasetBuilder(std::shared_ptr<const Schema> schema)
    : schema_(std::move(schema)),
      columns_(schema_->feature_count()),
      pending_numeric_(schema_->feature_count(), 0.0),
      pending_codes_(schema_->feature_count(), 0),
      pending_set_(schema_->feature_count(), false) {}

void DatasetBuilder::reserve(std::size_t rows) {
  labels_.reserve(rows);
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    if (schema_->feature(f).kind == FeatureKind::numeric) {
      columns_[f].numeric.reserve(rows);
    } else {
      columns_[f].codes.reserve(rows);
    }
  }
}

void DatasetBuilder::set_numeric(std::size_t feature, double value) {
  if (schema_->feature(feature).kind != FeatureKind::numeric || !std::isfinite(value)) {
    throw Error(Errc::type_mismatch, "bad numeric value for '" + schema_->feature(feature).name + "'");
  }
  pending_numeric_[feature] = value;
  pending_set_[feature] = true;
}

void DatasetBuilder::set_category(std::size_t feature, std::int32_t code) {
  const auto& spec = schema_->feature(feature);
  if (spec.kind != FeatureKind::categorical || code < 0 ||
      code >= static_cast<std::int32_t>(spec.allowed_values.size())) {
    throw Error(Errc::type_mismatch, "bad category code for '" + spec.name + "'");
  }
  pending_codes_[feature] = code;
  pending_set_[feature] = true;
}

void DatasetBuilder::finish_row(double label) {
  const auto& range = schema_->label();
  if (!(label >= range.lo && label <= range.hi)) {
    throw Error(Errc::label_out_of_range,
                "label at row " + std::to_string(labels_.size()) + " is outside the schema range");
  }
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    if (!pending_set_[f]) {
      throw Error(Errc::missing_column, "row is missing feature '" + schema_->feature(f).name + "'");
    }
    if (schema_->feature(f).kind == FeatureKind::numeric) {
      columns_[f].numeric.push_back(pending_numeric_[f]);
    } else {
      columns_[f].codes.push_back(pending_codes_[f]);
    }
    pending_set_[f] = false;
  }
  labels_.push_back(label);
}

Dataset DatasetBuilder::build() && {
  return Dataset(std::move(schema_), std::move(columns_), std::move(labels_));
}

namespace {

// Splits RFC-4180 records. Quoted fields may contain commas, doubled quotes
// and line breaks; both LF and CRLF terminate records.
class CsvReader {
 public:
  explicit CsvReader(std::string_view text) : text_(text) {
    // UTF-8 byte-order mark.
    if (text_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
  }

  bool at_end() const { return pos_ >= text_.size(); }
  std::size_t line() const { return line_; }

  // Returns false at end of input. Throws on an unterminated quote.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (at_end()) return false;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            field.push_back('"');
            pos_ += 2;
            continue;
          }
          quoted = false;
          ++pos_;
          continue;
        }
        if (c == '\n') ++line_;
        field.push_back(c);
        ++pos_;
        continue;
      }
      if (c == '"' && field.empty() && !field_was_quoted) {
        quoted = true;
        field_was_quoted = true;
        ++pos_;
        continue;
      }
      if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        ++pos_;
        continue;
      }
      if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
        pos_ += 2;
        ++line_;
        fields.push_back(std::move(field));
        return true;
      }
      if (c == '\n') {
        ++pos_;
        ++line_;
        fields.push_back(std::move(field));
        return true;
      }
      field.push_back(c);
      ++pos_;
    }
    if (quoted) {
      throw CsvError(Errc::malformed_row, "unterminated quoted field near line " +
                                              std::to_string(line_), std::nullopt, "");
    }
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::string quote_if_needed(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Dataset load_csv(std::shared_ptr<const Schema> schema, std::string_view bytes) {
  CsvReader reader(bytes);
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw CsvError(Errc::missing_column, "CSV input has no header row", std::nullopt,
                   schema->label().name);
  }

  // Map each schema feature (and the label) to its position in the header.
  constexpr std::size_t kUnmapped = static_cast<std::size_t>(-1);
  std::vector<std::size_t> feature_pos(schema->feature_count(), kUnmapped);
  std::size_t label_pos = kUnmapped;
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& name = fields[i];
    for (const auto& s : seen) {
      if (s == name) {
        throw CsvError(Errc::duplicate_header, "duplicate header '" + name + "'", std::nullopt,
                       name);
      }
    }
    seen.push_back(name);
    if (name == schema->label().name) {
      label_pos = i;
    } else if (auto f = schema->find(name)) {
      feature_pos[*f] = i;
    }
  }
  for (std::size_t f = 0; f < feature_pos.size(); ++f) {
    if (feature_pos[f] == kUnmapped) {
      const auto& name = schema->feature(f).name;
      throw CsvError(Errc::missing_column, "missing column '" + name + "'", std::nullopt, name);
    }
  }
  if (label_pos == kUnmapped) {
    const auto& name = schema->label().name;
    throw CsvError(Errc::missing_column, "missing label column '" + name + "'", std::nullopt,
                   name);
  }

  const std::size_t width = fields.size();
  DatasetBuilder builder(schema);
  std::size_t row = 0;
  while (reader.next(fields)) {
    // A trailing blank line is not a record.
    if (fields.size() == 1 && fields[0].empty() && reader.at_end()) break;
    if (fields.size() != width) {
      throw CsvError(Errc::malformed_row,
                     "data row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                         " fields, expected " + std::to_string(width),
                     row, "");
    }
    for (std::size_t f = 0; f < feature_pos.size(); ++f) {
      const auto& spec = schema->feature(f);
      const auto& text = fields[feature_pos[f]];
      if (spec.kind == FeatureKind::numeric) {
        auto value = parse_number(text);
        if (!value) {
          throw CsvError(Errc::type_mismatch,
                         "data row " + std::to_string(row) + ", column '" + spec.name +
                             "': '" + text + "' is not a finite number",
                         row, spec.name);
        }
        builder.set_numeric(f, *value);
      } else {
        auto code = schema->category_code(f, text);
        if (!code) {
          throw CsvError(Errc::type_mismatch,
                         "data row " + std::to_string(row) + ", column '" + spec.name +
                             "': '" + text + "' is not an allowed value",
                         row, spec.name);
        }
        builder.set_category(f, *code);
      }
    }
    const auto& label_text = fields[label_pos];
    auto label = parse_number(label_text);
    if (!label) {
      throw CsvError(Errc::type_mismatch,
                     "data row " + std::to_string(row) + ", label '" + label_text +
                         "' is not a finite number",
                     row, schema->label().name);
    }
    const auto& range = schema->label();
    if (!(*label >= range.lo && *label <= range.hi)) {
      throw CsvError(Errc::label_out_of_range,
                     "data row " + std::to_string(row) + ": label " + label_text +
                         " is outside [" + format_number(range.lo) + ", " +
                         format_number(range.hi) + "]",
                     row, range.name);
    }
    builder.finish_row(*label);
    ++row;
  }
  return std::move(builder).build();
}

Dataset load_csv_file(std::shared_ptr<const Schema> schema, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open CSV file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_csv(std::move(schema), buffer.str());
}

std::string write_csv(const Dataset& dataset) {
  const auto& schema = dataset.schema();
  std::string out;
  for (const auto& f : schema.features()) {
    out += quote_if_needed(f.name);
    out.push_back(',');
  }
  out += quote_if_needed(schema.label().name);
  out.push_back('\n');
  const auto labels = dataset.labels();
  for (std::size_t r = 0; r < dataset.rows(); ++r) {
    for (std::size_t f = 0; f < schema.feature_count(); ++f) {
      const auto& spec = schema.feature(f);
      if (spec.kind == FeatureKind::numeric) {
        out += format_number(dataset.numeric(f)[r]);
      } else {
        out += quote_if_needed(spec.allowed_values[static_cast<std::size_t>(dataset.codes(f)[r])]);
      }
      out.push_back(',');
    }
    out += format_number(labels[r]);
    out.push_back('\n');
  }
  return out;
}

}  // namespace bounty
