#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace bounty {

enum class Errc {
  // tabular
  bad_schema,
  missing_column,
  duplicate_header,
  type_mismatch,
  label_out_of_range,
  malformed_row,
  bad_weights,
  length_mismatch,
  empty_input,
  empty_group,
  // model format
  syntax_error,
  unknown_feature,
  limit_exceeded,
  version_unsupported,
  non_finite_parameter,
  invalid_bundle,
  empty_dataset,
  singular_system,
  // pdl
  invalid_hypothesis,
  bad_target,
  unknown_version,
  // competition
  rate_limited,
  unknown_team,
  duplicate_team,
  frozen,
  bad_config,
  // harness
  bad_spec,
  // plumbing
  io_error,
  replay_mismatch,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised by the CSV loader; carries the offending data row (0-based) and
// column name when they are known.
class CsvError : public Error {
 public:
  CsvError(Errc code, const std::string& message,
           std::optional<std::size_t> row, std::string column)
      : Error(code, message), row_(row), column_(std::move(column)) {}

  std::optional<std::size_t> row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::optional<std::size_t> row_;
  std::string column_;
};

}  // namespace bounty
