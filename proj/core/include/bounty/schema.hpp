#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bounty {

enum class FeatureKind { numeric, categorical };

std::string_view to_string(FeatureKind kind);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  // Only categorical features carry a value set; its order defines the
  // integer codes used in columnar storage.
  std::vector<std::string> allowed_values;

  bool operator==(const FeatureSpec&) const = default;
};

struct LabelSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;

  bool operator==(const LabelSpec&) const = default;
};

// Ordered feature list plus the label column. Immutable once built; the
// constructor enforces the invariants and throws Errc::bad_schema.
class Schema {
 public:
  Schema(std::vector<FeatureSpec> features, LabelSpec label);

  const std::vector<FeatureSpec>& features() const { return features_; }
  const FeatureSpec& feature(std::size_t index) const { return features_.at(index); }
  std::size_t feature_count() const { return features_.size(); }
  const LabelSpec& label() const { return label_; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::optional<std::int32_t> category_code(std::size_t feature,
                                            std::string_view value) const;

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& doc);
  static Schema load(const std::string& path);

  bool operator==(const Schema&) const = default;

 private:
  std::vector<FeatureSpec> features_;
  LabelSpec label_;
};

}  // namespace bounty
