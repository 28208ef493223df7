#include "bounty/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bounty/error.hpp"

namespace bounty {

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::numeric ? "numeric" : "categorical";
}

Schema::Schema(std::vector<FeatureSpec> features, LabelSpec label)
    : features_(std::move(features)), label_(std::move(label)) {
  std::set<std::string, std::less<>> names;
  for (const auto& f : features_) {
    if (f.name.empty()) throw Error(Errc::bad_schema, "feature name is empty");
    if (!names.insert(f.name).second) {
      throw Error(Errc::bad_schema, "duplicate feature name '" + f.name + "'");
    }
    if (f.kind == FeatureKind::categorical) {
      if (f.allowed_values.empty()) {
        throw Error(Errc::bad_schema,
                    "categorical feature '" + f.name + "' has no allowed values");
      }
      std::set<std::string> seen(f.allowed_values.begin(), f.allowed_values.end());
      if (seen.size() != f.allowed_values.size()) {
        throw Error(Errc::bad_schema,
                    "categorical feature '" + f.name + "' repeats an allowed value");
      }
    } else if (!f.allowed_values.empty()) {
      throw Error(Errc::bad_schema,
                  "numeric feature '" + f.name + "' cannot list allowed values");
    }
  }
  if (label_.name.empty()) throw Error(Errc::bad_schema, "label name is empty");
  if (names.contains(label_.name)) {
    throw Error(Errc::bad_schema, "label name collides with a feature name");
  }
  if (!std::isfinite(label_.lo) || !std::isfinite(label_.hi) || !(label_.lo < label_.hi)) {
    throw Error(Errc::bad_schema, "label range must satisfy lo < hi");
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::int32_t> Schema::category_code(std::size_t feature,
                                                  std::string_view value) const {
  const auto& values = features_.at(feature).allowed_values;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == value) return static_cast<std::int32_t>(i);
  }
  return std::nullopt;
}

nlohmann::json Schema::to_json() const {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : features_) {
    nlohmann::json entry = {{"name", f.name}, {"kind", std::string(to_string(f.kind))}};
    if (f.kind == FeatureKind::categorical) entry["allowed_values"] = f.allowed_values;
    features.push_back(std::move(entry));
  }
  return {{"features", std::move(features)},
          {"label", {{"name", label_.name}, {"range", {label_.lo, label_.hi}}}}};
}

Schema Schema::from_json(const nlohmann::json& doc) {
  try {
    std::vector<FeatureSpec> features;
    for (const auto& entry : doc.at("features")) {
      FeatureSpec f;
      f.name = entry.at("name").get<std::string>();
      const auto kind = entry.at("kind").get<std::string>();
      if (kind == "numeric") {
        f.kind = FeatureKind::numeric;
      } else if (kind == "categorical") {
        f.kind = FeatureKind::categorical;
      } else {
        throw Error(Errc::bad_schema, "unknown feature kind '" + kind + "'");
      }
      if (entry.contains("allowed_values")) {
        for (const auto& v : entry.at("allowed_values")) {
          // Codes such as 1, 2 are common in survey data; accept them as text.
          f.allowed_values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
      }
      features.push_back(std::move(f));
    }
    const auto& label = doc.at("label");
    LabelSpec spec{label.at("name").get<std::string>(), label.at("range").at(0).get<double>(),
                   label.at("range").at(1).get<double>()};
    return Schema(std::move(features), std::move(spec));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_schema, std::string("malformed schema document: ") + e.what());
  }
}

Schema Schema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open schema file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json doc = nlohmann::json::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::bad_schema, "schema file is not JSON: " + path);
  return from_json(doc);
}

}  // namespace bounty
