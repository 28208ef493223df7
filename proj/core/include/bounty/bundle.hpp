#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bounty/error.hpp"
#include "bounty/hypothesis.hpp"
#include "bounty/predicate.hpp"
#include "bounty/schema.hpp"

namespace bounty {

inline constexpr int kBundleFormatVersion = 1;

struct Limits {
  std::size_t predicate_depth = 32;
  std::size_t predicate_nodes = 1024;
  std::size_t tree_depth = 16;
  std::size_t ensemble_size = 512;
  std::size_t bundle_bytes = 4u << 20;

  bool operator==(const Limits&) const = default;
};

nlohmann::json to_json(const Limits& limits);
Limits limits_from_json(const nlohmann::json& doc);

enum class IssueCode {
  syntax_error,
  unknown_feature,
  type_mismatch,
  limit_exceeded,
  version_unsupported,
  non_finite_parameter,
  malformed_tree,
};

std::string_view to_string(IssueCode code);

struct Issue {
  IssueCode code;
  std::string path;     // where in the bundle, e.g. "hypothesis.root.left"
  std::string message;

  bool operator==(const Issue&) const = default;
};

nlohmann::json to_json(const Issue& issue);

struct BundleMetadata {
  std::string team;
  std::string note;
  int format_version = kBundleFormatVersion;

  bool operator==(const BundleMetadata&) const = default;
};

// A (g, h) submission: group predicate, hypothesis and metadata.
struct ModelBundle {
  Predicate group;
  Hypothesis hypothesis;
  BundleMetadata metadata;

  bool operator==(const ModelBundle&) const = default;
};

// Thrown by parse_bundle; `issues()` lists every problem found.
class BundleError : public Error {
 public:
  explicit BundleError(std::vector<Issue> issues);
  const std::vector<Issue>& issues() const { return issues_; }

 private:
  std::vector<Issue> issues_;
};

// Every issue with the predicate against `schema` and `limits`.
std::vector<Issue> validate_predicate(const Predicate& predicate, const Schema& schema,
                                      const Limits& limits, const std::string& path = "group");
std::vector<Issue> validate_hypothesis(const Hypothesis& hypothesis, const Schema& schema,
                                       const Limits& limits,
                                       const std::string& path = "hypothesis");
// Exhaustive check; an empty list means the bundle can be evaluated on any
// dataset conforming to `schema`.
std::vector<Issue> validate_bundle(const ModelBundle& bundle, const Schema& schema,
                                   const Limits& limits);

// Decodes and validates a JSON bundle document. `group` may be surface text
// or a JSON expression tree.
ModelBundle parse_bundle(std::string_view document, const Schema& schema, const Limits& limits);

// Canonical JSON document (group as canonical surface text). Stable:
// serialize(parse(serialize(b))) == serialize(b).
nlohmann::json bundle_to_json(const ModelBundle& bundle);
std::string serialize_bundle(const ModelBundle& bundle);

}  // namespace bounty
