#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bounty/bundle.hpp"
#include "bounty/dataset.hpp"
#include "bounty/hypothesis.hpp"
#include "bounty/predicate.hpp"

namespace bounty {

// Dense version ordinal. Version 0 is the base model alone; version v has
// the v-th prepended node as its head.
struct VersionId {
  std::uint32_t value = 0;

  auto operator<=>(const VersionId&) const = default;
};

struct UpdateNode {
  Predicate group;
  Hypothesis hypothesis;

  bool operator==(const UpdateNode&) const = default;
};

// Rows in `group` are resolved by the frozen `target` version.
struct RepairNode {
  Predicate group;
  VersionId target;

  bool operator==(const RepairNode&) const = default;
};

struct PdlNode {
  std::variant<UpdateNode, RepairNode> body;
  VersionId introduced_at;

  bool is_repair() const { return std::holds_alternative<RepairNode>(body); }
  const Predicate& group() const;
  bool operator==(const PdlNode&) const = default;
};

// Prepend-only decision list over a base hypothesis. Created versions never
// change. Not internally synchronized: one writer, and readers only touch
// versions that existed when they started.
class PointerDecisionList {
 public:
  // Throws Errc::invalid_hypothesis when `base` is not valid for `schema`.
  PointerDecisionList(std::shared_ptr<const Schema> schema, Hypothesis base,
                      Limits limits = {});

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  const Hypothesis& base() const { return base_; }
  const std::vector<PdlNode>& nodes() const { return nodes_; }
  const Limits& limits() const { return limits_; }

  VersionId current() const { return VersionId{static_cast<std::uint32_t>(nodes_.size())}; }
  std::size_t version_count() const { return nodes_.size() + 1; }
  bool has_version(VersionId v) const { return v.value <= nodes_.size(); }

  // Throws Errc::invalid_bundle when g or h is not valid for the schema.
  VersionId prepend_update(Predicate group, Hypothesis hypothesis);
  // Throws Errc::bad_target unless target < the version being created, and
  // Errc::invalid_bundle for an invalid predicate.
  VersionId prepend_repair(Predicate group, VersionId target);

  // Throws Errc::unknown_version.
  std::vector<double> predict(VersionId version, const Dataset& dataset) const;

  nlohmann::json snapshot() const;
  static PointerDecisionList from_snapshot(std::shared_ptr<const Schema> schema,
                                           const nlohmann::json& doc, Limits limits = {});

  bool operator==(const PointerDecisionList& other) const;

 private:
  std::shared_ptr<const Schema> schema_;
  Hypothesis base_;
  Limits limits_;
  std::vector<PdlNode> nodes_;
};

// Per-version prediction vectors of one PDL over one dataset. Version v is
// derived from version v-1 by overwriting the rows of node v's group, so
// extending the cache costs one pass per new version.
class PredictionCache {
 public:
  explicit PredictionCache(std::shared_ptr<const Dataset> dataset);

  const Dataset& dataset() const { return *dataset_; }
  // Computes every version of `pdl` not yet cached. The cache must only ever
  // be synced against the same (growing) list.
  void sync(const PointerDecisionList& pdl);
  std::size_t versions() const { return predictions_.size(); }
  std::span<const double> at(VersionId version) const;
  // Group mask of node v (v >= 1) on the cached dataset.
  const GroupMask& node_mask(VersionId version) const;

 private:
  std::shared_ptr<const Dataset> dataset_;
  std::vector<std::vector<double>> predictions_;
  std::vector<GroupMask> masks_;
};

}  // namespace bounty
