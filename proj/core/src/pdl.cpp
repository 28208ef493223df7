#include "bounty/pdl.hpp"

#include <optional>
#include <string>

#include "bounty/error.hpp"

namespace bounty {

const Predicate& PdlNode::group() const {
  return std::visit([](const auto& n) -> const Predicate& { return n.group; }, body);
}

PointerDecisionList::PointerDecisionList(std::shared_ptr<const Schema> schema, Hypothesis base,
                                         Limits limits)
    : schema_(std::move(schema)), base_(std::move(base)), limits_(limits) {
  if (!schema_) throw Error(Errc::invalid_hypothesis, "pointer decision list needs a schema");
  auto issues = validate_hypothesis(base_, *schema_, limits_, "base");
  if (!issues.empty()) {
    throw Error(Errc::invalid_hypothesis,
                "invalid base hypothesis: " + issues.front().path + ": " + issues.front().message);
  }
}

VersionId PointerDecisionList::prepend_update(Predicate group, Hypothesis hypothesis) {
  auto issues = validate_predicate(group, *schema_, limits_);
  auto more = validate_hypothesis(hypothesis, *schema_, limits_);
  issues.insert(issues.end(), more.begin(), more.end());
  if (!issues.empty()) throw BundleError(std::move(issues));
  const VersionId v{current().value + 1};
  nodes_.push_back(PdlNode{UpdateNode{std::move(group), std::move(hypothesis)}, v});
  return v;
}

VersionId PointerDecisionList::prepend_repair(Predicate group, VersionId target) {
  const VersionId v{current().value + 1};
  if (!(target < v)) {
    throw Error(Errc::bad_target, "repair target " + std::to_string(target.value) +
                                      " is not older than version " + std::to_string(v.value));
  }
  auto issues = validate_predicate(group, *schema_, limits_);
  if (!issues.empty()) throw BundleError(std::move(issues));
  nodes_.push_back(PdlNode{RepairNode{std::move(group), target}, v});
  return v;
}

namespace {

// Evaluates one version of a list over a dataset, computing each node's mask
// and hypothesis output at most once.
class Evaluator {
 public:
  Evaluator(const PointerDecisionList& pdl, const Dataset& dataset)
      : pdl_(pdl), dataset_(dataset), masks_(pdl.nodes().size()), outputs_(pdl.nodes().size()) {}

  std::vector<double> run(VersionId version) {
    std::vector<double> out(dataset_.rows(), 0.0);
    std::vector<std::size_t> rows(dataset_.rows());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    resolve(version, rows, out);
    return out;
  }

 private:
  void resolve(VersionId version, std::vector<std::size_t> active, std::vector<double>& out) {
    for (auto i = static_cast<std::size_t>(version.value); i-- > 0 && !active.empty();) {
      const auto& node = pdl_.nodes()[i];
      const auto& mask = mask_of(i);
      std::vector<std::size_t> matched;
      std::vector<std::size_t> rest;
      for (auto r : active) (mask[r] ? matched : rest).push_back(r);
      if (matched.empty()) continue;
      active = std::move(rest);
      if (const auto* update = std::get_if<UpdateNode>(&node.body)) {
        const auto& values = output_of(i, update->hypothesis);
        for (auto r : matched) out[r] = values[r];
      } else {
        resolve(std::get<RepairNode>(node.body).target, std::move(matched), out);
      }
    }
    if (active.empty()) return;
    if (!base_) base_ = predict(pdl_.base(), dataset_);
    for (auto r : active) out[r] = (*base_)[r];
  }

  const GroupMask& mask_of(std::size_t i) {
    if (!masks_[i]) masks_[i] = eval_predicate(pdl_.nodes()[i].group(), dataset_);
    return *masks_[i];
  }

  const std::vector<double>& output_of(std::size_t i, const Hypothesis& h) {
    if (!outputs_[i]) outputs_[i] = predict(h, dataset_);
    return *outputs_[i];
  }

  const PointerDecisionList& pdl_;
  const Dataset& dataset_;
  std::vector<std::optional<GroupMask>> masks_;
  std::vector<std::optional<std::vector<double>>> outputs_;
  std::optional<std::vector<double>> base_;
};

}  // namespace

std::vector<double> PointerDecisionList::predict(VersionId version, const Dataset& dataset) const {
  if (!has_version(version)) {
    throw Error(Errc::unknown_version, "unknown version " + std::to_string(version.value));
  }
  return Evaluator(*this, dataset).run(version);
}

nlohmann::json PointerDecisionList::snapshot() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : nodes_) {
    if (const auto* u = std::get_if<UpdateNode>(&node.body)) {
      nodes.push_back({{"kind", "update"}, {"group", to_text(u->group)}, {"hypothesis", to_json(u->hypothesis)}});
    } else {
      const auto& r = std::get<RepairNode>(node.body);
      nodes.push_back({{"kind", "repair"}, {"group", to_text(r.group)}, {"target", r.target.value}});
    }
  }
  return {{"format_version", 1},
          {"base", to_json(base_)},
          {"nodes", std::move(nodes)},
          {"current_version", current().value}};
}

PointerDecisionList PointerDecisionList::from_snapshot(std::shared_ptr<const Schema> schema,
                                                       const nlohmann::json& doc, Limits limits) {
  try {
    if (doc.at("format_version").get<int>() != 1) {
      throw Error(Errc::version_unsupported, "unsupported snapshot format version");
    }
    PointerDecisionList pdl(std::move(schema), hypothesis_from_json(doc.at("base"), limits.tree_depth),
                            limits);
    for (const auto& node : doc.at("nodes")) {
      auto group = parse_predicate(node.at("group").get<std::string>(), limits.predicate_depth);
      const auto kind = node.at("kind").get<std::string>();
      if (kind == "update") {
        pdl.prepend_update(std::move(group), hypothesis_from_json(node.at("hypothesis"), limits.tree_depth));
      } else if (kind == "repair") {
        pdl.prepend_repair(std::move(group), VersionId{node.at("target").get<std::uint32_t>()});
      } else {
        throw Error(Errc::syntax_error, "unknown node kind '" + kind + "'");
      }
    }
    if (doc.at("current_version").get<std::uint32_t>() != pdl.current().value) {
      throw Error(Errc::syntax_error, "snapshot current_version does not match its node list");
    }
    return pdl;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::syntax_error, std::string("malformed snapshot: ") + e.what());
  }
}

bool PointerDecisionList::operator==(const PointerDecisionList& other) const {
  return *schema_ == *other.schema_ && base_ == other.base_ && nodes_ == other.nodes_;
}

// ---------------------------------------------------------------------------

PredictionCache::PredictionCache(std::shared_ptr<const Dataset> dataset)
    : dataset_(std::move(dataset)) {}

void PredictionCache::sync(const PointerDecisionList& pdl) {
  if (predictions_.empty()) predictions_.push_back(predict(pdl.base(), *dataset_));
  while (predictions_.size() < pdl.version_count()) {
    const auto& node = pdl.nodes()[predictions_.size() - 1];
    auto mask = eval_predicate(node.group(), *dataset_);
    std::vector<double> next = predictions_.back();
    if (const auto* u = std::get_if<UpdateNode>(&node.body)) {
      const auto values = predict(u->hypothesis, *dataset_);
      for (std::size_t r = 0; r < next.size(); ++r) {
        if (mask[r]) next[r] = values[r];
      }
    } else {
      const auto& target = predictions_[std::get<RepairNode>(node.body).target.value];
      for (std::size_t r = 0; r < next.size(); ++r) {
        if (mask[r]) next[r] = target[r];
      }
    }
    masks_.push_back(std::move(mask));
    predictions_.push_back(std::move(next));
  }
}

std::span<const double> PredictionCache::at(VersionId version) const {
  if (version.value >= predictions_.size()) {
    throw Error(Errc::unknown_version, "version " + std::to_string(version.value) + " is not cached");
  }
  return predictions_[version.value];
}

const GroupMask& PredictionCache::node_mask(VersionId version) const {
  if (version.value == 0 || version.value > masks_.size()) {
    throw Error(Errc::unknown_version, "no node for version " + std::to_string(version.value));
  }
  return masks_[version.value - 1];
}

}  // namespace bounty
