#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bounty/dataset.hpp"

namespace bounty {

struct ConstantModel {
  double value = 0.0;

  bool operator==(const ConstantModel&) const = default;
};

// intercept + sum of numeric coefficients + one-hot categorical terms.
// Absent entries contribute zero.
struct LinearModel {
  double intercept = 0.0;
  std::map<std::string, double> numeric;
  std::map<std::string, std::map<std::string, double>> categorical;

  bool operator==(const LinearModel&) const = default;
};

// A split sends a row left when `value <= threshold` (numeric feature) or
// when the row's category is in `categories` (categorical feature).
using SplitRule = std::variant<double, std::vector<std::string>>;

struct TreeNode {
  std::string feature;  // empty for leaves
  SplitRule rule;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;   // leaf prediction

  bool is_leaf() const { return left < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Nodes in pre-order; node 0 is the root.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  static RegressionTree leaf(double value);
  // Edges on the longest root-to-leaf path (a single leaf has depth 0).
  std::size_t depth() const;
  bool operator==(const RegressionTree&) const = default;
};

struct ScaledTree {
  double shrinkage = 1.0;
  RegressionTree tree;

  bool operator==(const ScaledTree&) const = default;
};

// base + sum of shrinkage_i * tree_i(x); only the final sum is clamped.
struct TreeEnsemble {
  double base = 0.0;
  std::vector<ScaledTree> trees;

  bool operator==(const TreeEnsemble&) const = default;
};

// h : X -> Y.
using Hypothesis = std::variant<ConstantModel, LinearModel, RegressionTree, TreeEnsemble>;

std::string_view kind_name(const Hypothesis& h);

nlohmann::json to_json(const Hypothesis& h);
// Structural decoding only; schema checks live in validate_hypothesis.
// Throws Errc::syntax_error, or Errc::limit_exceeded for trees nested deeper
// than `max_tree_depth`.
Hypothesis hypothesis_from_json(const nlohmann::json& doc, std::size_t max_tree_depth = 16);

// One prediction per row, clamped to the schema's label range. The
// hypothesis must already be valid against the dataset's schema.
std::vector<double> predict(const Hypothesis& h, const Dataset& dataset);

}  // namespace bounty
