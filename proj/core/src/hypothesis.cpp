#include "bounty/hypothesis.hpp"

#include <algorithm>
#include <cmath>

#include "bounty/error.hpp"

namespace bounty {

RegressionTree RegressionTree::leaf(double value) {
  RegressionTree t;
  t.nodes.push_back(TreeNode{"", SplitRule{0.0}, -1, -1, value});
  return t;
}

std::size_t RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  // Pre-order layout: children always have larger indices than their parent.
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    const auto& n = nodes[i];
    if (n.is_leaf()) continue;
    for (auto child : {n.left, n.right}) {
      if (child > static_cast<std::int32_t>(i) && child < static_cast<std::int32_t>(nodes.size())) {
        level[static_cast<std::size_t>(child)] = level[i] + 1;
      }
    }
  }
  return deepest;
}

std::string_view kind_name(const Hypothesis& h) {
  switch (h.index()) {
    case 0: return "constant";
    case 1: return "linear";
    case 2: return "tree";
    default: return "ensemble";
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json tree_node_json(const RegressionTree& tree, std::size_t index) {
  const auto& n = tree.nodes.at(index);
  if (n.is_leaf()) return {{"value", n.value}};
  nlohmann::json out = {{"feature", n.feature}};
  if (const auto* t = std::get_if<double>(&n.rule)) {
    out["threshold"] = *t;
  } else {
    out["categories"] = std::get<std::vector<std::string>>(n.rule);
  }
  out["left"] = tree_node_json(tree, static_cast<std::size_t>(n.left));
  out["right"] = tree_node_json(tree, static_cast<std::size_t>(n.right));
  return out;
}

double number_at(const nlohmann::json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw Error(Errc::syntax_error, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

void decode_tree_node(const nlohmann::json& doc, RegressionTree& tree, std::size_t depth,
                      std::size_t max_depth) {
  if (depth > max_depth) {
    throw Error(Errc::limit_exceeded, "tree depth exceeds limit " + std::to_string(max_depth));
  }
  if (!doc.is_object()) throw Error(Errc::syntax_error, "tree node must be an object");
  const auto index = tree.nodes.size();
  tree.nodes.emplace_back();
  if (doc.contains("value") && !doc.contains("feature")) {
    tree.nodes[index].value = number_at(doc, "value");
    return;
  }
  TreeNode node;
  node.feature = doc.at("feature").get<std::string>();
  if (doc.contains("threshold")) {
    node.rule = number_at(doc, "threshold");
  } else if (doc.contains("categories")) {
    node.rule = doc.at("categories").get<std::vector<std::string>>();
  } else {
    throw Error(Errc::syntax_error, "split node needs 'threshold' or 'categories'");
  }
  node.left = static_cast<std::int32_t>(tree.nodes.size());
  decode_tree_node(doc.at("left"), tree, depth + 1, max_depth);
  node.right = static_cast<std::int32_t>(tree.nodes.size());
  decode_tree_node(doc.at("right"), tree, depth + 1, max_depth);
  tree.nodes[index] = std::move(node);
}

RegressionTree decode_tree(const nlohmann::json& root, std::size_t max_depth) {
  RegressionTree tree;
  decode_tree_node(root, tree, 0, max_depth);
  return tree;
}

}  // namespace

nlohmann::json to_json(const Hypothesis& h) {
  return std::visit(
      [](const auto& m) -> nlohmann::json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          return {{"type", "constant"}, {"value", m.value}};
        } else if constexpr (std::is_same_v<T, LinearModel>) {
          nlohmann::json numeric = nlohmann::json::object();
          for (const auto& [k, v] : m.numeric) numeric[k] = v;
          nlohmann::json categorical = nlohmann::json::object();
          for (const auto& [k, levels] : m.categorical) {
            nlohmann::json l = nlohmann::json::object();
            for (const auto& [value, coef] : levels) l[value] = coef;
            categorical[k] = std::move(l);
          }
          return {{"type", "linear"}, {"intercept", m.intercept}, {"numeric", std::move(numeric)},
                  {"categorical", std::move(categorical)}};
        } else if constexpr (std::is_same_v<T, RegressionTree>) {
          if (m.nodes.empty()) return {{"type", "tree"}, {"root", nullptr}};
          return {{"type", "tree"}, {"root", tree_node_json(m, 0)}};
        } else {
          nlohmann::json trees = nlohmann::json::array();
          for (const auto& st : m.trees) {
            trees.push_back({{"shrinkage", st.shrinkage},
                             {"root", st.tree.nodes.empty() ? nlohmann::json(nullptr)
                                                            : tree_node_json(st.tree, 0)}});
          }
          return {{"type", "ensemble"}, {"base", m.base}, {"trees", std::move(trees)}};
        }
      },
      h);
}

Hypothesis hypothesis_from_json(const nlohmann::json& doc, std::size_t max_tree_depth) {
  if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string()) {
    throw Error(Errc::syntax_error, "hypothesis must be an object with a string 'type'");
  }
  const auto type = doc["type"].get<std::string>();
  try {
    if (type == "constant") return ConstantModel{number_at(doc, "value")};
    if (type == "linear") {
      LinearModel m;
      m.intercept = number_at(doc, "intercept");
      if (doc.contains("numeric")) {
        for (const auto& [k, v] : doc.at("numeric").items()) {
          if (!v.is_number()) throw Error(Errc::syntax_error, "coefficient for '" + k + "' is not a number");
          m.numeric[k] = v.get<double>();
        }
      }
      if (doc.contains("categorical")) {
        for (const auto& [k, levels] : doc.at("categorical").items()) {
          auto& dst = m.categorical[k];
          for (const auto& [value, coef] : levels.items()) {
            if (!coef.is_number()) {
              throw Error(Errc::syntax_error, "coefficient for '" + k + "=" + value + "' is not a number");
            }
            dst[value] = coef.get<double>();
          }
        }
      }
      return m;
    }
    if (type == "tree") return decode_tree(doc.at("root"), max_tree_depth);
    if (type == "ensemble") {
      TreeEnsemble m;
      m.base = number_at(doc, "base");
      for (const auto& t : doc.at("trees")) {
        m.trees.push_back(ScaledTree{number_at(t, "shrinkage"), decode_tree(t.at("root"), max_tree_depth)});
      }
      return m;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::syntax_error, std::string("malformed ") + type + " hypothesis: " + e.what());
  }
  throw Error(Errc::syntax_error, "unknown hypothesis type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Prediction

namespace {

std::size_t resolve(const Schema& schema, const std::string& name) {
  auto index = schema.find(name);
  if (!index) throw Error(Errc::unknown_feature, "unknown feature '" + name + "'");
  return *index;
}

// Tree with names resolved to column indices and category sets to bitmaps.
struct CompiledNode {
  std::size_t feature = 0;
  bool numeric = true;
  double threshold = 0.0;
  std::vector<std::uint8_t> goes_left;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

std::vector<CompiledNode> compile(const RegressionTree& tree, const Schema& schema) {
  std::vector<CompiledNode> out(tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    auto& c = out[i];
    c.left = n.left;
    c.right = n.right;
    c.value = n.value;
    if (n.is_leaf()) continue;
    c.feature = resolve(schema, n.feature);
    const auto& spec = schema.feature(c.feature);
    c.numeric = spec.kind == FeatureKind::numeric;
    if (c.numeric) {
      c.threshold = std::get<double>(n.rule);
    } else {
      c.goes_left.assign(spec.allowed_values.size(), 0);
      for (const auto& v : std::get<std::vector<std::string>>(n.rule)) {
        if (auto code = schema.category_code(c.feature, v)) c.goes_left[static_cast<std::size_t>(*code)] = 1;
      }
    }
  }
  return out;
}

// Adds scale * tree(x) to `out` for every row.
void accumulate_tree(const RegressionTree& tree, const Dataset& dataset, double scale,
                     std::vector<double>& out) {
  if (tree.nodes.empty()) throw Error(Errc::invalid_hypothesis, "empty regression tree");
  const auto nodes = compile(tree, dataset.schema());
  const auto n = dataset.rows();
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t i = 0;
    while (nodes[i].left >= 0) {
      const auto& node = nodes[i];
      bool left;
      if (node.numeric) {
        left = dataset.numeric(node.feature)[r] <= node.threshold;
      } else {
        left = node.goes_left[static_cast<std::size_t>(dataset.codes(node.feature)[r])] != 0;
      }
      i = static_cast<std::size_t>(left ? node.left : node.right);
    }
    out[r] += scale * nodes[i].value;
  }
}

}  // namespace

std::vector<double> predict(const Hypothesis& h, const Dataset& dataset) {
  const auto n = dataset.rows();
  const auto& schema = dataset.schema();
  std::vector<double> out(n, 0.0);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          std::fill(out.begin(), out.end(), m.value);
        } else if constexpr (std::is_same_v<T, LinearModel>) {
          std::fill(out.begin(), out.end(), m.intercept);
          for (const auto& [name, coef] : m.numeric) {
            const auto col = dataset.numeric(resolve(schema, name));
            for (std::size_t r = 0; r < n; ++r) out[r] += coef * col[r];
          }
          for (const auto& [name, levels] : m.categorical) {
            const auto f = resolve(schema, name);
            std::vector<double> by_code(schema.feature(f).allowed_values.size(), 0.0);
            for (const auto& [value, coef] : levels) {
              if (auto code = schema.category_code(f, value)) by_code[static_cast<std::size_t>(*code)] = coef;
            }
            const auto col = dataset.codes(f);
            for (std::size_t r = 0; r < n; ++r) out[r] += by_code[static_cast<std::size_t>(col[r])];
          }
        } else if constexpr (std::is_same_v<T, RegressionTree>) {
          accumulate_tree(m, dataset, 1.0, out);
        } else {
          std::fill(out.begin(), out.end(), m.base);
          for (const auto& st : m.trees) accumulate_tree(st.tree, dataset, st.shrinkage, out);
        }
      },
      h);
  const auto& range = schema.label();
  for (auto& v : out) {
    // Finite parameters can still overflow to inf - inf; such rows pin to lo.
    v = std::isnan(v) ? range.lo : std::clamp(v, range.lo, range.hi);
  }
  return out;
}

}  // namespace bounty
