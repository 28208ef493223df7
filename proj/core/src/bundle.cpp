#include "bounty/bundle.hpp"

#include <cmath>

#include "bounty/numeric_text.hpp"

namespace bounty {

std::string_view to_string(IssueCode code) {
  switch (code) {
    case IssueCode::syntax_error: return "SyntaxError";
    case IssueCode::unknown_feature: return "UnknownFeature";
    case IssueCode::type_mismatch: return "TypeMismatch";
    case IssueCode::limit_exceeded: return "LimitExceeded";
    case IssueCode::version_unsupported: return "VersionUnsupported";
    case IssueCode::non_finite_parameter: return "NonFiniteParameter";
    case IssueCode::malformed_tree: return "MalformedTree";
  }
  return "Unknown";
}

nlohmann::json to_json(const Issue& issue) {
  return {{"code", std::string(to_string(issue.code))}, {"path", issue.path}, {"message", issue.message}};
}

nlohmann::json to_json(const Limits& l) {
  return {{"predicate_depth", l.predicate_depth}, {"predicate_nodes", l.predicate_nodes},
          {"tree_depth", l.tree_depth}, {"ensemble_size", l.ensemble_size},
          {"bundle_bytes", l.bundle_bytes}};
}

Limits limits_from_json(const nlohmann::json& doc) {
  Limits l;
  l.predicate_depth = doc.value("predicate_depth", l.predicate_depth);
  l.predicate_nodes = doc.value("predicate_nodes", l.predicate_nodes);
  l.tree_depth = doc.value("tree_depth", l.tree_depth);
  l.ensemble_size = doc.value("ensemble_size", l.ensemble_size);
  l.bundle_bytes = doc.value("bundle_bytes", l.bundle_bytes);
  return l;
}

namespace {

std::string summarize(const std::vector<Issue>& issues) {
  std::string out = "invalid bundle:";
  for (const auto& i : issues) {
    out += " [";
    out += to_string(i.code);
    out += " at ";
    out += i.path;
    out += ": ";
    out += i.message;
    out += "]";
  }
  return out;
}

}  // namespace

BundleError::BundleError(std::vector<Issue> issues)
    : Error(Errc::invalid_bundle, summarize(issues)), issues_(std::move(issues)) {}

// ---------------------------------------------------------------------------
// Predicate checks

namespace {

void check_literal(const Literal& value, const FeatureSpec& spec, std::size_t feature,
                   const Schema& schema, const std::string& path, std::vector<Issue>& issues) {
  if (spec.kind == FeatureKind::numeric) {
    const auto* d = std::get_if<double>(&value);
    if (!d) {
      issues.push_back({IssueCode::type_mismatch, path,
                        "numeric feature '" + spec.name + "' compared with a string"});
    } else if (!std::isfinite(*d)) {
      issues.push_back({IssueCode::non_finite_parameter, path, "non-finite constant"});
    }
    return;
  }
  const auto* s = std::get_if<std::string>(&value);
  if (!s) {
    issues.push_back({IssueCode::type_mismatch, path,
                      "categorical feature '" + spec.name + "' compared with a number"});
  } else if (!schema.category_code(feature, *s)) {
    issues.push_back({IssueCode::type_mismatch, path,
                      "'" + *s + "' is not an allowed value of '" + spec.name + "'"});
  }
}

void check_predicate(const Predicate& p, const Schema& schema, const std::string& path,
                     std::vector<Issue>& issues) {
  using K = Predicate::Kind;
  switch (p.kind()) {
    case K::always_true:
      return;
    case K::compare:
    case K::member_of: {
      auto f = schema.find(p.feature());
      if (!f) {
        issues.push_back({IssueCode::unknown_feature, path, p.feature()});
        return;
      }
      const auto& spec = schema.feature(*f);
      if (p.kind() == K::compare) {
        if (spec.kind == FeatureKind::categorical && p.op() != CompareOp::eq &&
            p.op() != CompareOp::ne) {
          issues.push_back({IssueCode::type_mismatch, path,
                            "ordered comparison on categorical feature '" + spec.name + "'"});
        }
        check_literal(p.value(), spec, *f, schema, path, issues);
        return;
      }
      if (p.values().empty()) {
        issues.push_back({IssueCode::syntax_error, path, "IN requires at least one value"});
      }
      for (std::size_t i = 0; i < p.values().size(); ++i) {
        check_literal(p.values()[i], spec, *f, schema, path + ".values[" + std::to_string(i) + "]",
                      issues);
      }
      return;
    }
    case K::all_of:
    case K::any_of:
      if (p.children().size() < 2) {
        issues.push_back({IssueCode::syntax_error, path,
                          std::string(p.kind() == K::all_of ? "AND" : "OR") +
                              " requires at least two operands"});
      }
      for (std::size_t i = 0; i < p.children().size(); ++i) {
        check_predicate(p.children()[i], schema, path + ".args[" + std::to_string(i) + "]", issues);
      }
      return;
    case K::negation:
      check_predicate(p.children().front(), schema, path + ".arg", issues);
      return;
  }
}

// ---------------------------------------------------------------------------
// Hypothesis checks

void check_finite(double v, const std::string& path, const std::string& what,
                  std::vector<Issue>& issues) {
  if (!std::isfinite(v)) issues.push_back({IssueCode::non_finite_parameter, path, what + " is not finite"});
}

// Pre-order shape: children lie after their parent, every non-root node has
// exactly one parent, and leaves have no children.
bool check_tree_shape(const RegressionTree& tree, const std::string& path, std::vector<Issue>& issues) {
  const auto n = static_cast<std::int32_t>(tree.nodes.size());
  if (n == 0) {
    issues.push_back({IssueCode::malformed_tree, path, "tree has no nodes"});
    return false;
  }
  std::vector<int> parents(tree.nodes.size(), 0);
  for (std::int32_t i = 0; i < n; ++i) {
    const auto& node = tree.nodes[static_cast<std::size_t>(i)];
    if (node.left < 0 && node.right < 0) continue;
    if (node.left <= i || node.right <= i || node.left >= n || node.right >= n || node.left == node.right) {
      issues.push_back({IssueCode::malformed_tree, path + ".nodes[" + std::to_string(i) + "]",
                        "child index out of order or out of range"});
      return false;
    }
    ++parents[static_cast<std::size_t>(node.left)];
    ++parents[static_cast<std::size_t>(node.right)];
  }
  for (std::int32_t i = 1; i < n; ++i) {
    if (parents[static_cast<std::size_t>(i)] != 1) {
      issues.push_back({IssueCode::malformed_tree, path + ".nodes[" + std::to_string(i) + "]",
                        "node is not referenced by exactly one parent"});
      return false;
    }
  }
  return true;
}

void check_tree(const RegressionTree& tree, const Schema& schema, const Limits& limits,
                const std::string& path, std::vector<Issue>& issues) {
  if (!check_tree_shape(tree, path, issues)) return;
  const auto depth = tree.depth();
  if (depth > limits.tree_depth) {
    issues.push_back({IssueCode::limit_exceeded, path,
                      "depth: tree depth " + std::to_string(depth) + " exceeds limit " +
                          std::to_string(limits.tree_depth)});
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    const auto node_path = path + ".nodes[" + std::to_string(i) + "]";
    if (node.is_leaf()) {
      check_finite(node.value, node_path, "leaf value", issues);
      continue;
    }
    auto f = schema.find(node.feature);
    if (!f) {
      issues.push_back({IssueCode::unknown_feature, node_path, node.feature});
      continue;
    }
    const auto& spec = schema.feature(*f);
    if (spec.kind == FeatureKind::numeric) {
      const auto* t = std::get_if<double>(&node.rule);
      if (!t) {
        issues.push_back({IssueCode::type_mismatch, node_path,
                          "category split on numeric feature '" + spec.name + "'"});
      } else {
        check_finite(*t, node_path, "threshold", issues);
      }
    } else {
      const auto* cats = std::get_if<std::vector<std::string>>(&node.rule);
      if (!cats) {
        issues.push_back({IssueCode::type_mismatch, node_path,
                          "threshold split on categorical feature '" + spec.name + "'"});
      } else {
        for (const auto& c : *cats) {
          if (!schema.category_code(*f, c)) {
            issues.push_back({IssueCode::type_mismatch, node_path,
                              "'" + c + "' is not an allowed value of '" + spec.name + "'"});
          }
        }
      }
    }
  }
}

}  // namespace

std::vector<Issue> validate_predicate(const Predicate& predicate, const Schema& schema,
                                      const Limits& limits, const std::string& path) {
  std::vector<Issue> issues;
  const auto depth = predicate.depth();
  if (depth > limits.predicate_depth) {
    issues.push_back({IssueCode::limit_exceeded, path,
                      "depth: predicate depth " + std::to_string(depth) + " exceeds limit " +
                          std::to_string(limits.predicate_depth)});
  }
  const auto nodes = predicate.node_count();
  if (nodes > limits.predicate_nodes) {
    issues.push_back({IssueCode::limit_exceeded, path,
                      "nodes: predicate has " + std::to_string(nodes) + " nodes, limit " +
                          std::to_string(limits.predicate_nodes)});
  }
  check_predicate(predicate, schema, path, issues);
  return issues;
}

std::vector<Issue> validate_hypothesis(const Hypothesis& hypothesis, const Schema& schema,
                                       const Limits& limits, const std::string& path) {
  std::vector<Issue> issues;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          check_finite(m.value, path, "constant", issues);
        } else if constexpr (std::is_same_v<T, LinearModel>) {
          check_finite(m.intercept, path, "intercept", issues);
          for (const auto& [name, coef] : m.numeric) {
            const auto p = path + ".numeric." + name;
            auto f = schema.find(name);
            if (!f) {
              issues.push_back({IssueCode::unknown_feature, p, name});
            } else if (schema.feature(*f).kind != FeatureKind::numeric) {
              issues.push_back({IssueCode::type_mismatch, p, "'" + name + "' is categorical"});
            }
            check_finite(coef, p, "coefficient", issues);
          }
          for (const auto& [name, levels] : m.categorical) {
            const auto p = path + ".categorical." + name;
            auto f = schema.find(name);
            if (!f) {
              issues.push_back({IssueCode::unknown_feature, p, name});
            } else if (schema.feature(*f).kind != FeatureKind::categorical) {
              issues.push_back({IssueCode::type_mismatch, p, "'" + name + "' is numeric"});
            }
            for (const auto& [value, coef] : levels) {
              if (f && schema.feature(*f).kind == FeatureKind::categorical &&
                  !schema.category_code(*f, value)) {
                issues.push_back({IssueCode::type_mismatch, p + "." + value,
                                  "'" + value + "' is not an allowed value of '" + name + "'"});
              }
              check_finite(coef, p + "." + value, "coefficient", issues);
            }
          }
        } else if constexpr (std::is_same_v<T, RegressionTree>) {
          check_tree(m, schema, limits, path, issues);
        } else {
          check_finite(m.base, path, "ensemble base", issues);
          if (m.trees.size() > limits.ensemble_size) {
            issues.push_back({IssueCode::limit_exceeded, path,
                              "ensemble_size: " + std::to_string(m.trees.size()) +
                                  " trees exceeds limit " + std::to_string(limits.ensemble_size)});
          }
          for (std::size_t i = 0; i < m.trees.size(); ++i) {
            const auto p = path + ".trees[" + std::to_string(i) + "]";
            check_finite(m.trees[i].shrinkage, p, "shrinkage", issues);
            check_tree(m.trees[i].tree, schema, limits, p, issues);
          }
        }
      },
      hypothesis);
  return issues;
}

std::vector<Issue> validate_bundle(const ModelBundle& bundle, const Schema& schema,
                                   const Limits& limits) {
  std::vector<Issue> issues;
  if (bundle.metadata.format_version != kBundleFormatVersion) {
    issues.push_back({IssueCode::version_unsupported, "format_version",
                      "format version " + std::to_string(bundle.metadata.format_version) +
                          " is not supported (expected " + std::to_string(kBundleFormatVersion) + ")"});
  }
  auto group = validate_predicate(bundle.group, schema, limits);
  issues.insert(issues.end(), group.begin(), group.end());
  auto hyp = validate_hypothesis(bundle.hypothesis, schema, limits);
  issues.insert(issues.end(), hyp.begin(), hyp.end());
  return issues;
}

// ---------------------------------------------------------------------------
// Wire format

ModelBundle parse_bundle(std::string_view document, const Schema& schema, const Limits& limits) {
  if (document.size() > limits.bundle_bytes) {
    throw BundleError({{IssueCode::limit_exceeded, "",
                        "bundle_bytes: document is " + std::to_string(document.size()) +
                            " bytes, limit " + std::to_string(limits.bundle_bytes)}});
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw BundleError({{IssueCode::syntax_error, "", "JSON syntax error at byte " +
                                                         std::to_string(e.byte) + ": " + e.what()}});
  }
  if (!doc.is_object()) {
    throw BundleError({{IssueCode::syntax_error, "", "bundle must be a JSON object"}});
  }

  std::vector<Issue> issues;
  ModelBundle bundle;
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
    issues.push_back({IssueCode::syntax_error, "format_version", "missing integer format_version"});
  } else {
    bundle.metadata.format_version = doc["format_version"].get<int>();
  }

  // Decoding caps nesting at twice the limits so that validation can still
  // report the exact overflow alongside every other issue.
  auto decode = [&](const char* key, auto&& fn) {
    if (!doc.contains(key)) {
      issues.push_back({IssueCode::syntax_error, key, std::string("missing '") + key + "'"});
      return;
    }
    try {
      fn(doc[key]);
    } catch (const Error& e) {
      const auto code = e.code() == Errc::limit_exceeded ? IssueCode::limit_exceeded
                                                         : IssueCode::syntax_error;
      issues.push_back({code, key, e.what()});
    }
  };
  decode("group", [&](const nlohmann::json& g) {
    if (g.is_string()) {
      bundle.group = parse_predicate(g.get<std::string>(), 2 * limits.predicate_depth);
    } else {
      bundle.group = predicate_from_json(g, 2 * limits.predicate_depth);
    }
  });
  decode("hypothesis", [&](const nlohmann::json& h) {
    bundle.hypothesis = hypothesis_from_json(h, 2 * limits.tree_depth);
  });
  if (doc.contains("metadata")) {
    const auto& meta = doc["metadata"];
    if (!meta.is_object()) {
      issues.push_back({IssueCode::syntax_error, "metadata", "metadata must be an object"});
    } else {
      if (meta.contains("team")) {
        if (meta["team"].is_string()) bundle.metadata.team = meta["team"].get<std::string>();
        else issues.push_back({IssueCode::syntax_error, "metadata.team", "team must be a string"});
      }
      if (meta.contains("note")) {
        if (meta["note"].is_string()) bundle.metadata.note = meta["note"].get<std::string>();
        else issues.push_back({IssueCode::syntax_error, "metadata.note", "note must be a string"});
      }
    }
  }
  if (!issues.empty()) {
    // Version problems are reported together with decode problems.
    if (bundle.metadata.format_version != kBundleFormatVersion) {
      issues.push_back({IssueCode::version_unsupported, "format_version", "unsupported format version"});
    }
    throw BundleError(std::move(issues));
  }
  auto problems = validate_bundle(bundle, schema, limits);
  if (!problems.empty()) throw BundleError(std::move(problems));
  return bundle;
}

nlohmann::json bundle_to_json(const ModelBundle& bundle) {
  return {{"format_version", bundle.metadata.format_version},
          {"group", to_text(bundle.group)},
          {"hypothesis", to_json(bundle.hypothesis)},
          {"metadata", {{"team", bundle.metadata.team}, {"note", bundle.metadata.note}}}};
}

std::string serialize_bundle(const ModelBundle& bundle) { return bundle_to_json(bundle).dump(); }

}  // namespace bounty
