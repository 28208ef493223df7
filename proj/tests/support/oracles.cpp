#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

using namespace bounty;

namespace {

std::size_t index_of(const Schema& s, const std::string& name) { return *s.find(name); }

// The row's value as a literal of the feature's kind.
Literal cell(const Dataset& d, std::size_t f, std::size_t row) {
  const auto& spec = d.schema().feature(f);
  if (spec.kind == FeatureKind::numeric) return d.numeric(f)[row];
  return spec.allowed_values[static_cast<std::size_t>(d.codes(f)[row])];
}

bool compare(const Literal& a, CompareOp op, const Literal& b) {
  if (std::holds_alternative<double>(a)) {
    const double x = std::get<double>(a);
    const double y = std::get<double>(b);
    switch (op) {
      case CompareOp::eq: return x == y;
      case CompareOp::ne: return x != y;
      case CompareOp::lt: return x < y;
      case CompareOp::le: return x <= y;
      case CompareOp::gt: return x > y;
      case CompareOp::ge: return x >= y;
    }
  }
  const auto& x = std::get<std::string>(a);
  const auto& y = std::get<std::string>(b);
  return op == CompareOp::eq ? x == y : x != y;
}

}  // namespace

bool predicate_row(const Predicate& p, const Dataset& d, std::size_t row) {
  switch (p.kind()) {
    case Predicate::Kind::always_true:
      return true;
    case Predicate::Kind::compare:
      return compare(cell(d, index_of(d.schema(), p.feature()), row), p.op(), p.value());
    case Predicate::Kind::member_of: {
      const auto v = cell(d, index_of(d.schema(), p.feature()), row);
      for (const auto& c : p.values()) {
        if (compare(v, CompareOp::eq, c)) return true;
      }
      return false;
    }
    case Predicate::Kind::all_of:
      for (const auto& c : p.children()) {
        if (!predicate_row(c, d, row)) return false;
      }
      return true;
    case Predicate::Kind::any_of:
      for (const auto& c : p.children()) {
        if (predicate_row(c, d, row)) return true;
      }
      return false;
    case Predicate::Kind::negation:
      return !predicate_row(p.children().front(), d, row);
  }
  return false;
}

std::vector<bool> predicate_mask(const Predicate& p, const Dataset& d) {
  std::vector<bool> out(d.rows());
  for (std::size_t r = 0; r < d.rows(); ++r) out[r] = predicate_row(p, d, r);
  return out;
}

namespace {

double tree_at(const RegressionTree& t, std::size_t node, const Dataset& d, std::size_t row) {
  const auto& n = t.nodes[node];
  if (n.is_leaf()) return n.value;
  const auto f = index_of(d.schema(), n.feature);
  bool left;
  if (const auto* threshold = std::get_if<double>(&n.rule)) {
    left = d.numeric(f)[row] <= *threshold;
  } else {
    const auto& cats = std::get<std::vector<std::string>>(n.rule);
    const auto& v = std::get<std::string>(cell(d, f, row));
    left = std::find(cats.begin(), cats.end(), v) != cats.end();
  }
  return tree_at(t, static_cast<std::size_t>(left ? n.left : n.right), d, row);
}

}  // namespace

double tree_row(const RegressionTree& t, const Dataset& d, std::size_t row) { return tree_at(t, 0, d, row); }

double hypothesis_row(const Hypothesis& h, const Dataset& d, std::size_t row) {
  double y = 0.0;
  if (const auto* c = std::get_if<ConstantModel>(&h)) {
    y = c->value;
  } else if (const auto* l = std::get_if<LinearModel>(&h)) {
    y = l->intercept;
    for (const auto& [name, coef] : l->numeric) y += coef * d.numeric(index_of(d.schema(), name))[row];
    for (const auto& [name, levels] : l->categorical) {
      const auto v = std::get<std::string>(cell(d, index_of(d.schema(), name), row));
      const auto it = levels.find(v);
      y += it == levels.end() ? 0.0 : it->second;
    }
  } else if (const auto* t = std::get_if<RegressionTree>(&h)) {
    y = 0.0 + 1.0 * tree_row(*t, d, row);
  } else {
    const auto& e = std::get<TreeEnsemble>(h);
    y = e.base;
    for (const auto& st : e.trees) y += st.shrinkage * tree_row(st.tree, d, row);
  }
  const auto& range = d.schema().label();
  if (std::isnan(y)) return range.lo;
  return std::min(std::max(y, range.lo), range.hi);
}

double pdl_row(const nlohmann::json& snapshot, const Dataset& d, std::uint32_t version, std::size_t row) {
  const auto& nodes = snapshot.at("nodes");
  for (std::uint32_t v = version; v >= 1; --v) {
    const auto& node = nodes.at(v - 1);
    const auto group = parse_predicate(node.at("group").get<std::string>());
    if (!predicate_row(group, d, row)) continue;
    if (node.at("kind") == "update") return hypothesis_row(hypothesis_from_json(node.at("hypothesis")), d, row);
    return pdl_row(snapshot, d, node.at("target").get<std::uint32_t>(), row);
  }
  return hypothesis_row(hypothesis_from_json(snapshot.at("base")), d, row);
}

std::vector<double> pdl_predict(const nlohmann::json& snapshot, const Dataset& d, std::uint32_t version) {
  std::vector<double> out(d.rows());
  for (std::size_t r = 0; r < d.rows(); ++r) out[r] = pdl_row(snapshot, d, version, r);
  return out;
}

double two_pass_mse(std::span<const double> p, std::span<const double> y) {
  std::vector<long double> sq(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double r = static_cast<long double>(p[i]) - static_cast<long double>(y[i]);
    sq[i] = r * r;
  }
  long double total = 0.0L;
  for (auto v : sq) total += v;
  return static_cast<double>(total / static_cast<long double>(p.size()));
}

double filtered_mse(std::span<const double> p, std::span<const double> y, const std::vector<bool>& mask) {
  std::vector<double> fp;
  std::vector<double> fy;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (mask[i]) {
      fp.push_back(p[i]);
      fy.push_back(y[i]);
    }
  }
  return two_pass_mse(fp, fy);
}

}  // namespace oracle

namespace fuzz {

using namespace bounty;

std::shared_ptr<const Schema> schema(Rng& rng) {
  std::vector<FeatureSpec> features;
  const auto numeric = 1 + rng.below(3);
  const auto categorical = 1 + rng.below(3);
  for (std::size_t i = 0; i < numeric; ++i) features.push_back({"n" + std::to_string(i), FeatureKind::numeric, {}});
  for (std::size_t i = 0; i < categorical; ++i) {
    std::vector<std::string> values;
    const auto levels = 2 + rng.below(4);
    for (std::size_t v = 0; v < levels; ++v) values.push_back(std::string(1, static_cast<char>('a' + v)));
    features.push_back({"c" + std::to_string(i), FeatureKind::categorical, values});
  }
  return std::make_shared<const Schema>(std::move(features), LabelSpec{"y", 0.0, 100.0});
}

Dataset dataset(const std::shared_ptr<const Schema>& s, std::size_t rows, Rng& rng) {
  DatasetBuilder b(s);
  b.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t f = 0; f < s->feature_count(); ++f) {
      const auto& spec = s->feature(f);
      if (spec.kind == FeatureKind::numeric) {
        // Small integer grid so ties and equality comparisons actually occur.
        b.set_numeric(f, static_cast<double>(rng.below(21)) - 5.0);
      } else {
        b.set_category(f, static_cast<std::int32_t>(rng.below(spec.allowed_values.size())));
      }
    }
    b.finish_row(std::round(rng.uniform(0.0, 100.0) * 100.0) / 100.0);
  }
  return std::move(b).build();
}

namespace {

Literal literal_for(const FeatureSpec& spec, Rng& rng) {
  if (spec.kind == FeatureKind::numeric) return static_cast<double>(rng.below(21)) - 5.0 + (rng.bernoulli(0.3) ? 0.5 : 0.0);
  return spec.allowed_values[rng.below(spec.allowed_values.size())];
}

}  // namespace

Predicate predicate(const Schema& s, Rng& rng, std::size_t depth) {
  const auto choice = depth == 0 ? rng.below(3) : rng.below(7);
  const auto& spec = s.feature(rng.below(s.feature_count()));
  switch (choice) {
    case 0:
      if (rng.bernoulli(0.2)) return Predicate::always_true();
      [[fallthrough]];
    case 1: {
      const CompareOp numeric_ops[] = {CompareOp::eq, CompareOp::ne, CompareOp::lt,
                                       CompareOp::le, CompareOp::gt, CompareOp::ge};
      const CompareOp cat_ops[] = {CompareOp::eq, CompareOp::ne};
      const auto op = spec.kind == FeatureKind::numeric ? numeric_ops[rng.below(6)] : cat_ops[rng.below(2)];
      return Predicate::compare(spec.name, op, literal_for(spec, rng));
    }
    case 2: {
      std::vector<Literal> values;
      const auto count = 1 + rng.below(3);
      for (std::size_t i = 0; i < count; ++i) values.push_back(literal_for(spec, rng));
      return Predicate::member_of(spec.name, std::move(values));
    }
    case 3:
    case 4: {
      std::vector<Predicate> children;
      const auto count = 2 + rng.below(2);
      for (std::size_t i = 0; i < count; ++i) children.push_back(predicate(s, rng, depth - 1));
      return choice == 3 ? Predicate::all_of(std::move(children)) : Predicate::any_of(std::move(children));
    }
    default:
      return Predicate::negation(predicate(s, rng, depth - 1));
  }
}

RegressionTree tree(const Schema& s, Rng& rng, std::size_t depth) {
  RegressionTree t;
  auto grow = [&](auto& self, std::size_t d) -> std::int32_t {
    const auto index = static_cast<std::int32_t>(t.nodes.size());
    t.nodes.emplace_back();
    if (d == 0 || rng.bernoulli(0.25)) {
      t.nodes[static_cast<std::size_t>(index)].value = std::round(rng.uniform(-20.0, 120.0));
      return index;
    }
    const auto& spec = s.feature(rng.below(s.feature_count()));
    TreeNode node;
    node.feature = spec.name;
    if (spec.kind == FeatureKind::numeric) {
      node.rule = static_cast<double>(rng.below(21)) - 5.5;
    } else {
      std::vector<std::string> cats;
      for (const auto& v : spec.allowed_values) {
        if (rng.bernoulli(0.5)) cats.push_back(v);
      }
      if (cats.empty()) cats.push_back(spec.allowed_values.front());
      node.rule = cats;
    }
    node.left = self(self, d - 1);
    node.right = self(self, d - 1);
    t.nodes[static_cast<std::size_t>(index)] = node;
    return index;
  };
  grow(grow, depth);
  return t;
}

Hypothesis hypothesis(const Schema& s, Rng& rng) {
  switch (rng.below(4)) {
    case 0:
      return ConstantModel{std::round(rng.uniform(-10.0, 110.0) * 4.0) / 4.0};
    case 1: {
      LinearModel m;
      m.intercept = std::round(rng.uniform(0.0, 100.0));
      for (const auto& f : s.features()) {
        if (f.kind == FeatureKind::numeric) {
          if (rng.bernoulli(0.7)) m.numeric[f.name] = std::round(rng.uniform(-5.0, 5.0) * 8.0) / 8.0;
        } else {
          for (const auto& v : f.allowed_values) {
            if (rng.bernoulli(0.5)) m.categorical[f.name][v] = std::round(rng.uniform(-10.0, 10.0));
          }
        }
      }
      return m;
    }
    case 2:
      return tree(s, rng, 1 + rng.below(4));
    default: {
      TreeEnsemble e;
      e.base = std::round(rng.uniform(0.0, 100.0));
      const auto count = rng.below(4);
      for (std::size_t i = 0; i < count; ++i) e.trees.push_back({0.25 * static_cast<double>(1 + rng.below(4)), tree(s, rng, 1 + rng.below(3))});
      return e;
    }
  }
}

ModelBundle bundle(const Schema& s, Rng& rng) {
  ModelBundle b{predicate(s, rng, rng.below(4)), hypothesis(s, rng), {}};
  b.metadata.team = rng.bernoulli(0.5) ? "team-" + std::to_string(rng.below(10)) : "";
  b.metadata.note = rng.bernoulli(0.5) ? "note \"quoted\" é" : "";
  return b;
}

PointerDecisionList pdl(const std::shared_ptr<const Schema>& s, Rng& rng, std::size_t versions) {
  PointerDecisionList list(s, hypothesis(*s, rng));
  for (std::size_t i = 0; i < versions; ++i) {
    const auto current = list.current().value;
    if (current > 0 && rng.bernoulli(0.35)) {
      list.prepend_repair(predicate(*s, rng, rng.below(3)), VersionId{static_cast<std::uint32_t>(rng.below(current + 1))});
    } else {
      list.prepend_update(predicate(*s, rng, rng.below(3)), hypothesis(*s, rng));
    }
  }
  return list;
}

}  // namespace fuzz
