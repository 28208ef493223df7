#include <algorithm>
#include <charconv>
#include <map>
#include <cmath>
#include <numeric>

#include "bounty/error.hpp"
#include "bounty/predicate.hpp"
#include "bounty/sim.hpp"
#include "bounty/trainers.hpp"

namespace bounty::sim {

AgentView::AgentView(std::shared_ptr<const Dataset> train, const BountyService& service, AccessLedger& ledger)
    : train_(std::move(train)), service_(service), ledger_(ledger) {}

const Dataset& AgentView::train() {
  ledger_.reads.emplace_back("train");
  return *train_;
}

VersionId AgentView::latest_global_version() {
  ledger_.reads.emplace_back("events");
  const auto doc = service_.events(0, std::chrono::milliseconds(0)).json();
  std::uint32_t version = 0;
  for (const auto& e : doc.at("events")) {
    if (e.at("kind") == "global_update_accepted") version = e.at("payload").at("version").get<std::uint32_t>();
  }
  return VersionId{version};
}

std::vector<double> AgentView::global_train_predictions(VersionId version) {
  ledger_.reads.push_back("train-predictions/" + std::to_string(version.value));
  const auto result = service_.train_predictions(std::to_string(version.value));
  if (result.status != 200) {
    throw Error(Errc::unknown_version, "train predictions unavailable for version " + std::to_string(version.value));
  }
  std::vector<double> out;
  out.reserve(train_->rows());
  std::string_view body = result.body;
  body.remove_prefix(std::min(body.size(), body.find('\n') + 1));
  while (!body.empty()) {
    const auto end = body.find('\n');
    const auto line = body.substr(0, end);
    const auto comma = line.find(',');
    double value = 0.0;
    std::from_chars(line.data() + comma + 1, line.data() + line.size(), value);
    out.push_back(value);
    if (end == std::string_view::npos) break;
    body.remove_prefix(end + 1);
  }
  return out;
}

namespace {

struct Atom {
  std::size_t feature = 0;
  Predicate predicate;
  std::vector<std::uint8_t> mask;
};

struct Candidate {
  Predicate predicate;
  std::vector<std::uint8_t> mask;
  std::size_t count = 0;
};

Atom category_atom(const Dataset& train, std::size_t f, std::int32_t code) {
  const auto& spec = train.schema().feature(f);
  Atom a{f, Predicate::compare(spec.name, CompareOp::eq, spec.allowed_values[static_cast<std::size_t>(code)]), {}};
  const auto codes = train.codes(f);
  a.mask.resize(train.rows());
  for (std::size_t r = 0; r < train.rows(); ++r) a.mask[r] = codes[r] == code;
  return a;
}

Atom threshold_atom(const Dataset& train, std::size_t f, double t, bool below) {
  const auto& name = train.schema().feature(f).name;
  Atom a{f, Predicate::compare(name, below ? CompareOp::lt : CompareOp::ge, t), {}};
  const auto values = train.numeric(f);
  a.mask.resize(train.rows());
  for (std::size_t r = 0; r < train.rows(); ++r) a.mask[r] = below ? values[r] < t : values[r] >= t;
  return a;
}

std::vector<Candidate> expand(const std::vector<Atom>& atoms, bool pairs, std::size_t min_rows) {
  std::vector<Candidate> out;
  auto push = [&](Predicate p, std::vector<std::uint8_t> mask) {
    const auto count = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
    if (count >= min_rows) out.push_back(Candidate{std::move(p), std::move(mask), count});
  };
  for (const auto& a : atoms) push(a.predicate, a.mask);
  if (!pairs) return out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      if (atoms[i].feature == atoms[j].feature) continue;
      std::vector<std::uint8_t> mask(atoms[i].mask.size());
      for (std::size_t r = 0; r < mask.size(); ++r) mask[r] = atoms[i].mask[r] & atoms[j].mask[r];
      push(Predicate::all_of({atoms[i].predicate, atoms[j].predicate}), std::move(mask));
    }
  }
  return out;
}

// Sum over the group of the squared-error reduction of `h` against `current`,
// divided by n: the weighted loss gap the acceptance test measures.
double train_gain(std::span<const double> labels, std::span<const double> current, std::span<const double> h,
                  const std::vector<std::uint8_t>& mask) {
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (!mask[r]) continue;
    const double a = current[r] - labels[r];
    const double b = h[r] - labels[r];
    total += a * a - b * b;
  }
  return total / static_cast<double>(labels.size());
}

Dataset subset(const Dataset& train, const std::vector<std::uint8_t>& mask) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (mask[r]) rows.push_back(r);
  }
  return train.select(rows);
}

std::vector<double> quantiles(std::span<const double> values, std::size_t q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  for (std::size_t k = 1; k < q; ++k) {
    const double t = sorted[k * (sorted.size() - 1) / q];
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

ModelBundle make_bundle(Predicate group, Hypothesis h, const std::string& note) {
  ModelBundle b{std::move(group), std::move(h), {}};
  b.metadata.note = note;
  return b;
}

class AgentBase : public Agent {
 public:
  AgentBase(std::string name, std::size_t min_rows) : name_(std::move(name)), min_rows_(min_rows) {}
  const std::string& name() const override { return name_; }

 protected:
  bool fresh(const ModelBundle& b) const { return !submitted_.contains(serialize_bundle(b)); }
  void remember(const ModelBundle& b) { submitted_.insert(serialize_bundle(b)); }

  std::string name_;
  std::size_t min_rows_;
  std::set<std::string> submitted_;
};

// Hand-picked features and thresholds; scores each group by how far the
// current global model is off there, then fits a model on the best few.
class ManualConditioner final : public AgentBase {
 public:
  ManualConditioner(const nlohmann::json& spec, const Schema& schema)
      : AgentBase(spec.at("name").get<std::string>(), spec.value("min_rows", std::size_t{100})),
        model_(spec.value("model", std::string("linear"))),
        pairs_(spec.value("pairs", true)),
        shortlist_(spec.value("shortlist", std::size_t{8})),
        tree_depth_(spec.value("tree_depth", std::size_t{3})),
        ridge_(spec.value("ridge", 1.0)) {
    if (model_ != "linear" && model_ != "tree") throw Error(Errc::bad_spec, "model must be linear or tree");
    for (const auto& f : spec.at("features")) {
      const auto name = f.get<std::string>();
      const auto index = schema.find(name);
      if (!index) throw Error(Errc::bad_spec, "agent " + name_ + " names unknown feature '" + name + "'");
      features_.push_back(*index);
      if (schema.feature(*index).kind == FeatureKind::numeric) {
        const auto& th = spec.value("thresholds", nlohmann::json::object());
        if (!th.contains(name)) throw Error(Errc::bad_spec, "numeric feature '" + name + "' needs thresholds");
        thresholds_[*index] = th[name].get<std::vector<double>>();
      }
    }
  }

  std::string_view kind() const override { return "manual_conditioner"; }

  std::optional<ModelBundle> propose(AgentView& view) override {
    const auto& train = view.train();
    const auto version = view.latest_global_version();
    const auto current = view.global_train_predictions(version);
    const auto labels = train.labels();

    std::vector<Atom> atoms;
    for (auto f : features_) {
      if (train.schema().feature(f).kind == FeatureKind::categorical) {
        const auto levels = static_cast<std::int32_t>(train.schema().feature(f).allowed_values.size());
        for (std::int32_t c = 0; c < levels; ++c) atoms.push_back(category_atom(train, f, c));
      } else {
        for (double t : thresholds_[f]) {
          atoms.push_back(threshold_atom(train, f, t, true));
          atoms.push_back(threshold_atom(train, f, t, false));
        }
      }
    }
    auto candidates = expand(atoms, pairs_, min_rows_);

    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      double sum = 0.0;
      for (std::size_t r = 0; r < labels.size(); ++r) {
        if (candidates[i].mask[r]) sum += labels[r] - current[r];
      }
      ranked.emplace_back(sum * sum / static_cast<double>(candidates[i].count), i);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    std::optional<ModelBundle> best;
    double best_gain = 0.0;
    std::size_t tried = 0;
    for (const auto& [proxy, i] : ranked) {
      if (tried == shortlist_) break;
      const auto& c = candidates[i];
      const auto sub = subset(train, c.mask);
      Hypothesis h = model_ == "linear" ? Hypothesis{fit_linear(sub, ridge_)}
                                        : Hypothesis{fit_tree(sub, tree_depth_, std::max<std::size_t>(20, min_rows_ / 5))};
      auto bundle = make_bundle(c.predicate, std::move(h), name_);
      if (!fresh(bundle)) continue;
      ++tried;
      const auto hp = predict(bundle.hypothesis, train);
      const double gain = train_gain(labels, current, hp, c.mask);
      if (gain > best_gain) {
        best_gain = gain;
        best = std::move(bundle);
      }
    }
    if (best) remember(*best);
    return best;
  }

 private:
  std::string model_;
  bool pairs_;
  std::size_t shortlist_;
  std::size_t tree_depth_;
  double ridge_;
  std::vector<std::size_t> features_;
  std::map<std::size_t, std::vector<double>> thresholds_;
};

// Trains on the whole dataset with a progressively larger model and
// submits it for g = TRUE.
class KaggleStyle final : public AgentBase {
 public:
  explicit KaggleStyle(const nlohmann::json& spec)
      : AgentBase(spec.at("name").get<std::string>(), 0),
        trainer_(spec.value("trainer", std::string("tree"))),
        depth_(spec.value("start_depth", std::size_t{2})),
        max_depth_(spec.value("max_depth", std::size_t{8})),
        min_leaf_(spec.value("min_leaf", std::size_t{50})) {
    if (trainer_ != "tree" && trainer_ != "linear") throw Error(Errc::bad_spec, "trainer must be tree or linear");
  }

  std::string_view kind() const override { return "kaggle_style"; }

  std::optional<ModelBundle> propose(AgentView& view) override {
    const auto& train = view.train();
    std::optional<ModelBundle> out;
    if (trainer_ == "linear") {
      out = make_bundle(Predicate::always_true(), fit_linear(train, 0.0), name_);
    } else if (depth_ <= max_depth_) {
      out = make_bundle(Predicate::always_true(), fit_tree(train, depth_++, min_leaf_), name_);
    }
    if (!out || !fresh(*out)) return std::nullopt;
    remember(*out);
    return out;
  }

 private:
  std::string trainer_;
  std::size_t depth_;
  std::size_t max_depth_;
  std::size_t min_leaf_;
};

// Enumerates single and paired conditions over quantile thresholds and
// category levels, scores a seeded sample within a budget on train residuals
// and fits the most promising few.
class AutomatedSearcher final : public AgentBase {
 public:
  explicit AutomatedSearcher(const nlohmann::json& spec)
      : AgentBase(spec.at("name").get<std::string>(), spec.value("min_rows", std::size_t{100})),
        budget_(spec.value("budget", std::size_t{200})),
        quantiles_(spec.value("quantiles", std::size_t{4})),
        model_(spec.value("model", std::string("linear"))),
        shortlist_(spec.value("shortlist", std::size_t{3})),
        rng_(spec.value("seed", std::uint64_t{1})) {
    if (quantiles_ < 2) throw Error(Errc::bad_spec, "quantiles must be >= 2");
    if (model_ != "constant" && model_ != "linear") throw Error(Errc::bad_spec, "model must be constant or linear");
  }

  std::string_view kind() const override { return "automated_searcher"; }

  std::optional<ModelBundle> propose(AgentView& view) override {
    const auto& train = view.train();
    const auto version = view.latest_global_version();
    const auto current = view.global_train_predictions(version);
    const auto labels = train.labels();

    std::vector<Atom> atoms;
    for (std::size_t f = 0; f < train.schema().feature_count(); ++f) {
      const auto& spec = train.schema().feature(f);
      if (spec.kind == FeatureKind::categorical) {
        for (std::int32_t c = 0; c < static_cast<std::int32_t>(spec.allowed_values.size()); ++c) {
          atoms.push_back(category_atom(train, f, c));
        }
      } else {
        for (double t : quantiles(train.numeric(f), quantiles_)) {
          atoms.push_back(threshold_atom(train, f, t, true));
          atoms.push_back(threshold_atom(train, f, t, false));
        }
      }
    }
    auto candidates = expand(atoms, true, min_rows_);
    for (std::size_t i = candidates.size(); i > 1; --i) {
      std::swap(candidates[i - 1], candidates[rng_.below(i)]);
    }

    // Rank a budget of candidates by w * (mean residual)^2, then fit the
    // shortlist and keep the largest train gain.
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < candidates.size() && ranked.size() < budget_; ++i) {
      double sum = 0.0;
      for (std::size_t r = 0; r < labels.size(); ++r) {
        if (candidates[i].mask[r]) sum += labels[r] - current[r];
      }
      ranked.emplace_back(sum * sum / static_cast<double>(candidates[i].count), i);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    std::optional<ModelBundle> best;
    double best_gain = 0.0;
    std::size_t tried = 0;
    for (const auto& [proxy, i] : ranked) {
      if (tried == shortlist_) break;
      const auto& c = candidates[i];
      const auto sub = subset(train, c.mask);
      Hypothesis h = model_ == "linear" ? Hypothesis{fit_linear(sub, 1.0)} : Hypothesis{fit_constant(sub)};
      auto bundle = make_bundle(c.predicate, std::move(h), name_);
      if (!fresh(bundle)) continue;
      ++tried;
      const auto hp = predict(bundle.hypothesis, train);
      const double gain = train_gain(labels, current, hp, c.mask);
      if (gain > best_gain) {
        best_gain = gain;
        best = std::move(bundle);
      }
    }
    if (best) remember(*best);
    return best;
  }

 private:
  std::size_t budget_;
  std::size_t quantiles_;
  std::string model_;
  std::size_t shortlist_;
  Rng rng_;
};

}  // namespace

std::unique_ptr<Agent> make_agent(const nlohmann::json& spec, const Schema& schema) {
  try {
    const auto kind = spec.at("kind").get<std::string>();
    if (kind == "manual_conditioner") return std::make_unique<ManualConditioner>(spec, schema);
    if (kind == "kaggle_style") return std::make_unique<KaggleStyle>(spec);
    if (kind == "automated_searcher") return std::make_unique<AutomatedSearcher>(spec);
    throw Error(Errc::bad_spec, "unknown agent kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_spec, std::string("malformed agent: ") + e.what());
  }
}

}  // namespace bounty::sim
