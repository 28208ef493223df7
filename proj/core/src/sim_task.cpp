#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "bounty/error.hpp"
#include "bounty/sim.hpp"

namespace bounty::sim {

namespace {

[[noreturn]] void bad_spec(const std::string& message) { throw Error(Errc::bad_spec, "bad task spec: " + message); }

struct NumericGen {
  double lo = 0.0;
  double hi = 1.0;
  bool integer = false;
};

struct CategoricalGen {
  std::vector<double> cumulative;
};

// Additive term set: intercept plus numeric slopes.
struct Terms {
  double intercept = 0.0;
  std::vector<std::pair<std::size_t, double>> slopes;
};

struct Regime {
  // feature index -> accepted codes
  std::vector<std::pair<std::size_t, std::vector<std::uint8_t>>> when;
  Terms terms;
};

struct Hinge {
  std::size_t feature = 0;
  double knot = 0.0;
  double slope = 0.0;
};

double finite_number(const nlohmann::json& v, const std::string& what) {
  if (!v.is_number()) bad_spec(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad_spec(what + " must be finite");
  return x;
}

std::size_t numeric_feature(const Schema& schema, const std::string& name, const std::string& where) {
  auto f = schema.find(name);
  if (!f) bad_spec(where + " references unknown feature '" + name + "'");
  if (schema.feature(*f).kind != FeatureKind::numeric) bad_spec(where + " needs numeric feature '" + name + "'");
  return *f;
}

Terms parse_terms(const nlohmann::json& doc, const Schema& schema, const std::string& where) {
  Terms t;
  if (doc.contains("intercept")) t.intercept = finite_number(doc["intercept"], where + ".intercept");
  if (doc.contains("coefficients")) {
    if (!doc["coefficients"].is_object()) bad_spec(where + ".coefficients must be an object");
    for (const auto& [name, value] : doc["coefficients"].items()) {
      t.slopes.emplace_back(numeric_feature(schema, name, where), finite_number(value, where + "." + name));
    }
  }
  return t;
}

double apply_terms(const Terms& t, const std::vector<double>& numeric) {
  double y = t.intercept;
  for (const auto& [f, slope] : t.slopes) y += slope * numeric[f];
  return y;
}

}  // namespace

Schema task_schema(const nlohmann::json& spec) {
  try {
    if (!spec.is_object()) bad_spec("spec must be an object");
    const auto& label = spec.at("label");
    const auto& range = label.at("range");
    if (!range.is_array() || range.size() != 2) bad_spec("label.range must be [lo, hi]");
    LabelSpec label_spec{label.at("name").get<std::string>(), finite_number(range[0], "label.range"),
                         finite_number(range[1], "label.range")};
    std::vector<FeatureSpec> features;
    if (!spec.at("features").is_array() || spec["features"].empty()) bad_spec("features must be a nonempty array");
    for (const auto& f : spec["features"]) {
      FeatureSpec fs;
      fs.name = f.at("name").get<std::string>();
      const auto kind = f.at("kind").get<std::string>();
      if (kind == "numeric") {
        fs.kind = FeatureKind::numeric;
      } else if (kind == "categorical") {
        fs.kind = FeatureKind::categorical;
        fs.allowed_values = f.at("values").get<std::vector<std::string>>();
      } else {
        bad_spec("feature '" + fs.name + "' has unknown kind '" + kind + "'");
      }
      features.push_back(std::move(fs));
    }
    return Schema(std::move(features), std::move(label_spec));
  } catch (const nlohmann::json::exception& e) {
    bad_spec(e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::bad_spec) throw;
    bad_spec(e.what());
  }
}

Dataset generate_task(const nlohmann::json& spec) {
  auto schema = std::make_shared<const Schema>(task_schema(spec));
  std::vector<NumericGen> numeric(schema->feature_count());
  std::vector<CategoricalGen> categorical(schema->feature_count());
  std::vector<Regime> regimes;
  std::vector<Hinge> hinges;
  Terms base;
  std::size_t rows = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  try {
    const auto& rows_doc = spec.at("rows");
    if (!rows_doc.is_number_unsigned() && !(rows_doc.is_number_integer() && rows_doc.get<std::int64_t>() >= 0)) {
      bad_spec("rows must be a nonnegative integer");
    }
    rows = rows_doc.get<std::size_t>();
    seed = spec.value("seed", std::uint64_t{0});
    sigma = spec.contains("noise_sigma") ? finite_number(spec["noise_sigma"], "noise_sigma") : 0.0;
    if (sigma < 0.0) bad_spec("noise_sigma must be >= 0");

    for (std::size_t i = 0; i < schema->feature_count(); ++i) {
      const auto& f = spec["features"][i];
      if (schema->feature(i).kind == FeatureKind::numeric) {
        const auto& range = f.at("range");
        if (!range.is_array() || range.size() != 2) bad_spec("feature range must be [lo, hi]");
        auto& g = numeric[i];
        g.lo = finite_number(range[0], "range");
        g.hi = finite_number(range[1], "range");
        g.integer = f.value("integer", false);
        if (!(g.lo < g.hi)) bad_spec("feature '" + schema->feature(i).name + "' needs lo < hi");
        if (g.integer && (g.lo != std::floor(g.lo) || g.hi != std::floor(g.hi))) {
          bad_spec("integer feature '" + schema->feature(i).name + "' needs integer bounds");
        }
      } else {
        const auto count = schema->feature(i).allowed_values.size();
        std::vector<double> weights(count, 1.0);
        if (f.contains("weights")) {
          weights = f["weights"].get<std::vector<double>>();
          if (weights.size() != count) bad_spec("weights must match values for '" + schema->feature(i).name + "'");
        }
        double total = 0.0;
        for (double w : weights) {
          if (!(w > 0.0) || !std::isfinite(w)) bad_spec("category weights must be positive");
          total += w;
          categorical[i].cumulative.push_back(total);
        }
      }
    }
    if (spec.contains("base")) base = parse_terms(spec["base"], *schema, "base");
    if (spec.contains("regimes")) {
      for (const auto& r : spec["regimes"]) {
        Regime regime;
        for (const auto& [name, values] : r.at("when").items()) {
          auto f = schema->find(name);
          if (!f || schema->feature(*f).kind != FeatureKind::categorical) {
            bad_spec("regime condition needs categorical feature '" + name + "'");
          }
          std::vector<std::uint8_t> accept(schema->feature(*f).allowed_values.size(), 0);
          for (const auto& v : values) {
            auto code = schema->category_code(*f, v.get<std::string>());
            if (!code) bad_spec("regime value '" + v.get<std::string>() + "' not allowed for '" + name + "'");
            accept[static_cast<std::size_t>(*code)] = 1;
          }
          regime.when.emplace_back(*f, std::move(accept));
        }
        regime.terms = parse_terms(r, *schema, "regime");
        regimes.push_back(std::move(regime));
      }
    }
    if (spec.contains("hinges")) {
      for (const auto& h : spec["hinges"]) {
        hinges.push_back({numeric_feature(*schema, h.at("feature").get<std::string>(), "hinge"),
                          finite_number(h.at("knot"), "hinge.knot"), finite_number(h.at("slope"), "hinge.slope")});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    bad_spec(e.what());
  }

  Rng rng(seed);
  DatasetBuilder builder(schema);
  builder.reserve(rows);
  const auto& range = schema->label();
  std::vector<double> values(schema->feature_count(), 0.0);
  std::vector<std::int32_t> codes(schema->feature_count(), 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t f = 0; f < schema->feature_count(); ++f) {
      if (schema->feature(f).kind == FeatureKind::numeric) {
        const auto& g = numeric[f];
        double x;
        if (g.integer) {
          x = g.lo + static_cast<double>(rng.below(static_cast<std::uint64_t>(g.hi - g.lo) + 1));
        } else {
          x = rng.uniform(g.lo, g.hi);
        }
        values[f] = x;
        builder.set_numeric(f, x);
      } else {
        const auto& cumulative = categorical[f].cumulative;
        const double u = rng.uniform() * cumulative.back();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto code = static_cast<std::int32_t>(std::min<std::ptrdiff_t>(
            it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
        codes[f] = code;
        builder.set_category(f, code);
      }
    }
    double y = apply_terms(base, values);
    for (const auto& regime : regimes) {
      const bool match = std::all_of(regime.when.begin(), regime.when.end(), [&](const auto& cond) {
        return cond.second[static_cast<std::size_t>(codes[cond.first])] != 0;
      });
      if (match) y += apply_terms(regime.terms, values);
    }
    for (const auto& h : hinges) y += h.slope * std::max(0.0, values[h.feature] - h.knot);
    if (sigma > 0.0) y += sigma * rng.normal();
    builder.finish_row(std::clamp(y, range.lo, range.hi));
  }
  return std::move(builder).build();
}

// ---------------------------------------------------------------------------

namespace {

SplitWeights weights_from(const nlohmann::json& data) {
  SplitWeights w;
  if (data.contains("weights")) {
    const auto v = data["weights"].get<std::vector<double>>();
    if (v.size() != 3) throw Error(Errc::bad_config, "data.weights must have three entries");
    w = SplitWeights{v[0], v[1], v[2]};
  }
  return w;
}

std::shared_ptr<const Schema> schema_from(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  if (doc.is_string()) return std::make_shared<const Schema>(Schema::load((base_dir / doc.get<std::string>()).string()));
  return std::make_shared<const Schema>(Schema::from_json(doc));
}

CompetitionData from_split(SplitSet s) {
  return CompetitionData{std::make_shared<const Dataset>(std::move(s.train)),
                         std::make_shared<const Dataset>(std::move(s.validation)),
                         std::make_shared<const Dataset>(std::move(s.test))};
}

}  // namespace

CompetitionData materialize_data(const nlohmann::json& data, const std::filesystem::path& base_dir,
                                 std::uint64_t seed) {
  try {
    if (data.contains("synthetic")) {
      return from_split(split(generate_task(data["synthetic"]), weights_from(data), seed));
    }
    if (!data.contains("schema")) throw Error(Errc::bad_config, "data needs 'schema', or 'synthetic'");
    auto schema = schema_from(data["schema"], base_dir);
    auto path = [&](const char* key) { return (base_dir / data.at(key).get<std::string>()).string(); };
    if (data.contains("source")) {
      return from_split(split(load_csv_file(schema, path("source")), weights_from(data), seed));
    }
    if (data.contains("train")) {
      return CompetitionData{std::make_shared<const Dataset>(load_csv_file(schema, path("train"))),
                             std::make_shared<const Dataset>(load_csv_file(schema, path("validation"))),
                             std::make_shared<const Dataset>(load_csv_file(schema, path("test")))};
    }
    throw Error(Errc::bad_config, "data needs 'source' or 'train'/'validation'/'test'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_config, std::string("malformed data section: ") + e.what());
  }
}

}  // namespace bounty::sim
