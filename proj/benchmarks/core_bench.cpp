#include <benchmark/benchmark.h>

#include <memory>

#include "bounty/bundle.hpp"
#include "bounty/competition.hpp"
#include "bounty/pdl.hpp"
#include "bounty/sim.hpp"
#include "bounty/split.hpp"
#include "bounty/trainers.hpp"

using namespace bounty;

namespace {

nlohmann::json task(std::size_t rows) {
  return {{"seed", 1},
          {"rows", rows},
          {"label", {{"name", "y"}, {"range", {0, 100000}}}},
          {"features",
           {{{"name", "age"}, {"kind", "numeric"}, {"range", {18, 90}}, {"integer", true}},
            {{"name", "hours"}, {"kind", "numeric"}, {"range", {1, 80}}},
            {{"name", "sex"}, {"kind", "categorical"}, {"values", {"1", "2"}}},
            {{"name", "cow"}, {"kind", "categorical"}, {"values", {"1", "2", "3", "4", "5", "6"}}}}},
          {"base", {{"intercept", 5000}, {"coefficients", {{"age", 300}, {"hours", 400}}}}},
          {"regimes", {{{"when", {{"cow", {"6"}}}}, {"intercept", 8000}, {"coefficients", {{"hours", 300}}}}}},
          {"noise_sigma", 4000}};
}

const Dataset& dataset(std::size_t rows) {
  static std::map<std::size_t, std::unique_ptr<Dataset>> cache;
  auto& slot = cache[rows];
  if (!slot) slot = std::make_unique<Dataset>(sim::generate_task(task(rows)));
  return *slot;
}

const std::vector<std::string> kGroups = {
    R"(cow == "6")",
    R"(age < 30 AND sex == "2")",
    R"(hours >= 40 OR cow IN {"1", "3"})",
    R"(NOT (age >= 62) AND cow == "2")",
    R"(age >= 45 AND age < 62 AND hours > 20)",
};

// A PDL with `versions` prepends, every fourth one a repair.
PointerDecisionList build_pdl(const Dataset& d, std::size_t versions) {
  PointerDecisionList pdl(d.schema_ptr(), ConstantModel{30000});
  for (std::size_t i = 0; i < versions; ++i) {
    const auto g = parse_predicate(kGroups[i % kGroups.size()]);
    if (i % 4 == 3) {
      pdl.prepend_repair(g, VersionId{static_cast<std::uint32_t>(i / 2)});
    } else {
      LinearModel h;
      h.intercept = 1000.0 * static_cast<double>(i);
      h.numeric["age"] = 100.0 + static_cast<double>(i);
      pdl.prepend_update(g, h);
    }
  }
  return pdl;
}

}  // namespace

static void BM_EvalPredicate(benchmark::State& state) {
  const auto& d = dataset(static_cast<std::size_t>(state.range(0)));
  const auto p = parse_predicate(kGroups[4]);
  for (auto _ : state) benchmark::DoNotOptimize(eval_predicate(p, d));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvalPredicate)->Arg(10000)->Arg(100000);

static void BM_PdlPredictHead(benchmark::State& state) {
  const auto& d = dataset(20000);
  const auto pdl = build_pdl(d, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pdl.predict(pdl.current(), d));
  state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_PdlPredictHead)->Arg(8)->Arg(32)->Arg(128);

static void BM_PredictionCacheSync(benchmark::State& state) {
  const auto d = std::make_shared<const Dataset>(dataset(20000));
  const auto pdl = build_pdl(*d, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    PredictionCache cache(d);
    cache.sync(pdl);
    benchmark::DoNotOptimize(cache.at(pdl.current()).data());
  }
}
BENCHMARK(BM_PredictionCacheSync)->Arg(8)->Arg(32)->Arg(128);

static void BM_EvaluateAcceptance(benchmark::State& state) {
  const auto& d = dataset(20000);
  const auto pdl = build_pdl(d, 32);
  const ModelBundle b{parse_predicate(kGroups[0]), ConstantModel{45000}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_acceptance(pdl, b, d, 1.0));
}
BENCHMARK(BM_EvaluateAcceptance);

static void BM_FitTree(benchmark::State& state) {
  const auto& d = dataset(20000);
  for (auto _ : state) benchmark::DoNotOptimize(fit_tree(d, static_cast<std::size_t>(state.range(0)), 50));
}
BENCHMARK(BM_FitTree)->Arg(2)->Arg(6);

static void BM_FitLinear(benchmark::State& state) {
  const auto& d = dataset(20000);
  for (auto _ : state) benchmark::DoNotOptimize(fit_linear(d, 1.0));
}
BENCHMARK(BM_FitLinear);

static void BM_ParseBundle(benchmark::State& state) {
  const auto& d = dataset(20000);
  const auto text = serialize_bundle(ModelBundle{parse_predicate(kGroups[2]), fit_tree(d, 6, 20), {}});
  for (auto _ : state) benchmark::DoNotOptimize(parse_bundle(text, d.schema(), {}));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseBundle);

// One accepted submission on a competition that already has `range(0)`
// accepted updates, including repairs and both verdicts.
static void BM_ApplySubmission(benchmark::State& state) {
  const auto& d = dataset(20000);
  const auto parts = split(d, {0.7, 0.15, 0.15}, 5);
  CompetitionData data{std::make_shared<const Dataset>(parts.train), std::make_shared<const Dataset>(parts.validation),
                       std::make_shared<const Dataset>(parts.test)};
  CompetitionConfig config;
  config.alpha = 1.0;
  config.daily_submission_limit = 1000000;
  const auto start = *parse_timestamp("2024-06-01T00:00:00Z");
  Competition comp(config, data);
  comp.add_team("bench", start);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < n; ++i) {
    comp.apply_submission("bench", {parse_predicate(kGroups[i % kGroups.size()]), fit_tree(*data.train, 1 + i % 4, 50), {}},
                          start);
  }
  const ModelBundle next{Predicate::always_true(), fit_tree(*data.train, 7, 20), {}};
  for (auto _ : state) {
    state.PauseTiming();
    Competition copy = Competition::replay(comp.config(), comp.data(), comp.log());
    state.ResumeTiming();
    benchmark::DoNotOptimize(copy.apply_submission("bench", next, start));
  }
}
BENCHMARK(BM_ApplySubmission)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
