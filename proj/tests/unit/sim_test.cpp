#include <gtest/gtest.h>

#include <cmath>

#include "bounty/error.hpp"
#include "bounty/sim.hpp"

using namespace bounty;

namespace {

nlohmann::json linear_task(double sigma) {
  return {{"seed", 5},
          {"rows", 500},
          {"label", {{"name", "y"}, {"range", {-1e6, 1e6}}}},
          {"features",
           {{{"name", "a"}, {"kind", "numeric"}, {"range", {0, 10}}},
            {{"name", "b"}, {"kind", "numeric"}, {"range", {-5, 5}}},
            {{"name", "g"}, {"kind", "categorical"}, {"values", {"p", "q"}}}}},
          {"base", {{"intercept", 7}, {"coefficients", {{"a", 3}, {"b", -2}}}}},
          {"noise_sigma", sigma}};
}

sim::Scenario small_scenario() {
  auto s = sim::fuzz_scenario(17);
  s.rounds = 2;
  return s;
}

}  // namespace

TEST(GenerateTask, NoiselessLinear) {
  const auto d = sim::generate_task(linear_task(0));
  ASSERT_EQ(d.rows(), 500u);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const double a = d.numeric(0)[r];
    const double b = d.numeric(1)[r];
    ASSERT_GE(a, 0);
    ASSERT_LE(a, 10);
    EXPECT_NEAR(d.labels()[r], 7 + 3 * a - 2 * b, 1e-6);
  }
}

TEST(GenerateTask, TwoRegimes) {
  auto spec = linear_task(0);
  spec["regimes"] = {{{"when", {{"g", {"q"}}}}, {"intercept", 100}, {"coefficients", {{"a", -3}}}}};
  const auto d = sim::generate_task(spec);
  std::size_t q = 0;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const double a = d.numeric(0)[r];
    const double b = d.numeric(1)[r];
    const bool in_q = d.codes(2)[r] == 1;
    q += in_q;
    EXPECT_NEAR(d.labels()[r], in_q ? 107 - 2 * b : 7 + 3 * a - 2 * b, 1e-6);
  }
  EXPECT_GT(q, 150u);
  EXPECT_LT(q, 350u);
}

TEST(GenerateTask, DeterministicAndClamped) {
  auto spec = linear_task(50);
  spec["label"]["range"] = {0, 40};
  const auto a = sim::generate_task(spec);
  EXPECT_EQ(a, sim::generate_task(spec));
  for (double y : a.labels()) {
    EXPECT_GE(y, 0);
    EXPECT_LE(y, 40);
  }
  spec["seed"] = 6;
  EXPECT_NE(a, sim::generate_task(spec));
}

TEST(GenerateTask, BadSpec) {
  auto spec = linear_task(0);
  spec["base"]["coefficients"]["nope"] = 1;
  EXPECT_THROW(sim::generate_task(spec), Error);
  spec = linear_task(0);
  spec.erase("rows");
  EXPECT_THROW(sim::generate_task(spec), Error);
}

TEST(Scenario, JsonRoundTrip) {
  const auto s = sim::fuzz_scenario(3);
  EXPECT_EQ(sim::to_json(sim::scenario_from_json(sim::to_json(s))), sim::to_json(s));
  const auto toy = sim::load_scenario(std::filesystem::path(BOUNTY_SOURCE_DIR) / "data/scenarios/southern-toy.json");
  EXPECT_EQ(toy.agents.size(), 6u);
}

TEST(Harness, SingleKaggleAgentLocalEqualsGlobal) {
  auto s = small_scenario();
  s.agents = {{{"name", "solo"}, {"kind", "kaggle_style"}, {"trainer", "tree"}, {"start_depth", 1}, {"max_depth", 5},
               {"min_leaf", 20}}};
  s.rounds = 5;
  sim::RunOptions options;
  options.keep_service = true;
  const auto run = sim::run_competition(s, options);
  const auto& comp = run.service->competition();
  EXPECT_GT(run.global_acceptances, 0u);
  EXPECT_EQ(comp.global().pdl(), comp.local("solo").pdl());
  for (const auto& sub : run.submissions) {
    ASSERT_TRUE(sub.outcome);
    EXPECT_TRUE(sub.whole_dataset);
    EXPECT_EQ(sub.outcome->global.accepted, sub.outcome->local.accepted);
  }
}

TEST(Harness, RunsAreDeterministic) {
  const auto s = small_scenario();
  const auto a = sim::run_competition(s);
  const auto b = sim::run_competition(s);
  EXPECT_EQ(a.final_state_hash, b.final_state_hash);
  EXPECT_EQ(a.transcript, b.transcript);
  EXPECT_EQ(sim::replay_transcript(a.transcript), a.final_state_hash);
}

TEST(Harness, AgentsOnlyReadPublicData) {
  const auto run = sim::run_competition(small_scenario());
  ASSERT_FALSE(run.ledgers.empty());
  std::size_t reads = 0;
  for (const auto& ledger : run.ledgers) {
    for (const auto& r : ledger.reads) {
      ++reads;
      EXPECT_TRUE(r == "train" || r == "events" || r.rfind("train-predictions/", 0) == 0) << r;
    }
  }
  EXPECT_GT(reads, 0u);
}

TEST(Harness, GlobalBeatsEveryLocalOnValidation) {
  const auto run = sim::run_competition(small_scenario());
  ASSERT_EQ(run.leaderboard.front().name, kGlobalModelName);
  for (const auto& e : run.leaderboard) EXPECT_LE(run.leaderboard.front().validation_loss, e.validation_loss);
}

TEST(Harness, CrashAndRestartKeepsTheHash) {
  const auto s = small_scenario();
  const auto clean = sim::run_competition(s);
  const auto dir = std::filesystem::temp_directory_path() / ("bounty-sim-crash-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  sim::RunOptions options;
  options.crash_after = 3;
  options.state_dir = dir;
  const auto crashed = sim::run_competition(s, options);
  EXPECT_EQ(crashed.final_state_hash, clean.final_state_hash);
  std::filesystem::remove_all(dir);
}

TEST(Harness, TranscriptTamperingIsDetected) {
  const auto run = sim::run_competition(small_scenario());
  auto t = run.transcript;
  for (auto& e : t.at("entries")) {
    if (e.contains("global") && e["global"]["accepted"].get<bool>()) {
      e["global"]["overall_after"] = e["global"]["overall_after"].get<double>() * 0.5;
      break;
    }
  }
  EXPECT_THROW(sim::replay_transcript(t), Error);
}
