#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bounty/competition.hpp"
#include "bounty/rng.hpp"
#include "bounty/service.hpp"
#include "bounty/split.hpp"

namespace bounty::sim {

// Synthetic regression task. Spec document:
// {
//   "seed": 7, "rows": 20000, "noise_sigma": 5000,
//   "label": {"name": "PINCP", "range": [0, 100000]},
//   "features": [
//     {"name": "AGEP", "kind": "numeric", "range": [17, 95], "integer": true},
//     {"name": "SEX", "kind": "categorical", "values": ["1", "2"], "weights": [1, 1]}],
//   "base": {"intercept": 1000, "coefficients": {"AGEP": 300}},
//   "regimes": [{"when": {"SEX": ["2"]}, "intercept": -4000, "coefficients": {"WKHP": 150}}],
//   "hinges": [{"feature": "AGEP", "knot": 60, "slope": -900}]
// }
// label = base + every matching regime + sum of slope * max(0, x - knot)
//         + noise_sigma * N(0, 1), clamped to the label range.
Schema task_schema(const nlohmann::json& spec);
// Throws Errc::bad_spec.
Dataset generate_task(const nlohmann::json& spec);

// Loads or generates the splits described by a config's "data" member:
//   {"schema": <path or object>, "source": <csv>, "weights": [tr, va, te]}
//   {"schema": ..., "train": <csv>, "validation": <csv>, "test": <csv>}
//   {"synthetic": <task spec>, "weights": [tr, va, te]}
// Paths are relative to `base_dir`; `seed` drives the split.
CompetitionData materialize_data(const nlohmann::json& data, const std::filesystem::path& base_dir,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Agents

// Record of everything an agent read.
struct AccessLedger {
  std::vector<std::string> reads;
};

// What an agent may see: the training split and published global training
// predictions, fetched through the public API.
class AgentView {
 public:
  AgentView(std::shared_ptr<const Dataset> train, const BountyService& service, AccessLedger& ledger);

  const Dataset& train();
  // Latest published global version, from the public event feed.
  VersionId latest_global_version();
  std::vector<double> global_train_predictions(VersionId version);

 private:
  std::shared_ptr<const Dataset> train_;
  const BountyService& service_;
  AccessLedger& ledger_;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual const std::string& name() const = 0;
  virtual std::string_view kind() const = 0;
  // Next bundle to submit, or nothing when the agent has no new idea.
  virtual std::optional<ModelBundle> propose(AgentView& view) = 0;
};

// Builds an agent from {"name", "kind", ...}. Kinds:
//   manual_conditioner  {"features": [...], "thresholds": {"AGEP": [30, 60]},
//                        "model": "linear" | "tree", "pairs": true}
//   kaggle_style        {"trainer": "tree" | "linear", "start_depth": 2,
//                        "max_depth": 8, "min_leaf": 50}
//   automated_searcher  {"budget": 200, "quantiles": 4, "seed": 1,
//                        "model": "linear" | "constant", "shortlist": 3}
std::unique_ptr<Agent> make_agent(const nlohmann::json& spec, const Schema& schema);

// ---------------------------------------------------------------------------
// Runs

struct Scenario {
  std::string name;
  nlohmann::json task;
  SplitWeights weights;
  nlohmann::json config;  // competition config without "data"
  std::size_t rounds = 1;
  std::vector<nlohmann::json> agents;
  // Simulated minutes between consecutive submissions.
  std::int64_t minutes_between_submissions = 60;
};

Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

// A small random scenario for property checks.
Scenario fuzz_scenario(std::uint64_t seed);

struct SubmissionRecord {
  std::string agent;
  std::uint64_t id = 0;
  int status = 0;  // HTTP status of the submit call
  bool whole_dataset = false;
  std::optional<SubmissionOutcome> outcome;
};

struct RunResult {
  nlohmann::json transcript;
  FinalReport report;
  std::vector<LeaderboardEntry> leaderboard;
  std::vector<SubmissionRecord> submissions;
  std::vector<CompetitionEvent> events;
  std::vector<AccessLedger> ledgers;
  std::string final_state_hash;
  std::size_t global_acceptances = 0;
  std::size_t global_repairs = 0;
  double alpha = 0.0;
  double base_validation_loss = 0.0;
  // Set when the caller asked to keep the competition for inspection.
  std::shared_ptr<BountyService> service;
};

struct RunOptions {
  std::optional<double> alpha;  // overrides the scenario's alpha
  bool keep_service = false;
  // Crash the service after this many submissions and restart it from its
  // state directory (which must then be set).
  std::optional<std::size_t> crash_after;
  std::filesystem::path state_dir;
};

RunResult run_competition(const Scenario& scenario, const RunOptions& options = {});

// Rebuilds the competition from a transcript and returns its state hash.
// Throws Errc::replay_mismatch when a recorded verdict diverges.
std::string replay_transcript(const nlohmann::json& transcript, const std::filesystem::path& base_dir = {});

struct SweepRow {
  double alpha = 0.0;
  std::size_t acceptances = 0;
  std::size_t repairs = 0;
  double global_validation_loss = 0.0;
};

std::vector<SweepRow> alpha_sweep(const Scenario& scenario, const std::vector<double>& alphas);

// Human-readable claims listing, one PASS/FAIL line per claim.
std::string claims_summary(const Scenario& scenario, const RunResult& run, const std::vector<SweepRow>& sweep);

}  // namespace bounty::sim
