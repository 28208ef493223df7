#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bounty/bundle.hpp"
#include "bounty/dataset.hpp"
#include "bounty/pdl.hpp"
#include "bounty/timestamp.hpp"

namespace bounty {

enum class RewardMode { flat, time_scaled };

// time_scaled multiplies points by (1 + rate * days since start_time).
struct RewardPolicy {
  RewardMode mode = RewardMode::flat;
  double rate = 0.0;

  bool operator==(const RewardPolicy&) const = default;
};

// How a base model f0 is obtained from the training split.
struct BaseModelSpec {
  enum class Kind { constant, tree, hypothesis };
  Kind kind = Kind::constant;
  std::size_t max_depth = 1;  // tree only
  std::size_t min_leaf = 1;   // tree only
  std::optional<Hypothesis> hypothesis;

  bool operator==(const BaseModelSpec&) const = default;
};

struct CompetitionConfig {
  double alpha = 1.0;
  double repair_epsilon = 0.0;
  std::uint32_t daily_submission_limit = 10;
  RewardPolicy reward;
  Timestamp start_time{};
  std::uint64_t seed = 0;
  BaseModelSpec global_base;
  BaseModelSpec local_base;
  Limits limits;
  std::size_t queue_depth = 1024;
  // Where the data comes from. Interpreted by the loaders, not by the core.
  nlohmann::json data = nlohmann::json::object();

  // Throws Errc::bad_config.
  void validate() const;
};

nlohmann::json to_json(const CompetitionConfig& config);
// A global_base of {"kind":"bundle","path":...} is loaded relative to
// `base_dir` and stored inline, so the result is self-contained.
CompetitionConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {},
                                   const Schema* schema = nullptr);

struct CompetitionData {
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> validation;
  std::shared_ptr<const Dataset> test;
};

// f0 for `spec`, fitted on `train` where needed.
Hypothesis build_base_model(const BaseModelSpec& spec, const Dataset& train);

// ---------------------------------------------------------------------------

enum class RejectReason { none, empty_group, below_threshold };

std::string_view to_string(RejectReason reason);

struct AppliedRepair {
  std::string group;  // canonical predicate text
  VersionId target;   // version the group is routed to
  VersionId version;  // version created by the repair node
};

struct Verdict {
  bool accepted = false;
  RejectReason reason = RejectReason::none;
  double weight = 0.0;          // w on the validation split
  double loss_current = 0.0;    // L(f, g)
  double loss_candidate = 0.0;  // L(h, g)
  double improvement = 0.0;     // w * (L(f, g) - L(h, g))
  double overall_before = 0.0;
  double overall_after_update = 0.0;  // after the prepend, before repairs
  double overall_after = 0.0;         // after repairs
  std::vector<AppliedRepair> repairs;
  double points = 0.0;
  VersionId update_version;  // version created by the update node
  VersionId version;         // head once the submission is fully applied
};

nlohmann::json to_json(const Verdict& verdict);
Verdict verdict_from_json(const nlohmann::json& doc);

// Dry-run acceptance test of `bundle` against version `head` of `pdl`.
Verdict evaluate_acceptance(const PointerDecisionList& pdl, const ModelBundle& bundle,
                            const Dataset& validation, double alpha);

struct GroupRecord {
  Predicate predicate;
  std::string key;  // canonical text; identical predicates share a record
  VersionId introduced_at;
  VersionId best_version;
  double best_val_loss = 0.0;
  double current_val_loss = 0.0;
};

// One PDL with its cached predictions and group registry.
class ModelTrack {
 public:
  ModelTrack(std::shared_ptr<const Schema> schema, Hypothesis base, const Limits& limits,
             const CompetitionData& data);

  const PointerDecisionList& pdl() const { return pdl_; }
  const PredictionCache& train() const { return train_; }
  const PredictionCache& validation() const { return validation_; }
  const std::vector<GroupRecord>& groups() const { return groups_; }
  const GroupMask& group_mask(std::size_t record) const { return masks_[record]; }
  // Head after each fully applied acceptance, starting with version 0.
  const std::vector<VersionId>& published() const { return published_; }
  std::size_t updates() const { return updates_; }
  std::size_t repairs() const { return repairs_; }
  const std::optional<Timestamp>& last_accepted() const { return last_accepted_; }

  double validation_loss() const;
  double validation_loss(VersionId version) const;

  Verdict evaluate(const ModelBundle& bundle, double alpha) const;
  // Evaluates and, on acceptance, prepends the update and runs repairs to a
  // fixpoint. A rejection leaves the track untouched.
  Verdict apply(const ModelBundle& bundle, double alpha, double repair_epsilon, Timestamp now);

  nlohmann::json state_json() const;

 private:
  void refresh_records(VersionId version);
  std::vector<AppliedRepair> run_repairs(double repair_epsilon);

  PointerDecisionList pdl_;
  PredictionCache train_;
  PredictionCache validation_;
  std::vector<GroupRecord> groups_;
  std::vector<GroupMask> masks_;
  std::map<std::string, std::size_t> by_key_;
  std::vector<VersionId> published_;
  std::size_t updates_ = 0;
  std::size_t repairs_ = 0;
  std::optional<Timestamp> last_accepted_;
};

// ---------------------------------------------------------------------------

class RateLimitedError : public Error {
 public:
  RateLimitedError(const std::string& message, Timestamp reset_at)
      : Error(Errc::rate_limited, message), reset_at_(reset_at) {}
  Timestamp reset_at() const { return reset_at_; }

 private:
  Timestamp reset_at_;
};

struct SubmissionOutcome {
  Verdict global;
  Verdict local;
};

struct LogEntry {
  enum class Kind { add_team, remove_team, freeze, submission };
  Kind kind = Kind::submission;
  std::uint64_t sequence = 0;
  std::string team;
  Timestamp time{};
  std::optional<ModelBundle> bundle;
  std::optional<SubmissionOutcome> outcome;
};

nlohmann::json to_json(const LogEntry& entry);
LogEntry log_entry_from_json(const nlohmann::json& doc, const Schema& schema, const Limits& limits);

inline constexpr const char* kGlobalModelName = "Global Model";

struct LeaderboardEntry {
  std::string name;
  bool global = false;
  double validation_loss = 0.0;
  std::size_t updates = 0;
  std::size_t repairs = 0;
  double points = 0.0;
  std::optional<Timestamp> last_accepted;
};

nlohmann::json to_json(const LeaderboardEntry& entry);

struct ReportRow {
  std::string model;
  double training_loss = 0.0;
  double validation_loss = 0.0;
  double test_loss = 0.0;
  std::size_t updates = 0;
  std::size_t repairs = 0;
};

struct FinalReport {
  std::vector<ReportRow> rows;

  nlohmann::json to_json() const;
  // Fixed-width text table with the column headers below.
  std::string to_text() const;
  static const std::vector<std::string>& columns();
};

struct Team {
  std::string id;
  std::size_t order = 0;  // registration order
  Timestamp registered_at{};
  bool active = true;
  double points = 0.0;
  std::unique_ptr<ModelTrack> local;
};

// The whole competition: global PDL, one local PDL per team, scores and the
// log that reproduces them. Not internally synchronized.
class Competition {
 public:
  Competition(CompetitionConfig config, CompetitionData data);

  const CompetitionConfig& config() const { return config_; }
  const CompetitionData& data() const { return data_; }
  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }

  // Throws Errc::duplicate_team.
  void add_team(const std::string& id, Timestamp now);
  // Throws Errc::unknown_team.
  void remove_team(const std::string& id, Timestamp now);
  void freeze(Timestamp now);
  bool frozen() const { return frozen_; }

  bool has_team(const std::string& id) const;
  const Team& team(const std::string& id) const;
  std::vector<std::string> team_ids() const;  // active teams, registration order

  std::uint32_t submissions_today(const std::string& team, Timestamp now) const;

  // Throws Errc::unknown_team, Errc::frozen, RateLimitedError or
  // BundleError; none of them changes the state.
  SubmissionOutcome apply_submission(const std::string& team, const ModelBundle& bundle, Timestamp now);

  const ModelTrack& global() const { return *global_; }
  const ModelTrack& local(const std::string& team) const;

  std::vector<LeaderboardEntry> leaderboard() const;
  FinalReport final_report() const;

  // SHA-256 of the canonical state document (models, registries, scores,
  // teams, split digests). The log and the data's location are not part of it.
  std::string state_hash() const;
  nlohmann::json state_json() const;
  nlohmann::json state_summary() const;

  const std::vector<LogEntry>& log() const { return log_; }

  // Rebuilds a competition from `entries`, checking every recorded verdict.
  // Throws Errc::replay_mismatch on any divergence.
  static Competition replay(CompetitionConfig config, CompetitionData data,
                            const std::vector<LogEntry>& entries);
  // Applies one logged entry. Submission verdicts are compared against the
  // recorded ones when `check` is set.
  void apply_entry(const LogEntry& entry, bool check);

 private:
  Team& team_mut(const std::string& id);
  std::uint64_t next_sequence() const { return log_.size() + 1; }

  CompetitionConfig config_;
  CompetitionData data_;
  std::shared_ptr<const Schema> schema_;
  Hypothesis local_base_;
  std::unique_ptr<ModelTrack> global_;
  std::vector<Team> teams_;
  std::map<std::string, std::size_t> team_index_;
  std::map<std::pair<std::string, std::int64_t>, std::uint32_t> daily_counts_;
  bool frozen_ = false;
  std::vector<LogEntry> log_;
};

}  // namespace bounty
