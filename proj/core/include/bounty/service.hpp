#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bounty/competition.hpp"

namespace bounty {

// Transport-neutral response. The HTTP adapter copies it onto the wire; the
// harness calls the service directly.
struct ApiResult {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

struct ServiceOptions {
  // Empty for an in-memory service with no log file.
  std::filesystem::path state_dir;
  // SHA-256 hex of the organizer token.
  std::string organizer_token_sha256;
  std::function<Timestamp()> clock = now_ms;
  // fsync the log after every append.
  bool sync_log = true;
};

struct CompetitionEvent {
  std::uint64_t sequence = 0;
  std::string kind;  // global_update_accepted | repair_applied | leaderboard_changed
  Timestamp time{};
  nlohmann::json payload;
};

nlohmann::json to_json(const CompetitionEvent& event);

// The competition host. Prechecks run on the caller's thread; every state
// change goes through one admission queue applied by a single worker thread
// in admission order. Reads take a shared lock and never block admission.
class BountyService {
 public:
  BountyService(Competition competition, ServiceOptions options);
  ~BountyService();

  BountyService(const BountyService&) = delete;
  BountyService& operator=(const BountyService&) = delete;

  // Rebuilds the service from a state directory written by init_state_dir,
  // replaying log.jsonl.
  static std::unique_ptr<BountyService> open(const std::filesystem::path& state_dir,
                                             ServiceOptions options = {});

  // `authorization` is the raw Authorization header value.
  ApiResult submit(std::string_view authorization, std::string_view body);
  ApiResult submission(std::string_view authorization, std::string_view id);
  ApiResult leaderboard() const;
  ApiResult train_predictions(std::string_view version) const;
  ApiResult events(std::uint64_t since, std::chrono::milliseconds wait) const;

  ApiResult add_team(std::string_view authorization, std::string_view body);
  ApiResult remove_team(std::string_view authorization, std::string_view id);
  ApiResult admin_state(std::string_view authorization) const;
  ApiResult freeze(std::string_view authorization);

  // Blocks until every admitted entry has been applied.
  void drain();
  // Stops the worker and drops queued entries without applying them, as a
  // crash would. The log keeps them.
  void abandon();

  // Callers must not hold the result across mutations; intended for tests
  // and the harness once drained.
  const Competition& competition() const { return competition_; }
  std::string state_hash() const;
  std::vector<CompetitionEvent> all_events() const;
  // Admitted log as a transcript (config, entries with verdicts, hash).
  nlohmann::json transcript() const;

 private:
  struct Job {
    std::uint64_t sequence = 0;
    LogEntry::Kind kind = LogEntry::Kind::submission;
    std::string team;
    Timestamp time{};
    std::optional<ModelBundle> bundle;
  };

  struct Receipt {
    std::uint64_t id = 0;
    std::string team;
    Timestamp received_at{};
    std::string status = "queued";
    std::optional<SubmissionOutcome> outcome;
    std::string failure;
  };

  struct Credential {
    std::string token_sha256;
    Timestamp created_at{};
    std::optional<Timestamp> revoked_at;
  };

  std::optional<std::string> team_for(std::string_view authorization) const;
  bool is_organizer(std::string_view authorization) const;

  // Admission: assigns the sequence, persists, enqueues. Caller holds admit_mutex_.
  void admit(Job job, const std::optional<std::string>& token_sha256);
  void append_log(const nlohmann::json& line);
  void worker_loop();
  void apply(const Job& job);
  void recover(const std::filesystem::path& log_path);
  void publish_events(const SubmissionOutcome& outcome, bool order_changed, const std::string& team,
                      std::uint64_t submission, Timestamp time);
  std::vector<std::string> team_order() const;
  void refresh_leaderboard_cache();

  ServiceOptions options_;
  Competition competition_;

  // Admission state.
  mutable std::mutex admit_mutex_;
  std::uint64_t next_sequence_ = 1;
  std::map<std::string, Credential> credentials_;
  std::map<std::pair<std::string, std::int64_t>, std::uint32_t> admitted_per_day_;
  bool frozen_ = false;
  int log_fd_ = -1;

  // Queue.
  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::condition_variable idle_cv_;
  std::deque<Job> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread worker_;

  // Applied state.
  mutable std::shared_mutex state_mutex_;
  std::string leaderboard_body_;

  mutable std::mutex receipts_mutex_;
  std::map<std::uint64_t, Receipt> receipts_;

  mutable std::mutex events_mutex_;
  mutable std::condition_variable events_cv_;
  std::vector<CompetitionEvent> events_;
};

// Creates `state_dir` (refusing an existing one) holding config.json,
// schema.json, the three split CSVs, organizer.json and an empty log.jsonl.
// Returns the organizer token, which is not stored.
std::string init_state_dir(const std::filesystem::path& state_dir, const CompetitionConfig& config,
                           const CompetitionData& data);

// Loads the config and splits stored by init_state_dir.
std::pair<CompetitionConfig, CompetitionData> load_state_dir(const std::filesystem::path& state_dir);

// Transcript helpers shared by the CLI and the harness.
std::vector<LogEntry> transcript_entries(const nlohmann::json& transcript, const Schema& schema,
                                         const Limits& limits);

}  // namespace bounty
