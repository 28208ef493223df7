#include "bounty/service.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "bounty/digest.hpp"
#include "bounty/error.hpp"
#include "bounty/numeric_text.hpp"

namespace bounty {

namespace {

ApiResult json_result(int status, const nlohmann::json& body) {
  return ApiResult{status, body.dump(), "application/json", {}};
}

ApiResult error_result(int status, std::string_view code, const std::string& message) {
  return json_result(status, {{"error", std::string(code)}, {"message", message}});
}

std::optional<std::string_view> bearer_token(std::string_view header) {
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.substr(0, prefix.size()) != prefix) return std::nullopt;
  return header.substr(prefix.size());
}

std::optional<std::uint64_t> parse_id(std::string_view text) {
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
  return value;
}

bool valid_team_name(std::string_view name) {
  if (name.empty() || name.size() > 64) return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

std::int64_t day_key(Timestamp t) { return utc_day(t).time_since_epoch().count(); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, std::string_view text, bool private_file = false) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL, private_file ? 0600 : 0644);
  if (fd < 0) throw Error(Errc::io_error, "cannot create " + path.string());
  std::size_t written = 0;
  while (written < text.size()) {
    const auto n = ::write(fd, text.data() + written, text.size() - written);
    if (n <= 0) {
      ::close(fd);
      throw Error(Errc::io_error, "write failed for " + path.string());
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

nlohmann::json to_json(const CompetitionEvent& e) {
  return {{"seq", e.sequence}, {"kind", e.kind}, {"time", format_timestamp(e.time)}, {"payload", e.payload}};
}

// ---------------------------------------------------------------------------

BountyService::BountyService(Competition competition, ServiceOptions options)
    : options_(std::move(options)), competition_(std::move(competition)) {
  if (!options_.clock) options_.clock = now_ms;
  refresh_leaderboard_cache();
  worker_ = std::thread([this] { worker_loop(); });
}

BountyService::~BountyService() {
  drain();
  {
    std::lock_guard lock(queue_mutex_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
  if (log_fd_ >= 0) ::close(log_fd_);
}

std::unique_ptr<BountyService> BountyService::open(const std::filesystem::path& state_dir, ServiceOptions options) {
  auto [config, data] = load_state_dir(state_dir);
  if (options.organizer_token_sha256.empty()) {
    const auto doc = nlohmann::json::parse(read_text(state_dir / "organizer.json"));
    options.organizer_token_sha256 = doc.at("token_sha256").get<std::string>();
  }
  options.state_dir = state_dir;
  auto service = std::make_unique<BountyService>(Competition(std::move(config), std::move(data)), options);
  service->recover(state_dir / "log.jsonl");
  return service;
}

void BountyService::recover(const std::filesystem::path& log_path) {
  const auto text = std::filesystem::exists(log_path) ? read_text(log_path) : std::string();
  std::size_t good_end = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto newline = text.find('\n', pos);
    // A line without its terminator was torn by a crash mid-append.
    if (newline == std::string::npos) break;
    nlohmann::json line;
    try {
      line = nlohmann::json::parse(std::string_view(text).substr(pos, newline - pos));
    } catch (const nlohmann::json::parse_error&) {
      break;
    }
    auto entry = log_entry_from_json(line, competition_.schema(), competition_.config().limits);
    Job job{entry.sequence, entry.kind, entry.team, entry.time, entry.bundle};
    switch (job.kind) {
      case LogEntry::Kind::add_team:
        credentials_[job.team] = Credential{line.at("token_sha256").get<std::string>(), job.time, std::nullopt};
        break;
      case LogEntry::Kind::remove_team:
        if (credentials_.contains(job.team)) credentials_[job.team].revoked_at = job.time;
        break;
      case LogEntry::Kind::freeze:
        frozen_ = true;
        break;
      case LogEntry::Kind::submission:
        ++admitted_per_day_[{job.team, day_key(job.time)}];
        {
          std::lock_guard lock(receipts_mutex_);
          receipts_[job.sequence] = Receipt{job.sequence, job.team, job.time, "queued", std::nullopt, ""};
        }
        break;
    }
    next_sequence_ = job.sequence + 1;
    apply(job);
    pos = newline + 1;
    good_end = pos;
  }
  log_fd_ = ::open(log_path.c_str(), O_WRONLY | O_CREAT, 0600);
  if (log_fd_ < 0) throw Error(Errc::io_error, "cannot open " + log_path.string());
  if (::ftruncate(log_fd_, static_cast<off_t>(good_end)) != 0 ||
      ::lseek(log_fd_, 0, SEEK_END) < 0) {
    throw Error(Errc::io_error, "cannot reposition " + log_path.string());
  }
}

// ---------------------------------------------------------------------------
// Authentication

std::optional<std::string> BountyService::team_for(std::string_view authorization) const {
  auto token = bearer_token(authorization);
  if (!token) return std::nullopt;
  const auto presented = sha256_hex(*token);
  std::lock_guard lock(admit_mutex_);
  std::optional<std::string> match;
  // Every credential is compared so timing does not reveal which one matched.
  for (const auto& [team, cred] : credentials_) {
    if (constant_time_equal(presented, cred.token_sha256) && !cred.revoked_at) match = team;
  }
  return match;
}

bool BountyService::is_organizer(std::string_view authorization) const {
  auto token = bearer_token(authorization);
  if (!token || options_.organizer_token_sha256.empty()) return false;
  return constant_time_equal(sha256_hex(*token), options_.organizer_token_sha256);
}

// ---------------------------------------------------------------------------
// Admission

void BountyService::append_log(const nlohmann::json& line) {
  if (options_.state_dir.empty()) return;
  if (log_fd_ < 0) {
    const auto path = options_.state_dir / "log.jsonl";
    log_fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0600);
    if (log_fd_ < 0) throw Error(Errc::io_error, "cannot open " + path.string());
  }
  const auto text = line.dump() + "\n";
  std::size_t written = 0;
  while (written < text.size()) {
    const auto n = ::write(log_fd_, text.data() + written, text.size() - written);
    if (n <= 0) throw Error(Errc::io_error, "log append failed");
    written += static_cast<std::size_t>(n);
  }
  if (options_.sync_log) ::fsync(log_fd_);
}

void BountyService::admit(Job job, const std::optional<std::string>& token_sha256) {
  job.sequence = next_sequence_;
  LogEntry entry{job.kind, job.sequence, job.team, job.time, job.bundle, std::nullopt};
  auto line = to_json(entry);
  if (token_sha256) line["token_sha256"] = *token_sha256;
  append_log(line);
  ++next_sequence_;
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(std::move(job));
  }
  queue_cv_.notify_one();
}

ApiResult BountyService::submit(std::string_view authorization, std::string_view body) {
  const auto team = team_for(authorization);
  if (!team) return error_result(401, "Unauthorized", "missing or invalid bearer token");
  const auto& limits = competition_.config().limits;
  if (body.size() > limits.bundle_bytes) {
    return error_result(413, "PayloadTooLarge",
                        "bundle is " + std::to_string(body.size()) + " bytes; limit " +
                            std::to_string(limits.bundle_bytes));
  }
  ModelBundle bundle;
  try {
    bundle = parse_bundle(body, competition_.schema(), limits);
  } catch (const BundleError& e) {
    nlohmann::json issues = nlohmann::json::array();
    for (const auto& issue : e.issues()) issues.push_back(to_json(issue));
    return json_result(422, {{"error", "InvalidBundle"}, {"message", e.what()}, {"issues", std::move(issues)}});
  }
  bundle.metadata.team = *team;

  std::lock_guard lock(admit_mutex_);
  auto cred = credentials_.find(*team);
  if (cred == credentials_.end() || cred->second.revoked_at) {
    return error_result(401, "Unauthorized", "credential revoked");
  }
  if (frozen_) return error_result(409, "Frozen", "competition-frozen");
  const auto now = options_.clock();
  auto& count = admitted_per_day_[{*team, day_key(now)}];
  if (count >= competition_.config().daily_submission_limit) {
    const auto reset = next_utc_midnight(now);
    auto result = json_result(429, {{"error", "RateLimited"},
                                    {"message", "daily submission limit reached"},
                                    {"limit", competition_.config().daily_submission_limit},
                                    {"reset_at", format_timestamp(reset)}});
    const auto seconds = std::chrono::ceil<std::chrono::seconds>(reset - now).count();
    result.headers["Retry-After"] = std::to_string(seconds);
    return result;
  }
  {
    std::lock_guard queue_lock(queue_mutex_);
    if (queue_.size() >= competition_.config().queue_depth) {
      return error_result(503, "QueueFull", "submission queue is full; retry later");
    }
  }
  ++count;
  const auto id = next_sequence_;
  {
    std::lock_guard receipts_lock(receipts_mutex_);
    receipts_[id] = Receipt{id, *team, now, "queued", std::nullopt, ""};
  }
  admit(Job{0, LogEntry::Kind::submission, *team, now, std::move(bundle)}, std::nullopt);
  return json_result(202, {{"id", id}, {"team", *team}, {"received_at", format_timestamp(now)}, {"status", "queued"}});
}

// ---------------------------------------------------------------------------
// Worker

void BountyService::worker_loop() {
  std::unique_lock lock(queue_mutex_);
  for (;;) {
    queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
    if (stopping_) break;
    auto job = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    apply(job);
    lock.lock();
    busy_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
  idle_cv_.notify_all();
}

std::vector<std::string> BountyService::team_order() const {
  std::vector<std::string> out;
  for (const auto& e : competition_.leaderboard()) {
    if (!e.global) out.push_back(e.name);
  }
  return out;
}

void BountyService::refresh_leaderboard_cache() {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : competition_.leaderboard()) entries.push_back(to_json(e));
  leaderboard_body_ = nlohmann::json{{"entries", std::move(entries)}}.dump();
}

void BountyService::apply(const Job& job) {
  std::optional<SubmissionOutcome> outcome;
  std::string failure;
  bool order_changed = false;
  {
    std::unique_lock state(state_mutex_);
    const auto before = team_order();
    try {
      switch (job.kind) {
        case LogEntry::Kind::add_team: competition_.add_team(job.team, job.time); break;
        case LogEntry::Kind::remove_team: competition_.remove_team(job.team, job.time); break;
        case LogEntry::Kind::freeze: competition_.freeze(job.time); break;
        case LogEntry::Kind::submission:
          outcome = competition_.apply_submission(job.team, *job.bundle, job.time);
          break;
      }
    } catch (const Error& e) {
      failure = std::string(to_string(e.code())) + ": " + e.what();
    }
    refresh_leaderboard_cache();
    order_changed = job.kind == LogEntry::Kind::submission && outcome && team_order() != before;
  }
  if (job.kind != LogEntry::Kind::submission) return;
  {
    std::lock_guard lock(receipts_mutex_);
    auto& receipt = receipts_[job.sequence];
    receipt.status = outcome ? "evaluated" : "failed";
    receipt.outcome = outcome;
    receipt.failure = failure;
  }
  if (outcome) publish_events(*outcome, order_changed, job.team, job.sequence, job.time);
}

void BountyService::publish_events(const SubmissionOutcome& outcome, bool order_changed, const std::string& team,
                                   std::uint64_t submission, Timestamp time) {
  std::vector<std::pair<std::string, nlohmann::json>> fresh;
  const auto& g = outcome.global;
  if (g.accepted) {
    fresh.emplace_back("global_update_accepted",
                       nlohmann::json{{"version", g.version.value},
                                      {"update_version", g.update_version.value},
                                      {"error_reduction", g.overall_before - g.overall_after},
                                      {"points", g.points},
                                      {"team", team},
                                      {"submission", submission},
                                      {"train_predictions", "/model/global/" + std::to_string(g.version.value) +
                                                                "/train-predictions"}});
    for (const auto& r : g.repairs) {
      fresh.emplace_back("repair_applied", nlohmann::json{{"group", r.group},
                                                          {"target", r.target.value},
                                                          {"version", r.version.value}});
    }
    fresh.emplace_back("leaderboard_changed", nlohmann::json{{"reason", "global_update"}});
  }
  if (order_changed) fresh.emplace_back("leaderboard_changed", nlohmann::json{{"reason", "local_rank"}});
  if (fresh.empty()) return;
  {
    std::lock_guard lock(events_mutex_);
    for (auto& [kind, payload] : fresh) {
      events_.push_back(CompetitionEvent{events_.size() + 1, kind, time, std::move(payload)});
    }
  }
  events_cv_.notify_all();
}

void BountyService::drain() {
  std::unique_lock lock(queue_mutex_);
  idle_cv_.wait(lock, [&] { return stopping_ || (queue_.empty() && !busy_); });
}

void BountyService::abandon() {
  {
    std::lock_guard lock(queue_mutex_);
    stopping_ = true;
    queue_.clear();
  }
  queue_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

// ---------------------------------------------------------------------------
// Reads

ApiResult BountyService::submission(std::string_view authorization, std::string_view id_text) {
  const bool organizer = is_organizer(authorization);
  const auto team = organizer ? std::nullopt : team_for(authorization);
  if (!organizer && !team) return error_result(401, "Unauthorized", "missing or invalid bearer token");
  const auto id = parse_id(id_text);
  std::lock_guard lock(receipts_mutex_);
  auto it = id ? receipts_.find(*id) : receipts_.end();
  if (it == receipts_.end()) return error_result(404, "NotFound", "unknown submission id");
  const auto& r = it->second;
  if (!organizer && r.team != *team) return error_result(403, "Forbidden", "submission belongs to another team");
  nlohmann::json body = {{"id", r.id}, {"team", r.team}, {"received_at", format_timestamp(r.received_at)},
                         {"status", r.status}};
  if (r.outcome) {
    body["global"] = to_json(r.outcome->global);
    body["local"] = to_json(r.outcome->local);
  }
  if (!r.failure.empty()) body["failure"] = r.failure;
  return json_result(200, body);
}

ApiResult BountyService::leaderboard() const {
  std::shared_lock lock(state_mutex_);
  return ApiResult{200, leaderboard_body_, "application/json", {}};
}

ApiResult BountyService::train_predictions(std::string_view version_text) const {
  const auto version = parse_id(version_text);
  std::shared_lock lock(state_mutex_);
  const auto& track = competition_.global();
  if (!version || *version > track.pdl().current().value) {
    return error_result(404, "NotFound", "unknown global model version");
  }
  const auto predictions = track.train().at(VersionId{static_cast<std::uint32_t>(*version)});
  std::string csv = "row,prediction\n";
  csv.reserve(predictions.size() * 16);
  for (std::size_t r = 0; r < predictions.size(); ++r) {
    csv += std::to_string(r);
    csv += ',';
    csv += format_number(predictions[r]);
    csv += '\n';
  }
  return ApiResult{200, std::move(csv), "text/csv", {}};
}

ApiResult BountyService::events(std::uint64_t since, std::chrono::milliseconds wait) const {
  std::unique_lock lock(events_mutex_);
  if (wait.count() > 0) {
    events_cv_.wait_for(lock, wait, [&] { return events_.size() > since; });
  }
  nlohmann::json list = nlohmann::json::array();
  for (auto i = static_cast<std::size_t>(std::min<std::uint64_t>(since, events_.size())); i < events_.size(); ++i) {
    list.push_back(to_json(events_[i]));
  }
  return json_result(200, {{"events", std::move(list)}, {"latest", events_.size()}});
}

std::vector<CompetitionEvent> BountyService::all_events() const {
  std::lock_guard lock(events_mutex_);
  return events_;
}

std::string BountyService::state_hash() const {
  std::shared_lock lock(state_mutex_);
  return competition_.state_hash();
}

nlohmann::json BountyService::transcript() const {
  std::shared_lock lock(state_mutex_);
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : competition_.log()) entries.push_back(to_json(e));
  return {{"format", "bounty-transcript"},
          {"version", 1},
          {"config", to_json(competition_.config())},
          {"entries", std::move(entries)},
          {"final_state_hash", competition_.state_hash()}};
}

// ---------------------------------------------------------------------------
// Administration

ApiResult BountyService::add_team(std::string_view authorization, std::string_view body) {
  if (!is_organizer(authorization)) return error_result(401, "Unauthorized", "organizer token required");
  std::string name;
  try {
    const auto doc = nlohmann::json::parse(body);
    name = doc.at("team").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    return error_result(400, "BadRequest", "body must be {\"team\": \"<name>\"}");
  }
  if (!valid_team_name(name)) {
    return error_result(400, "BadRequest", "team names are 1-64 characters of [A-Za-z0-9._-]");
  }
  std::lock_guard lock(admit_mutex_);
  if (credentials_.contains(name)) return error_result(409, "DuplicateTeam", "team '" + name + "' already exists");
  const auto token = random_hex(32);
  const auto hash = sha256_hex(token);
  const auto now = options_.clock();
  credentials_[name] = Credential{hash, now, std::nullopt};
  admit(Job{0, LogEntry::Kind::add_team, name, now, std::nullopt}, hash);
  return json_result(201, {{"team", name}, {"token", token}, {"created_at", format_timestamp(now)}});
}

ApiResult BountyService::remove_team(std::string_view authorization, std::string_view id) {
  if (!is_organizer(authorization)) return error_result(401, "Unauthorized", "organizer token required");
  std::lock_guard lock(admit_mutex_);
  auto it = credentials_.find(std::string(id));
  if (it == credentials_.end() || it->second.revoked_at) return error_result(404, "NotFound", "unknown team");
  const auto now = options_.clock();
  it->second.revoked_at = now;
  admit(Job{0, LogEntry::Kind::remove_team, std::string(id), now, std::nullopt}, std::nullopt);
  return json_result(200, {{"team", std::string(id)}, {"revoked_at", format_timestamp(now)}});
}

ApiResult BountyService::freeze(std::string_view authorization) {
  if (!is_organizer(authorization)) return error_result(401, "Unauthorized", "organizer token required");
  std::lock_guard lock(admit_mutex_);
  if (!frozen_) {
    frozen_ = true;
    admit(Job{0, LogEntry::Kind::freeze, "", options_.clock(), std::nullopt}, std::nullopt);
  }
  return json_result(200, {{"frozen", true}});
}

ApiResult BountyService::admin_state(std::string_view authorization) const {
  if (!is_organizer(authorization)) return error_result(401, "Unauthorized", "organizer token required");
  std::uint64_t admitted = 0;
  {
    std::lock_guard lock(admit_mutex_);
    admitted = next_sequence_ - 1;
  }
  std::shared_lock lock(state_mutex_);
  auto summary = competition_.state_summary();
  summary["admitted"] = admitted;
  return json_result(200, summary);
}

// ---------------------------------------------------------------------------
// State directory

std::string init_state_dir(const std::filesystem::path& state_dir, const CompetitionConfig& config,
                           const CompetitionData& data) {
  if (std::filesystem::exists(state_dir)) {
    throw Error(Errc::io_error, "state directory " + state_dir.string() + " already exists");
  }
  std::filesystem::create_directories(state_dir);
  auto stored = config;
  stored.data = {{"schema", "schema.json"}, {"train", "train.csv"}, {"validation", "validation.csv"},
                 {"test", "test.csv"}};
  write_text(state_dir / "config.json", to_json(stored).dump(2) + "\n");
  write_text(state_dir / "schema.json", data.train->schema().to_json().dump(2) + "\n");
  write_text(state_dir / "train.csv", write_csv(*data.train));
  write_text(state_dir / "validation.csv", write_csv(*data.validation), true);
  write_text(state_dir / "test.csv", write_csv(*data.test), true);
  const auto token = random_hex(32);
  write_text(state_dir / "organizer.json", nlohmann::json{{"token_sha256", sha256_hex(token)}}.dump() + "\n", true);
  write_text(state_dir / "log.jsonl", "", true);
  return token;
}

std::pair<CompetitionConfig, CompetitionData> load_state_dir(const std::filesystem::path& state_dir) {
  auto schema = std::make_shared<const Schema>(Schema::load((state_dir / "schema.json").string()));
  auto config = config_from_json(nlohmann::json::parse(read_text(state_dir / "config.json")), state_dir,
                                 schema.get());
  CompetitionData data;
  data.train = std::make_shared<const Dataset>(load_csv_file(schema, (state_dir / "train.csv").string()));
  data.validation = std::make_shared<const Dataset>(load_csv_file(schema, (state_dir / "validation.csv").string()));
  data.test = std::make_shared<const Dataset>(load_csv_file(schema, (state_dir / "test.csv").string()));
  return {std::move(config), std::move(data)};
}

std::vector<LogEntry> transcript_entries(const nlohmann::json& transcript, const Schema& schema,
                                         const Limits& limits) {
  std::vector<LogEntry> out;
  for (const auto& e : transcript.at("entries")) out.push_back(log_entry_from_json(e, schema, limits));
  return out;
}

}  // namespace bounty
