#include "bounty/competition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bounty/digest.hpp"
#include "bounty/error.hpp"
#include "bounty/loss.hpp"
#include "bounty/trainers.hpp"

namespace bounty {

// ---------------------------------------------------------------------------
// Configuration

namespace {

nlohmann::json base_to_json(const BaseModelSpec& spec) {
  switch (spec.kind) {
    case BaseModelSpec::Kind::constant:
      return {{"kind", "constant"}};
    case BaseModelSpec::Kind::tree:
      return {{"kind", "tree"}, {"max_depth", spec.max_depth}, {"min_leaf", spec.min_leaf}};
    case BaseModelSpec::Kind::hypothesis:
      return {{"kind", "hypothesis"},
              {"hypothesis", spec.hypothesis ? to_json(*spec.hypothesis) : nlohmann::json(nullptr)}};
  }
  return {};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

BaseModelSpec base_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                             const Schema* schema, const Limits& limits) {
  BaseModelSpec spec;
  const auto kind = doc.value("kind", std::string("constant"));
  if (kind == "constant") {
    spec.kind = BaseModelSpec::Kind::constant;
  } else if (kind == "tree") {
    spec.kind = BaseModelSpec::Kind::tree;
    spec.max_depth = doc.value("max_depth", std::size_t{1});
    spec.min_leaf = doc.value("min_leaf", std::size_t{1});
  } else if (kind == "hypothesis") {
    spec.kind = BaseModelSpec::Kind::hypothesis;
    spec.hypothesis = hypothesis_from_json(doc.at("hypothesis"), limits.tree_depth);
  } else if (kind == "bundle") {
    spec.kind = BaseModelSpec::Kind::hypothesis;
    const auto path = base_dir / doc.at("path").get<std::string>();
    const auto text = read_file(path);
    if (schema) {
      spec.hypothesis = parse_bundle(text, *schema, limits).hypothesis;
    } else {
      spec.hypothesis = hypothesis_from_json(nlohmann::json::parse(text).at("hypothesis"), limits.tree_depth);
    }
  } else {
    throw Error(Errc::bad_config, "unknown base model kind '" + kind + "'");
  }
  return spec;
}

}  // namespace

void CompetitionConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::bad_config, what); };
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be a positive finite number");
  if (!(repair_epsilon >= 0.0) || !std::isfinite(repair_epsilon)) fail("repair_epsilon must be finite and >= 0");
  if (daily_submission_limit == 0) fail("daily_submission_limit must be positive");
  if (queue_depth == 0) fail("queue_depth must be positive");
  if (reward.mode == RewardMode::time_scaled && (!(reward.rate >= 0.0) || !std::isfinite(reward.rate))) {
    fail("reward rate must be finite and >= 0");
  }
  for (const auto* base : {&global_base, &local_base}) {
    if (base->kind == BaseModelSpec::Kind::hypothesis && !base->hypothesis) fail("base model hypothesis missing");
    if (base->kind == BaseModelSpec::Kind::tree && base->min_leaf == 0) fail("base tree min_leaf must be positive");
  }
  if (limits.predicate_depth == 0 || limits.predicate_nodes == 0 || limits.ensemble_size == 0 ||
      limits.bundle_bytes == 0) {
    fail("limits must be positive");
  }
}

nlohmann::json to_json(const CompetitionConfig& c) {
  nlohmann::json reward = {{"mode", c.reward.mode == RewardMode::flat ? "flat" : "time_scaled"}};
  if (c.reward.mode == RewardMode::time_scaled) reward["rate"] = c.reward.rate;
  return {{"alpha", c.alpha},
          {"repair_epsilon", c.repair_epsilon},
          {"daily_submission_limit", c.daily_submission_limit},
          {"reward", std::move(reward)},
          {"start_time", format_timestamp(c.start_time)},
          {"seed", c.seed},
          {"global_base", base_to_json(c.global_base)},
          {"local_base", base_to_json(c.local_base)},
          {"limits", to_json(c.limits)},
          {"queue_depth", c.queue_depth},
          {"data", c.data}};
}

CompetitionConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                   const Schema* schema) {
  CompetitionConfig c;
  try {
    if (!doc.is_object()) throw Error(Errc::bad_config, "config must be a JSON object");
    c.alpha = doc.at("alpha").get<double>();
    c.repair_epsilon = doc.value("repair_epsilon", 0.0);
    c.daily_submission_limit = doc.value("daily_submission_limit", c.daily_submission_limit);
    if (doc.contains("reward")) {
      const auto& r = doc["reward"];
      const auto mode = r.value("mode", std::string("flat"));
      if (mode == "flat") {
        c.reward.mode = RewardMode::flat;
      } else if (mode == "time_scaled") {
        c.reward.mode = RewardMode::time_scaled;
        c.reward.rate = r.at("rate").get<double>();
      } else {
        throw Error(Errc::bad_config, "unknown reward mode '" + mode + "'");
      }
    }
    if (doc.contains("start_time")) {
      auto t = parse_timestamp(doc["start_time"].get<std::string>());
      if (!t) throw Error(Errc::bad_config, "start_time is not an ISO-8601 UTC timestamp");
      c.start_time = *t;
    }
    c.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("limits")) c.limits = limits_from_json(doc["limits"]);
    if (doc.contains("global_base")) c.global_base = base_from_json(doc["global_base"], base_dir, schema, c.limits);
    if (doc.contains("local_base")) c.local_base = base_from_json(doc["local_base"], base_dir, schema, c.limits);
    c.queue_depth = doc.value("queue_depth", c.queue_depth);
    if (doc.contains("data")) c.data = doc["data"];
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_config, std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

Hypothesis build_base_model(const BaseModelSpec& spec, const Dataset& train) {
  switch (spec.kind) {
    case BaseModelSpec::Kind::constant:
      return fit_constant(train);
    case BaseModelSpec::Kind::tree:
      return fit_tree(train, spec.max_depth, spec.min_leaf);
    case BaseModelSpec::Kind::hypothesis:
      if (!spec.hypothesis) throw Error(Errc::bad_config, "base model hypothesis missing");
      return *spec.hypothesis;
  }
  throw Error(Errc::bad_config, "unknown base model kind");
}

// ---------------------------------------------------------------------------
// Verdicts

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::none: return "none";
    case RejectReason::empty_group: return "empty-group";
    case RejectReason::below_threshold: return "below-threshold";
  }
  return "?";
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json repairs = nlohmann::json::array();
  for (const auto& r : v.repairs) {
    repairs.push_back({{"group", r.group}, {"target", r.target.value}, {"version", r.version.value}});
  }
  return {{"accepted", v.accepted},
          {"reason", std::string(to_string(v.reason))},
          {"weight", v.weight},
          {"loss_current", v.loss_current},
          {"loss_candidate", v.loss_candidate},
          {"improvement", v.improvement},
          {"overall_before", v.overall_before},
          {"overall_after_update", v.overall_after_update},
          {"overall_after", v.overall_after},
          {"repairs", std::move(repairs)},
          {"points", v.points},
          {"update_version", v.update_version.value},
          {"version", v.version.value}};
}

Verdict verdict_from_json(const nlohmann::json& doc) {
  Verdict v;
  v.accepted = doc.at("accepted").get<bool>();
  const auto reason = doc.at("reason").get<std::string>();
  v.reason = reason == "empty-group"       ? RejectReason::empty_group
             : reason == "below-threshold" ? RejectReason::below_threshold
                                           : RejectReason::none;
  v.weight = doc.at("weight").get<double>();
  v.loss_current = doc.at("loss_current").get<double>();
  v.loss_candidate = doc.at("loss_candidate").get<double>();
  v.improvement = doc.at("improvement").get<double>();
  v.overall_before = doc.at("overall_before").get<double>();
  v.overall_after_update = doc.at("overall_after_update").get<double>();
  v.overall_after = doc.at("overall_after").get<double>();
  for (const auto& r : doc.at("repairs")) {
    v.repairs.push_back({r.at("group").get<std::string>(), VersionId{r.at("target").get<std::uint32_t>()},
                         VersionId{r.at("version").get<std::uint32_t>()}});
  }
  v.points = doc.at("points").get<double>();
  v.update_version = VersionId{doc.at("update_version").get<std::uint32_t>()};
  v.version = VersionId{doc.at("version").get<std::uint32_t>()};
  return v;
}

namespace {

// The acceptance test against precomputed head predictions.
Verdict assess(std::span<const double> head, VersionId current, const ModelBundle& bundle,
               const Dataset& validation, double alpha) {
  Verdict v;
  const auto labels = validation.labels();
  v.overall_before = mse(head, labels);
  v.overall_after_update = v.overall_before;
  v.overall_after = v.overall_before;
  v.update_version = current;
  v.version = current;
  const auto mask = eval_predicate(bundle.group, validation);
  v.weight = group_weight(mask);
  if (mask.count() == 0) {
    v.reason = RejectReason::empty_group;
    return v;
  }
  const auto candidate = predict(bundle.hypothesis, validation);
  v.loss_current = group_loss(head, labels, mask);
  v.loss_candidate = group_loss(candidate, labels, mask);
  v.improvement = v.weight * (v.loss_current - v.loss_candidate);
  if (!(v.improvement > alpha)) {
    v.reason = RejectReason::below_threshold;
    return v;
  }
  v.accepted = true;
  std::vector<double> merged(head.begin(), head.end());
  for (std::size_t r = 0; r < merged.size(); ++r) {
    if (mask[r]) merged[r] = candidate[r];
  }
  v.overall_after_update = mse(merged, labels);
  v.overall_after = v.overall_after_update;
  return v;
}

}  // namespace

Verdict evaluate_acceptance(const PointerDecisionList& pdl, const ModelBundle& bundle,
                            const Dataset& validation, double alpha) {
  const auto head = pdl.predict(pdl.current(), validation);
  return assess(head, pdl.current(), bundle, validation, alpha);
}

// ---------------------------------------------------------------------------
// ModelTrack

ModelTrack::ModelTrack(std::shared_ptr<const Schema> schema, Hypothesis base, const Limits& limits,
                       const CompetitionData& data)
    : pdl_(std::move(schema), std::move(base), limits), train_(data.train), validation_(data.validation) {
  train_.sync(pdl_);
  validation_.sync(pdl_);
  published_.push_back(VersionId{0});
}

double ModelTrack::validation_loss() const { return validation_loss(pdl_.current()); }

double ModelTrack::validation_loss(VersionId version) const {
  return mse(validation_.at(version), validation_.dataset().labels());
}

Verdict ModelTrack::evaluate(const ModelBundle& bundle, double alpha) const {
  return assess(validation_.at(pdl_.current()), pdl_.current(), bundle, validation_.dataset(), alpha);
}

Verdict ModelTrack::apply(const ModelBundle& bundle, double alpha, double repair_epsilon, Timestamp now) {
  auto verdict = evaluate(bundle, alpha);
  if (!verdict.accepted) return verdict;

  const auto v = pdl_.prepend_update(bundle.group, bundle.hypothesis);
  train_.sync(pdl_);
  validation_.sync(pdl_);
  ++updates_;
  verdict.update_version = v;

  auto key = to_text(bundle.group);
  if (!by_key_.contains(key)) {
    const auto& mask = validation_.node_mask(v);
    const double loss = group_loss(validation_.at(v), validation_.dataset().labels(), mask);
    by_key_.emplace(key, groups_.size());
    groups_.push_back(GroupRecord{bundle.group, std::move(key), v, v, loss, loss});
    masks_.push_back(mask);
  }
  refresh_records(v);

  verdict.repairs = run_repairs(repair_epsilon);
  verdict.version = pdl_.current();
  verdict.overall_after = validation_loss();
  published_.push_back(pdl_.current());
  last_accepted_ = now;
  return verdict;
}

void ModelTrack::refresh_records(VersionId version) {
  const auto predictions = validation_.at(version);
  const auto labels = validation_.dataset().labels();
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    auto& record = groups_[i];
    const double loss = group_loss(predictions, labels, masks_[i]);
    record.current_val_loss = loss;
    if (loss < record.best_val_loss) {
      record.best_val_loss = loss;
      record.best_version = version;
    }
  }
}

std::vector<AppliedRepair> ModelTrack::run_repairs(double repair_epsilon) {
  std::vector<AppliedRepair> applied;
  for (bool changed = true; changed;) {
    changed = false;
    // Records are kept in introduction order.
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      const auto& record = groups_[i];
      if (!(record.current_val_loss > record.best_val_loss + repair_epsilon)) continue;
      const auto target = record.best_version;
      const auto v = pdl_.prepend_repair(record.predicate, target);
      train_.sync(pdl_);
      validation_.sync(pdl_);
      ++repairs_;
      applied.push_back({record.key, target, v});
      refresh_records(v);
      changed = true;
    }
  }
  return applied;
}

nlohmann::json ModelTrack::state_json() const {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : groups_) {
    groups.push_back({{"key", g.key},
                      {"introduced_at", g.introduced_at.value},
                      {"best_version", g.best_version.value},
                      {"best_val_loss", g.best_val_loss},
                      {"current_val_loss", g.current_val_loss}});
  }
  nlohmann::json published = nlohmann::json::array();
  for (auto v : published_) published.push_back(v.value);
  return {{"pdl", pdl_.snapshot()},
          {"groups", std::move(groups)},
          {"published", std::move(published)},
          {"updates", updates_},
          {"repairs", repairs_},
          {"last_accepted", last_accepted_ ? nlohmann::json(format_timestamp(*last_accepted_))
                                           : nlohmann::json(nullptr)}};
}

// ---------------------------------------------------------------------------
// Log entries

namespace {

std::string_view kind_text(LogEntry::Kind kind) {
  switch (kind) {
    case LogEntry::Kind::add_team: return "add_team";
    case LogEntry::Kind::remove_team: return "remove_team";
    case LogEntry::Kind::freeze: return "freeze";
    case LogEntry::Kind::submission: return "submission";
  }
  return "?";
}

}  // namespace

nlohmann::json to_json(const LogEntry& e) {
  nlohmann::json out = {{"seq", e.sequence}, {"kind", std::string(kind_text(e.kind))},
                        {"time", format_timestamp(e.time)}};
  if (e.kind != LogEntry::Kind::freeze) out["team"] = e.team;
  if (e.bundle) out["bundle"] = bundle_to_json(*e.bundle);
  if (e.outcome) {
    out["global"] = to_json(e.outcome->global);
    out["local"] = to_json(e.outcome->local);
  }
  return out;
}

LogEntry log_entry_from_json(const nlohmann::json& doc, const Schema& schema, const Limits& limits) {
  LogEntry e;
  try {
    e.sequence = doc.at("seq").get<std::uint64_t>();
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "add_team") e.kind = LogEntry::Kind::add_team;
    else if (kind == "remove_team") e.kind = LogEntry::Kind::remove_team;
    else if (kind == "freeze") e.kind = LogEntry::Kind::freeze;
    else if (kind == "submission") e.kind = LogEntry::Kind::submission;
    else throw Error(Errc::syntax_error, "unknown log entry kind '" + kind + "'");
    auto t = parse_timestamp(doc.at("time").get<std::string>());
    if (!t) throw Error(Errc::syntax_error, "bad timestamp in log entry");
    e.time = *t;
    if (doc.contains("team")) e.team = doc["team"].get<std::string>();
    if (doc.contains("bundle")) e.bundle = parse_bundle(doc["bundle"].dump(), schema, limits);
    if (doc.contains("global") && doc.contains("local")) {
      e.outcome = SubmissionOutcome{verdict_from_json(doc["global"]), verdict_from_json(doc["local"])};
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::syntax_error, std::string("malformed log entry: ") + ex.what());
  }
  return e;
}

// ---------------------------------------------------------------------------
// Leaderboard and report

nlohmann::json to_json(const LeaderboardEntry& e) {
  return {{"name", e.name},
          {"global", e.global},
          {"validation_loss", e.validation_loss},
          {"updates", e.updates},
          {"repairs", e.repairs},
          {"points", e.points},
          {"last_accepted", e.last_accepted ? nlohmann::json(format_timestamp(*e.last_accepted))
                                            : nlohmann::json(nullptr)}};
}

const std::vector<std::string>& FinalReport::columns() {
  static const std::vector<std::string> names = {"Model",      "Training Loss",     "Validation Loss",
                                                 "Test Loss",  "Number of Updates", "Number of Repairs"};
  return names;
}

nlohmann::json FinalReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"Model", r.model},
                         {"Training Loss", r.training_loss},
                         {"Validation Loss", r.validation_loss},
                         {"Test Loss", r.test_loss},
                         {"Number of Updates", r.updates},
                         {"Number of Repairs", r.repairs}});
  }
  return {{"columns", columns()}, {"rows", std::move(rows_json)}};
}

std::string FinalReport::to_text() const {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(columns());
  for (const auto& r : rows) {
    char buffer[64];
    std::vector<std::string> line{r.model};
    for (double v : {r.training_loss, r.validation_loss, r.test_loss}) {
      std::snprintf(buffer, sizeof buffer, "%.2f", v);
      line.emplace_back(buffer);
    }
    line.push_back(std::to_string(r.updates));
    line.push_back(std::to_string(r.repairs));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(columns().size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
  }
  std::string out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) out += "  ";
      const auto pad = std::string(widths[c] - line[c].size(), ' ');
      out += c == 0 ? line[c] + pad : pad + line[c];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Competition

Competition::Competition(CompetitionConfig config, CompetitionData data)
    : config_(std::move(config)), data_(std::move(data)) {
  config_.validate();
  if (!data_.train || !data_.validation || !data_.test) throw Error(Errc::bad_config, "missing data split");
  if (data_.train->rows() == 0 || data_.validation->rows() == 0) {
    throw Error(Errc::bad_config, "train and validation splits must be nonempty");
  }
  schema_ = data_.train->schema_ptr();
  if (data_.validation->schema() != *schema_ || data_.test->schema() != *schema_) {
    throw Error(Errc::bad_config, "splits do not share one schema");
  }
  local_base_ = build_base_model(config_.local_base, *data_.train);
  global_ = std::make_unique<ModelTrack>(schema_, build_base_model(config_.global_base, *data_.train),
                                         config_.limits, data_);
}

bool Competition::has_team(const std::string& id) const {
  auto it = team_index_.find(id);
  return it != team_index_.end() && teams_[it->second].active;
}

const Team& Competition::team(const std::string& id) const {
  auto it = team_index_.find(id);
  if (it == team_index_.end()) throw Error(Errc::unknown_team, "unknown team '" + id + "'");
  return teams_[it->second];
}

Team& Competition::team_mut(const std::string& id) {
  auto it = team_index_.find(id);
  if (it == team_index_.end() || !teams_[it->second].active) {
    throw Error(Errc::unknown_team, "unknown team '" + id + "'");
  }
  return teams_[it->second];
}

std::vector<std::string> Competition::team_ids() const {
  std::vector<std::string> out;
  for (const auto& t : teams_) {
    if (t.active) out.push_back(t.id);
  }
  return out;
}

void Competition::add_team(const std::string& id, Timestamp now) {
  if (id.empty()) throw Error(Errc::bad_config, "team id must be nonempty");
  if (team_index_.contains(id)) throw Error(Errc::duplicate_team, "team '" + id + "' already exists");
  Team t;
  t.id = id;
  t.order = teams_.size();
  t.registered_at = now;
  t.local = std::make_unique<ModelTrack>(schema_, local_base_, config_.limits, data_);
  team_index_.emplace(id, teams_.size());
  teams_.push_back(std::move(t));
  log_.push_back(LogEntry{LogEntry::Kind::add_team, next_sequence(), id, now, std::nullopt, std::nullopt});
}

void Competition::remove_team(const std::string& id, Timestamp now) {
  team_mut(id).active = false;
  log_.push_back(LogEntry{LogEntry::Kind::remove_team, next_sequence(), id, now, std::nullopt, std::nullopt});
}

void Competition::freeze(Timestamp now) {
  frozen_ = true;
  log_.push_back(LogEntry{LogEntry::Kind::freeze, next_sequence(), "", now, std::nullopt, std::nullopt});
}

const ModelTrack& Competition::local(const std::string& id) const { return *team(id).local; }

std::uint32_t Competition::submissions_today(const std::string& id, Timestamp now) const {
  auto it = daily_counts_.find({id, utc_day(now).time_since_epoch().count()});
  return it == daily_counts_.end() ? 0 : it->second;
}

SubmissionOutcome Competition::apply_submission(const std::string& id, const ModelBundle& bundle, Timestamp now) {
  auto& t = team_mut(id);
  if (frozen_) throw Error(Errc::frozen, "competition is frozen");
  if (submissions_today(id, now) >= config_.daily_submission_limit) {
    const auto reset = next_utc_midnight(now);
    throw RateLimitedError("daily submission limit reached; resets at " + format_timestamp(reset), reset);
  }
  auto issues = validate_bundle(bundle, *schema_, config_.limits);
  if (!issues.empty()) throw BundleError(std::move(issues));

  ++daily_counts_[{id, utc_day(now).time_since_epoch().count()}];
  SubmissionOutcome outcome;
  outcome.global = global_->apply(bundle, config_.alpha, config_.repair_epsilon, now);
  if (outcome.global.accepted) {
    double points = outcome.global.overall_before - outcome.global.overall_after;
    if (config_.reward.mode == RewardMode::time_scaled) {
      points *= 1.0 + config_.reward.rate * std::max(0.0, days_between(config_.start_time, now));
    }
    outcome.global.points = points;
    t.points += points;
  }
  outcome.local = t.local->apply(bundle, config_.alpha, config_.repair_epsilon, now);
  log_.push_back(LogEntry{LogEntry::Kind::submission, next_sequence(), id, now, bundle, outcome});
  return outcome;
}

std::vector<LeaderboardEntry> Competition::leaderboard() const {
  struct Row {
    LeaderboardEntry entry;
    std::size_t order;
  };
  std::vector<Row> rows;
  double total_points = 0.0;
  for (const auto& t : teams_) {
    if (!t.active) continue;
    total_points += t.points;
    rows.push_back({LeaderboardEntry{t.id, false, t.local->validation_loss(), t.local->updates(),
                                     t.local->repairs(), t.points, t.local->last_accepted()},
                    t.order + 1});
  }
  rows.push_back({LeaderboardEntry{kGlobalModelName, true, global_->validation_loss(), global_->updates(),
                                   global_->repairs(), total_points, global_->last_accepted()},
                  0});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.entry.validation_loss != b.entry.validation_loss) {
      return a.entry.validation_loss < b.entry.validation_loss;
    }
    // Never having been accepted counts as earliest.
    const auto& ta = a.entry.last_accepted;
    const auto& tb = b.entry.last_accepted;
    if (ta != tb) return !ta || (tb && *ta < *tb);
    return a.order < b.order;
  });
  std::vector<LeaderboardEntry> out;
  for (auto& r : rows) out.push_back(std::move(r.entry));
  return out;
}

FinalReport Competition::final_report() const {
  FinalReport report;
  auto row_for = [&](const std::string& name, const ModelTrack& track) {
    const auto& pdl = track.pdl();
    const auto test_predictions = pdl.predict(pdl.current(), *data_.test);
    ReportRow row;
    row.model = name;
    row.training_loss = mse(track.train().at(pdl.current()), data_.train->labels());
    row.validation_loss = track.validation_loss();
    row.test_loss = data_.test->rows() == 0 ? 0.0 : mse(test_predictions, data_.test->labels());
    row.updates = track.updates();
    row.repairs = track.repairs();
    return row;
  };
  for (const auto& entry : leaderboard()) {
    report.rows.push_back(entry.global ? row_for(entry.name, *global_) : row_for(entry.name, local(entry.name)));
  }
  return report;
}

nlohmann::json Competition::state_json() const {
  nlohmann::json teams = nlohmann::json::array();
  for (const auto& t : teams_) {
    teams.push_back({{"id", t.id},
                     {"order", t.order},
                     {"registered_at", format_timestamp(t.registered_at)},
                     {"active", t.active},
                     {"points", t.points},
                     {"local", t.local->state_json()}});
  }
  // Data enters through content digests; where it was loaded from does not.
  auto config = to_json(config_);
  config.erase("data");
  return {{"config", std::move(config)},
          {"data", {{"train", sha256_hex(write_csv(*data_.train))},
                    {"validation", sha256_hex(write_csv(*data_.validation))},
                    {"test", sha256_hex(write_csv(*data_.test))}}},
          {"frozen", frozen_},
          {"global", global_->state_json()},
          {"teams", std::move(teams)}};
}

std::string Competition::state_hash() const { return sha256_hex(state_json().dump()); }

nlohmann::json Competition::state_summary() const {
  return {{"state_hash", state_hash()},
          {"frozen", frozen_},
          {"teams", team_ids()},
          {"global_version", global_->pdl().current().value},
          {"global_updates", global_->updates()},
          {"global_repairs", global_->repairs()},
          {"global_validation_loss", global_->validation_loss()},
          {"log_entries", log_.size()}};
}

void Competition::apply_entry(const LogEntry& entry, bool check) {
  if (entry.sequence != next_sequence()) {
    throw Error(Errc::replay_mismatch, "log sequence " + std::to_string(entry.sequence) + " where " +
                                           std::to_string(next_sequence()) + " was expected");
  }
  switch (entry.kind) {
    case LogEntry::Kind::add_team:
      add_team(entry.team, entry.time);
      return;
    case LogEntry::Kind::remove_team:
      remove_team(entry.team, entry.time);
      return;
    case LogEntry::Kind::freeze:
      freeze(entry.time);
      return;
    case LogEntry::Kind::submission:
      break;
  }
  if (!entry.bundle) throw Error(Errc::replay_mismatch, "submission entry without a bundle");
  const auto outcome = apply_submission(entry.team, *entry.bundle, entry.time);
  if (check && entry.outcome) {
    if (to_json(outcome.global) != to_json(entry.outcome->global) ||
        to_json(outcome.local) != to_json(entry.outcome->local)) {
      throw Error(Errc::replay_mismatch,
                  "verdict for log entry " + std::to_string(entry.sequence) + " differs from the record");
    }
  }
}

Competition Competition::replay(CompetitionConfig config, CompetitionData data,
                                const std::vector<LogEntry>& entries) {
  Competition competition(std::move(config), std::move(data));
  for (const auto& e : entries) competition.apply_entry(e, true);
  return competition;
}

}  // namespace bounty
