#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bounty/digest.hpp"
#include "bounty/error.hpp"
#include "bounty/sim.hpp"

namespace bounty::sim {

namespace {

nlohmann::json weights_json(const SplitWeights& w) { return nlohmann::json::array({w.train, w.validation, w.test}); }

}  // namespace

Scenario scenario_from_json(const nlohmann::json& doc) {
  try {
    Scenario s;
    s.name = doc.at("name").get<std::string>();
    s.task = doc.at("task");
    if (doc.contains("weights")) {
      const auto w = doc["weights"].get<std::vector<double>>();
      if (w.size() != 3) throw Error(Errc::bad_spec, "weights must have three entries");
      s.weights = SplitWeights{w[0], w[1], w[2]};
    }
    s.config = doc.value("config", nlohmann::json::object());
    if (s.config.contains("data")) throw Error(Errc::bad_spec, "scenario config must not carry data");
    s.rounds = doc.value("rounds", std::size_t{1});
    s.agents = doc.at("agents").get<std::vector<nlohmann::json>>();
    s.minutes_between_submissions = doc.value("minutes_between_submissions", std::int64_t{60});
    if (s.minutes_between_submissions < 0) throw Error(Errc::bad_spec, "minutes_between_submissions must be >= 0");
    task_schema(s.task);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_spec, std::string("malformed scenario: ") + e.what());
  }
}

nlohmann::json to_json(const Scenario& s) {
  return {{"name", s.name},
          {"task", s.task},
          {"weights", weights_json(s.weights)},
          {"config", s.config},
          {"rounds", s.rounds},
          {"agents", s.agents},
          {"minutes_between_submissions", s.minutes_between_submissions}};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  try {
    return scenario_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::bad_spec, path.string() + ": " + e.what());
  }
}

Scenario fuzz_scenario(std::uint64_t seed) {
  Rng rng(seed);
  Scenario s;
  s.name = "fuzz-" + std::to_string(seed);
  nlohmann::json features = nlohmann::json::array();
  std::vector<std::string> numeric;
  std::vector<std::pair<std::string, std::size_t>> categorical;
  const auto n_numeric = 2 + rng.below(2);
  const auto n_categorical = 2 + rng.below(2);
  for (std::size_t i = 0; i < n_numeric; ++i) {
    const auto name = "x" + std::to_string(i);
    const double lo = std::round(rng.uniform(0.0, 50.0));
    features.push_back({{"name", name}, {"kind", "numeric"}, {"range", {lo, lo + 10.0 + std::round(rng.uniform(0.0, 60.0))}},
                        {"integer", rng.bernoulli(0.5)}});
    numeric.push_back(name);
  }
  for (std::size_t i = 0; i < n_categorical; ++i) {
    const auto name = "c" + std::to_string(i);
    const auto levels = 2 + rng.below(3);
    nlohmann::json values = nlohmann::json::array();
    nlohmann::json weights = nlohmann::json::array();
    for (std::size_t v = 0; v < levels; ++v) {
      values.push_back(std::to_string(v + 1));
      weights.push_back(1.0 + std::round(rng.uniform(0.0, 4.0)));
    }
    features.push_back({{"name", name}, {"kind", "categorical"}, {"values", values}, {"weights", weights}});
    categorical.emplace_back(name, levels);
  }
  auto slopes = [&](double scale) {
    nlohmann::json c = nlohmann::json::object();
    for (const auto& name : numeric) {
      if (rng.bernoulli(0.6)) c[name] = std::round(rng.uniform(-scale, scale));
    }
    return c;
  };
  nlohmann::json regimes = nlohmann::json::array();
  const auto n_regimes = 1 + rng.below(3);
  for (std::size_t i = 0; i < n_regimes; ++i) {
    const auto& [cat, levels] = categorical[rng.below(categorical.size())];
    regimes.push_back({{"when", {{cat, {std::to_string(1 + rng.below(levels))}}}},
                       {"intercept", std::round(rng.uniform(-3000.0, 3000.0))},
                       {"coefficients", slopes(100.0)}});
  }
  s.task = {{"seed", rng.next() >> 16},
            {"rows", 1500 + rng.below(1500)},
            {"noise_sigma", std::round(rng.uniform(200.0, 1500.0))},
            {"label", {{"name", "y"}, {"range", {0.0, 20000.0}}}},
            {"features", features},
            {"base", {{"intercept", 8000.0}, {"coefficients", slopes(60.0)}}},
            {"regimes", regimes}};

  // Scale alpha to the spread of the labels so runs accept a handful of updates.
  const auto data = materialize_data({{"synthetic", s.task}, {"weights", weights_json(s.weights)}}, {}, seed);
  const auto labels = data.validation->labels();
  double mean = 0.0;
  for (double y : labels) mean += y;
  mean /= static_cast<double>(labels.size());
  double var = 0.0;
  for (double y : labels) var += (y - mean) * (y - mean);
  var /= static_cast<double>(labels.size());
  const double alpha = std::max(1.0, var * rng.uniform(0.005, 0.03));

  s.config = {{"alpha", alpha}, {"seed", seed}, {"start_time", "2024-01-01T00:00:00Z"}, {"daily_submission_limit", 100}};
  s.rounds = 2 + rng.below(3);
  s.agents = {
      {{"name", "manual"}, {"kind", "manual_conditioner"}, {"features", {categorical[0].first, numeric[0]}},
       {"thresholds", {{numeric[0], {std::round(rng.uniform(5.0, 50.0))}}}}, {"min_rows", 40}},
      {{"name", "kaggle"}, {"kind", "kaggle_style"}, {"start_depth", 2}, {"max_depth", 5}, {"min_leaf", 20}},
      {{"name", "search"}, {"kind", "automated_searcher"}, {"budget", 60}, {"quantiles", 3}, {"seed", seed},
       {"min_rows", 40}},
  };
  return s;
}

// ---------------------------------------------------------------------------

RunResult run_competition(const Scenario& scenario, const RunOptions& options) {
  auto doc = scenario.config;
  doc["data"] = {{"synthetic", scenario.task}, {"weights", weights_json(scenario.weights)}};
  if (options.alpha) doc["alpha"] = *options.alpha;
  const auto data = materialize_data(doc["data"], {}, doc.value("seed", std::uint64_t{0}));
  const auto config = config_from_json(doc, {}, &data.train->schema());
  if (options.crash_after && options.state_dir.empty()) {
    throw Error(Errc::bad_spec, "crash_after needs a state directory");
  }

  const auto start = std::chrono::duration_cast<std::chrono::milliseconds>(config.start_time.time_since_epoch());
  auto clock_ms = std::make_shared<std::atomic<std::int64_t>>(start.count());
  ServiceOptions service_options;
  service_options.clock = [clock_ms] { return Timestamp{std::chrono::milliseconds{clock_ms->load()}}; };
  service_options.sync_log = false;

  std::shared_ptr<BountyService> service;
  std::string organizer;
  if (!options.state_dir.empty()) {
    organizer = init_state_dir(options.state_dir, config, data);
    service = BountyService::open(options.state_dir, service_options);
  } else {
    organizer = random_hex(32);
    service_options.organizer_token_sha256 = sha256_hex(organizer);
    service = std::make_shared<BountyService>(Competition(config, data), service_options);
  }

  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<std::string> bearers;
  for (const auto& spec : scenario.agents) {
    agents.push_back(make_agent(spec, data.train->schema()));
    const auto res = service->add_team("Bearer " + organizer, nlohmann::json{{"team", agents.back()->name()}}.dump());
    if (res.status != 201) throw Error(Errc::bad_spec, "cannot register agent: " + res.body);
    bearers.push_back("Bearer " + res.json().at("token").get<std::string>());
  }

  RunResult result;
  result.ledgers.resize(agents.size());
  const std::int64_t step = scenario.minutes_between_submissions * 60'000;
  std::size_t submitted = 0;
  for (std::size_t round = 0; round < scenario.rounds; ++round) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      clock_ms->fetch_add(step);
      AgentView view(data.train, *service, result.ledgers[i]);
      auto bundle = agents[i]->propose(view);
      if (!bundle) continue;
      const auto res = service->submit(bearers[i], serialize_bundle(*bundle));
      SubmissionRecord record;
      record.agent = agents[i]->name();
      record.status = res.status;
      record.whole_dataset = bundle->group.kind() == Predicate::Kind::always_true;
      if (res.status == 202) record.id = res.json().at("id").get<std::uint64_t>();
      ++submitted;
      if (options.crash_after && submitted == *options.crash_after) {
        service->abandon();
        service.reset();
        service = BountyService::open(options.state_dir, service_options);
      } else {
        service->drain();
      }
      if (record.id != 0) {
        const auto receipt = service->submission(bearers[i], std::to_string(record.id)).json();
        if (receipt.contains("global")) {
          record.outcome = SubmissionOutcome{verdict_from_json(receipt["global"]), verdict_from_json(receipt["local"])};
        }
      }
      result.submissions.push_back(std::move(record));
    }
  }
  service->drain();

  const auto& comp = service->competition();
  result.transcript = service->transcript();
  result.report = comp.final_report();
  result.leaderboard = comp.leaderboard();
  result.events = service->all_events();
  result.final_state_hash = service->state_hash();
  result.global_acceptances = comp.global().updates();
  result.global_repairs = comp.global().repairs();
  result.alpha = config.alpha;
  result.base_validation_loss = comp.global().validation_loss(VersionId{0});
  if (options.keep_service) result.service = service;
  return result;
}

std::string replay_transcript(const nlohmann::json& transcript, const std::filesystem::path& base_dir) {
  try {
    if (transcript.at("format") != "bounty-transcript") throw Error(Errc::bad_config, "not a bounty transcript");
    const auto& doc = transcript.at("config");
    const auto data = materialize_data(doc.at("data"), base_dir, doc.value("seed", std::uint64_t{0}));
    auto config = config_from_json(doc, base_dir, &data.train->schema());
    const auto entries = transcript_entries(transcript, data.train->schema(), config.limits);
    return Competition::replay(std::move(config), data, entries).state_hash();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_config, std::string("malformed transcript: ") + e.what());
  }
}

std::vector<SweepRow> alpha_sweep(const Scenario& scenario, const std::vector<double>& alphas) {
  std::vector<SweepRow> rows;
  for (double alpha : alphas) {
    RunOptions options;
    options.alpha = alpha;
    const auto run = run_competition(scenario, options);
    double loss = 0.0;
    for (const auto& row : run.report.rows) {
      if (row.model == kGlobalModelName) loss = row.validation_loss;
    }
    rows.push_back(SweepRow{alpha, run.global_acceptances, run.global_repairs, loss});
  }
  return rows;
}

std::string claims_summary(const Scenario& scenario, const RunResult& run, const std::vector<SweepRow>& sweep) {
  std::ostringstream out;
  char buf[256];
  auto line = [&](bool ok, const std::string& text) { out << (ok ? "PASS " : "FAIL ") << text << '\n'; };

  double global_loss = 0.0;
  double best_local = INFINITY;
  for (const auto& e : run.leaderboard) {
    if (e.global) {
      global_loss = e.validation_loss;
    } else {
      best_local = std::min(best_local, e.validation_loss);
    }
  }
  std::snprintf(buf, sizeof buf, "global-beats-locals: global %.2f vs best local %.2f", global_loss, best_local);
  line(global_loss <= best_local, buf);

  std::size_t whole = 0;
  std::size_t whole_repaired = 0;
  for (const auto& s : run.submissions) {
    if (!s.whole_dataset || !s.outcome || !s.outcome->global.accepted) continue;
    ++whole;
    if (!s.outcome->global.repairs.empty()) ++whole_repaired;
  }
  std::snprintf(buf, sizeof buf, "whole-dataset-repair: %zu accepted whole-dataset updates, %zu triggered repairs", whole,
                whole_repaired);
  line(whole_repaired > 0, buf);

  const auto bound = static_cast<std::size_t>(std::ceil(run.base_validation_loss / run.alpha));
  const auto nodes = run.global_acceptances + run.global_repairs;
  std::snprintf(buf, sizeof buf, "update-count-bound: %zu updates + %zu repairs <= ceil(%.2f / %.2f) = %zu",
                run.global_acceptances, run.global_repairs, run.base_validation_loss, run.alpha, bound);
  line(nodes <= bound, buf);

  bool replay_ok = false;
  std::string replay_note;
  try {
    replay_ok = replay_transcript(run.transcript) == run.final_state_hash;
    replay_note = replay_ok ? "state hash verified" : "state hash differs";
  } catch (const Error& e) {
    replay_note = e.what();
  }
  line(replay_ok, "replay: " + replay_note);

  auto sorted = sweep;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.alpha < b.alpha; });
  bool monotone = true;
  for (std::size_t i = 1; i < sorted.size(); ++i) monotone &= sorted[i].acceptances <= sorted[i - 1].acceptances;
  line(monotone, "alpha-sweep: acceptances non-increasing in alpha");

  out << "\nscenario " << scenario.name << "\n";
  std::snprintf(buf, sizeof buf, "%14s %12s %8s %16s\n", "alpha", "acceptances", "repairs", "global val loss");
  out << buf;
  for (const auto& r : sorted) {
    std::snprintf(buf, sizeof buf, "%14.2f %12zu %8zu %16.2f\n", r.alpha, r.acceptances, r.repairs,
                  r.global_validation_loss);
    out << buf;
  }
  return out.str();
}

}  // namespace bounty::sim
