// Acceptance gate: one PASS/FAIL line per headline criterion. Exit status is
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <regex>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

#include "bounty/digest.hpp"
#include "bounty/loss.hpp"
#include "bounty/service.hpp"
#include "bounty/sim.hpp"
#include "oracles.hpp"

using namespace bounty;
using Clock = std::chrono::steady_clock;

namespace {

struct Line {
  explicit Line(std::string n) : name(std::move(n)) {}
  std::string name;
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool within_rel(double a, double b, double rel) { return std::fabs(a - b) <= rel * std::max(1.0, std::fabs(b)); }

struct Run {
  std::string label;
  sim::Scenario scenario;
  sim::RunResult result;
};

// Per-version validation predictions of one track, from the naive interpreter.
std::vector<std::vector<double>> version_table(const ModelTrack& track, const Dataset& val) {
  const auto snap = track.pdl().snapshot();
  std::vector<std::vector<double>> table;
  for (std::uint32_t v = 0; v < track.pdl().version_count(); ++v) table.push_back(oracle::pdl_predict(snap, val, v));
  return table;
}

std::vector<bool> oracle_mask(const Predicate& p, const Dataset& d) {
  std::vector<bool> m(d.rows());
  for (std::size_t r = 0; r < d.rows(); ++r) m[r] = oracle::predicate_row(p, d, r);
  return m;
}

std::vector<const ModelTrack*> tracks(const Competition& comp) {
  std::vector<const ModelTrack*> out{&comp.global()};
  for (const auto& id : comp.team_ids()) out.push_back(&comp.local(id));
  return out;
}

// ---------------------------------------------------------------------------

Line count_bound(const std::vector<Run>& runs, double seconds) {
  Line line("theorem1-count-bound");
  std::size_t pdls = 0;
  std::size_t worst_nodes = 0;
  std::size_t worst_bound = 0;
  for (const auto& run : runs) {
    const auto& comp = run.result.service->competition();
    for (const auto* t : tracks(comp)) {
      ++pdls;
      const double l0 = oracle::two_pass_mse(predict(t->pdl().base(), *comp.data().validation),
                                             comp.data().validation->labels());
      const auto bound = static_cast<std::size_t>(std::ceil(l0 / comp.config().alpha));
      const auto nodes = t->pdl().nodes().size();
      if (nodes > bound) {
        line.pass = false;
        line.detail += fmt(" [%s: %zu nodes > %zu]", run.label.c_str(), nodes, bound);
      }
      if (nodes * std::max<std::size_t>(worst_bound, 1) > worst_nodes * std::max<std::size_t>(bound, 1)) {
        worst_nodes = nodes;
        worst_bound = bound;
      }
    }
  }
  if (seconds > 120) {
    line.pass = false;
    line.detail += fmt(" [runtime %.1fs > 120s]", seconds);
  }
  line.detail = fmt("%zu runs, %zu PDLs, 0 over bound (tightest %zu nodes vs bound %zu), %.1fs", runs.size(), pdls,
                    worst_nodes, worst_bound, seconds) +
                line.detail;
  return line;
}

Line monotonicity(const std::vector<Run>& runs) {
  Line line("theorem1-monotonicity");
  std::size_t groups = 0;
  std::size_t steps = 0;
  for (const auto& run : runs) {
    const auto& comp = run.result.service->competition();
    const auto& val = *comp.data().validation;
    for (const auto* t : tracks(comp)) {
      const auto table = version_table(*t, val);
      for (const auto& rec : t->groups()) {
        ++groups;
        const auto mask = oracle_mask(rec.predicate, val);
        double previous = INFINITY;
        for (auto v : t->published()) {
          if (v < rec.introduced_at) continue;
          const double loss = oracle::filtered_mse(table[v.value], val.labels(), mask);
          ++steps;
          if (loss > previous && !within_rel(loss, previous, 1e-9)) {
            line.pass = false;
            line.detail += fmt(" [%s %s: %.12g -> %.12g at v%u]", run.label.c_str(), rec.key.c_str(), previous, loss,
                               v.value);
          }
          previous = std::min(previous, loss);
        }
      }
    }
  }
  line.detail = fmt("%zu groups across all PDLs, %zu published-head steps, non-increasing within 1e-9 rel", groups,
                    steps) +
                line.detail;
  return line;
}

Line strict_progress(const std::vector<Run>& runs) {
  Line line("strict-progress");
  std::size_t checked = 0;
  double worst_gap = 0.0;
  for (const auto& run : runs) {
    const auto& comp = run.result.service->competition();
    const auto& val = *comp.data().validation;
    const auto table = version_table(comp.global(), val);
    for (const auto& s : run.result.submissions) {
      if (!s.outcome || !s.outcome->global.accepted) continue;
      const auto& v = s.outcome->global;
      ++checked;
      const double before = oracle::two_pass_mse(table[v.update_version.value - 1], val.labels());
      const double after = oracle::two_pass_mse(table[v.update_version.value], val.labels());
      const double drop = before - after;
      worst_gap = std::max(worst_gap, std::fabs(v.improvement - drop) / std::max(1.0, before));
      if (!(drop > comp.config().alpha)) {
        line.pass = false;
        line.detail += fmt(" [%s #%llu: drop %.6g <= alpha %.6g]", run.label.c_str(),
                           static_cast<unsigned long long>(s.id), drop, comp.config().alpha);
      }
      if (!within_rel(v.improvement, drop, 1e-9)) {
        line.pass = false;
        line.detail += fmt(" [%s #%llu: w*delta %.12g vs drop %.12g]", run.label.c_str(),
                           static_cast<unsigned long long>(s.id), v.improvement, drop);
      }
    }
  }
  if (checked == 0) line.pass = false;
  line.detail = fmt("%zu accepted global updates; drop > alpha for all; max |w*delta - drop| %.2e rel", checked,
                    worst_gap) +
                line.detail;
  return line;
}

Line global_beats_locals(const Run& toy, double seconds) {
  Line line("global-beats-locals");
  const auto& report = toy.result.report;
  double global = NAN;
  double best_local = INFINITY;
  std::string best;
  for (const auto& row : report.rows) {
    if (row.model == kGlobalModelName) {
      global = row.validation_loss;
    } else if (row.validation_loss < best_local) {
      best_local = row.validation_loss;
      best = row.model;
    }
  }
  const auto agents = toy.scenario.agents.size();
  line.pass = agents >= 4 && global <= best_local && seconds <= 300;
  line.detail = fmt("%s, %zu agents: global %.2f <= best local %.2f (%s), %.1fs", toy.label.c_str(), agents, global,
                    best_local, best.c_str(), seconds);
  return line;
}

// Checks one verdict: every group registered before the update sits at its
// minimum over all versions since it was introduced.
void check_minima(const ModelTrack& track, const std::vector<std::vector<double>>& table, const Dataset& val,
                  const Verdict& v, const std::string& where, Line& line, std::size_t& groups_checked) {
  for (const auto& rec : track.groups()) {
    if (!(rec.introduced_at < v.update_version)) continue;
    ++groups_checked;
    const auto mask = oracle_mask(rec.predicate, val);
    double minimum = INFINITY;
    for (auto u = rec.introduced_at.value; u <= v.version.value; ++u) {
      minimum = std::min(minimum, oracle::filtered_mse(table[u], val.labels(), mask));
    }
    const double now = oracle::filtered_mse(table[v.version.value], val.labels(), mask);
    if (now > minimum && !within_rel(now, minimum, 1e-9)) {
      line.pass = false;
      line.detail += fmt(" [%s %s at v%u: %.12g > minimum %.12g]", where.c_str(), rec.key.c_str(), v.version.value,
                         now, minimum);
    }
  }
}

Line repair_on_whole_dataset(const std::vector<Run>& runs) {
  Line line("repair-on-whole-dataset");
  std::size_t toy_triggering = 0;
  std::size_t toy_groups = 0;
  std::size_t triggering = 0;
  std::size_t groups_checked = 0;
  for (const auto& run : runs) {
    const bool toy = &run == &runs.front();
    const auto& comp = run.result.service->competition();
    const auto& val = *comp.data().validation;
    const auto global_table = version_table(comp.global(), val);
    for (const auto& s : run.result.submissions) {
      if (!s.whole_dataset || !s.outcome) continue;
      const auto& g = s.outcome->global;
      if (g.accepted && !g.repairs.empty()) {
        ++triggering;
        toy_triggering += toy;
        const auto before = groups_checked;
        check_minima(comp.global(), global_table, val, g, run.label + " global", line, groups_checked);
        if (toy) toy_groups += groups_checked - before;
      }
      const auto& l = s.outcome->local;
      if (l.accepted && !l.repairs.empty()) {
        ++triggering;
        const auto& local = comp.local(s.agent);
        check_minima(local, version_table(local, val), val, l, run.label + " " + s.agent, line, groups_checked);
      }
    }
  }
  if (toy_triggering == 0) line.pass = false;
  line.detail = fmt("%s: %zu accepted TRUE updates triggered global repairs (%zu prior groups checked); "
                    "all %zu runs: %zu triggering TRUE updates, %zu prior groups at historical minima",
                    runs.front().label.c_str(), toy_triggering, toy_groups, runs.size(), triggering, groups_checked) +
                line.detail;
  return line;
}

Line oracle_equivalence() {
  Line line("oracle-equivalence");
  Rng rng(20240601);
  std::size_t versions = 0;
  std::size_t cells = 0;
  for (int pair = 0; pair < 1000; ++pair) {
    const auto s = fuzz::schema(rng);
    const auto d = fuzz::dataset(s, 1 + rng.below(1000), rng);
    const auto pdl = fuzz::pdl(s, rng, rng.below(64));
    const auto snap = pdl.snapshot();
    for (std::uint32_t v = 0; v < pdl.version_count(); ++v) {
      ++versions;
      const auto got = pdl.predict(VersionId{v}, d);
      const auto want = oracle::pdl_predict(snap, d, v);
      cells += got.size();
      if (got != want) {
        line.pass = false;
        line.detail += fmt(" [pair %d version %u differs]", pair, v);
        break;
      }
    }
  }
  line.detail = fmt("1000 fuzzed (PDL, dataset) pairs, %zu versions, %zu predictions, exact", versions, cells) +
                line.detail;
  return line;
}

Line replay_determinism(const std::vector<Run>& runs, const Run& toy) {
  Line line("replay-determinism");
  for (const auto& run : runs) {
    const auto hash = sim::replay_transcript(run.result.transcript);
    if (hash != run.result.final_state_hash) {
      line.pass = false;
      line.detail += fmt(" [%s replay mismatch]", run.label.c_str());
    }
  }
  const auto dir = std::filesystem::temp_directory_path() / ("bounty-acceptance-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  sim::RunOptions options;
  options.state_dir = dir;
  options.crash_after = toy.result.submissions.size() / 2;
  const auto crashed = sim::run_competition(toy.scenario, options);
  std::filesystem::remove_all(dir);
  const bool crash_ok = crashed.final_state_hash == toy.result.final_state_hash;
  if (!crash_ok) {
    line.pass = false;
    line.detail += " [crash-restart hash differs]";
  }
  line.detail = fmt("%zu transcripts replayed to their hashes; crash after %zu of %zu submissions -> %s", runs.size(),
                    *options.crash_after, toy.result.submissions.size(),
                    crash_ok ? ("same hash " + toy.result.final_state_hash.substr(0, 12)).c_str() : "different hash") +
                line.detail;
  return line;
}

std::vector<double> numbers_in(const std::string& body) {
  static const std::regex number(R"(-?\d+(\.\d+)?([eE][-+]?\d+)?)");
  std::vector<double> out;
  for (auto it = std::sregex_iterator(body.begin(), body.end(), number); it != std::sregex_iterator(); ++it) {
    try {
      out.push_back(std::stod(it->str()));
    } catch (const std::out_of_range&) {
      // Digit runs inside hashes, not values.
    }
  }
  return out;
}

std::string bearer(const std::string& token) { return "Bearer " + token; }

Line rate_limit_and_hiding(const Run& toy) {
  Line line("rate-limit-and-information-hiding");
  const auto& transcript = toy.result.transcript;
  const auto& doc = transcript.at("config");
  const auto data = sim::materialize_data(doc.at("data"), {}, doc.value("seed", std::uint64_t{0}));
  const auto config = config_from_json(doc, {}, &data.train->schema());
  const auto entries = transcript_entries(transcript, data.train->schema(), config.limits);
  const std::string organizer = "acceptance-organizer";

  // Re-drive the scenario through the service API with known credentials.
  auto clock_ms = std::make_shared<std::atomic<std::int64_t>>(0);
  ServiceOptions options;
  options.organizer_token_sha256 = sha256_hex(organizer);
  options.clock = [clock_ms] { return Timestamp(std::chrono::milliseconds(clock_ms->load())); };
  options.sync_log = false;
  BountyService service(Competition(config, data), options);
  std::map<std::string, std::string> tokens;
  std::vector<std::string> bodies;
  auto keep = [&](const ApiResult& r) {
    bodies.push_back(r.body);
    for (const auto& [k, v] : r.headers) bodies.push_back(v);
    return r;
  };
  std::size_t submitted = 0;
  for (const auto& e : entries) {
    clock_ms->store(e.time.time_since_epoch().count());
    if (e.kind == LogEntry::Kind::add_team) {
      const auto r = keep(service.add_team(bearer(organizer), nlohmann::json{{"team", e.team}}.dump()));
      tokens[e.team] = r.json().at("token").get<std::string>();
    } else if (e.kind == LogEntry::Kind::submission) {
      if (keep(service.submit(bearer(tokens.at(e.team)), serialize_bundle(*e.bundle))).status != 202) {
        line.pass = false;
        line.detail += " [re-driven submission refused]";
      }
      ++submitted;
    }
  }
  service.drain();
  if (service.state_hash() != toy.result.final_state_hash) {
    line.pass = false;
    line.detail += " [re-driven state differs from the harness run]";
  }

  // Rate limit: a fresh team gets exactly k submissions on the last day.
  const auto k = config.daily_submission_limit;
  const auto team = keep(service.add_team(bearer(organizer), R"({"team":"late"})")).json().at("token").get<std::string>();
  const auto filler = serialize_bundle(ModelBundle{Predicate::always_true(), ConstantModel{1}, {}});
  std::uint32_t admitted = 0;
  ApiResult refused;
  for (std::uint32_t i = 0; i <= k; ++i) {
    const auto r = keep(service.submit(bearer(team), filler));
    if (r.status == 202) {
      ++admitted;
    } else {
      refused = r;
    }
  }
  const auto now = Timestamp(std::chrono::milliseconds(clock_ms->load()));
  const bool limit_ok = admitted == k && refused.status == 429 &&
                        refused.json().at("reset_at") == format_timestamp(next_utc_midnight(now));
  if (!limit_ok) {
    line.pass = false;
    line.detail += fmt(" [limit %u: %u admitted, then %d]", k, admitted, refused.status);
  }
  service.drain();

  // Every read endpoint, over every id and version.
  const auto& comp = service.competition();
  const auto head = comp.global().pdl().current().value;
  for (std::uint64_t id = 1; id <= comp.log().size() + 1; ++id) {
    keep(service.submission(bearer(organizer), std::to_string(id)));
  }
  for (const auto& [name, token] : tokens) keep(service.submission(bearer(token), "2"));
  keep(service.leaderboard());
  keep(service.events(0, std::chrono::milliseconds(0)));
  keep(service.admin_state(bearer(organizer)));
  for (std::uint32_t v = 0; v <= head + 1; ++v) keep(service.train_predictions(std::to_string(v)));

  std::set<double> hidden;
  for (const auto* d : {comp.data().validation.get(), comp.data().test.get()}) {
    hidden.insert(d->labels().begin(), d->labels().end());
    for (const auto* t : tracks(comp)) {
      for (std::uint32_t v = 0; v < t->pdl().version_count(); ++v) {
        for (double p : t->pdl().predict(VersionId{v}, *d)) hidden.insert(p);
      }
    }
  }
  const auto hidden_total = hidden.size();
  for (std::uint32_t v = 0; v <= head; ++v) {
    for (double p : comp.global().pdl().predict(VersionId{v}, *comp.data().train)) hidden.erase(p);
  }
  for (double y : comp.data().train->labels()) hidden.erase(y);
  std::size_t scanned = 0;
  std::size_t leaks = 0;
  for (const auto& body : bodies) {
    for (double x : numbers_in(body)) {
      ++scanned;
      if (hidden.contains(x)) ++leaks;
    }
  }
  if (leaks > 0) {
    line.pass = false;
    line.detail += fmt(" [%zu held-out values found in responses]", leaks);
  }
  line.detail = fmt("limit %u: %u admitted, next refused 429 until %s; %zu responses, %zu numbers scanned against "
                    "%zu held-out values (%zu shared with public data excluded), %zu leaks",
                    k, admitted, format_timestamp(next_utc_midnight(now)).c_str(), bodies.size(), scanned,
                    hidden.size(), hidden_total - hidden.size(), leaks) +
                line.detail;
  (void)submitted;
  return line;
}

Line alpha_sweep(const std::vector<Run>& runs) {
  Line line("alpha-sweep-monotone");
  std::string toy_counts;
  for (const auto& run : runs) {
    const double alpha = run.result.alpha;
    const auto rows = sim::alpha_sweep(run.scenario, {alpha / 4, alpha / 2, alpha, alpha * 2, alpha * 4});
    std::string counts;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      counts += (i ? "," : "") + std::to_string(rows[i].acceptances);
      if (i > 0 && rows[i].acceptances > rows[i - 1].acceptances) line.pass = false;
    }
    if (toy_counts.empty()) toy_counts = counts;
    if (!line.pass && line.detail.find(run.label) == std::string::npos) {
      line.detail += " [" + run.label + ": " + counts + "]";
    }
  }
  line.detail = fmt("%zu scenarios x 5 alphas (x1/4..x4); southern-toy acceptances %s", runs.size(),
                    toy_counts.c_str()) +
                line.detail;
  return line;
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path scenario_path = std::filesystem::path(BOUNTY_SOURCE_DIR) / "data/scenarios/southern-toy.json";
  if (argc > 1) scenario_path = argv[1];

  sim::RunOptions keep;
  keep.keep_service = true;
  std::vector<Run> runs;
  const auto start = Clock::now();
  {
    Run toy{"southern-toy", sim::load_scenario(scenario_path), {}};
    toy.result = sim::run_competition(toy.scenario, keep);
    runs.push_back(std::move(toy));
  }
  const double toy_seconds = seconds_since(start);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Run r{"fuzz-" + std::to_string(seed), sim::fuzz_scenario(seed), {}};
    r.result = sim::run_competition(r.scenario, keep);
    runs.push_back(std::move(r));
  }
  const double run_seconds = seconds_since(start);
  std::cerr << fmt("scenario runs %.1fs", run_seconds) << std::endl;

  std::vector<Line> lines;
  auto timed = [&](auto&& check) {
    const auto t = Clock::now();
    lines.push_back(check());
    std::cerr << lines.back().name << fmt(" %.1fs", seconds_since(t)) << std::endl;
  };
  timed([&] { return count_bound(runs, run_seconds); });
  timed([&] { return monotonicity(runs); });
  timed([&] { return strict_progress(runs); });
  timed([&] { return global_beats_locals(runs.front(), toy_seconds); });
  timed([&] { return repair_on_whole_dataset(runs); });
  timed([&] { return oracle_equivalence(); });
  timed([&] { return replay_determinism(runs, runs.front()); });
  timed([&] { return rate_limit_and_hiding(runs.front()); });
  timed([&] { return alpha_sweep(runs); });

  int failed = 0;
  for (const auto& l : lines) {
    std::cout << (l.pass ? "PASS " : "FAIL ") << l.name << ": " << l.detail << '\n';
    failed += !l.pass;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << lines.size() - failed << '/' << lines.size() << " in "
            << fmt("%.1fs", seconds_since(start)) << std::endl;
  return failed ? 1 : 0;
}
