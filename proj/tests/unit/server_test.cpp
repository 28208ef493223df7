#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <regex>
#include <set>
#include <thread>

#include <httplib.h>

#include "bounty/digest.hpp"
#include "bounty/error.hpp"
#include "bounty/http_server.hpp"
#include "bounty/service.hpp"
#include "bounty/sim.hpp"
#include "bounty/trainers.hpp"

using namespace bounty;
using std::chrono::hours;
using std::chrono::milliseconds;
using std::chrono::minutes;

namespace {

const Timestamp kStart = *parse_timestamp("2024-06-01T00:00:00Z");
const std::string kOrganizer = "organizer-secret";

struct Clock {
  std::shared_ptr<std::atomic<std::int64_t>> ms =
      std::make_shared<std::atomic<std::int64_t>>(kStart.time_since_epoch().count());
  void advance(milliseconds d) { *ms += d.count(); }
  Timestamp now() const { return Timestamp(milliseconds(ms->load())); }
  std::function<Timestamp()> fn() const {
    auto p = ms;
    return [p] { return Timestamp(milliseconds(p->load())); };
  }
};

nlohmann::json task() {
  return {{"seed", 99},
          {"rows", 1200},
          {"label", {{"name", "y"}, {"range", {0, 1000}}}},
          {"features",
           {{{"name", "x"}, {"kind", "numeric"}, {"range", {0, 10}}},
            {{"name", "c"}, {"kind", "categorical"}, {"values", {"a", "b", "c"}}}}},
          {"base", {{"intercept", 100}, {"coefficients", {{"x", 20}}}}},
          {"regimes", {{{"when", {{"c", {"b"}}}}, {"intercept", 200}, {"coefficients", {{"x", 30}}}}}},
          {"noise_sigma", 25}};
}

CompetitionConfig config(std::uint32_t limit = 100) {
  CompetitionConfig c;
  c.alpha = 5;
  c.start_time = kStart;
  c.seed = 3;
  c.daily_submission_limit = limit;
  return c;
}

CompetitionData data() {
  return sim::materialize_data({{"synthetic", task()}, {"weights", {0.6, 0.2, 0.2}}}, {}, 3);
}

std::string bearer(const std::string& token) { return "Bearer " + token; }

std::string bundle_text(const std::string& group, const Hypothesis& h) {
  return serialize_bundle(ModelBundle{parse_predicate(group), h, {}});
}

// Ridge fit on the group's training rows.
std::string fitted(const Dataset& train, const std::string& group) {
  const auto mask = eval_predicate(parse_predicate(group), train);
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (mask[r]) idx.push_back(r);
  }
  return bundle_text(group, fit_linear(train.select(idx), 1.0));
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { make(config()); }

  void make(const CompetitionConfig& c) {
    ServiceOptions options;
    options.organizer_token_sha256 = sha256_hex(kOrganizer);
    options.clock = clock.fn();
    options.sync_log = false;
    service = std::make_unique<BountyService>(Competition(c, data()), options);
  }

  std::string add(const std::string& team) {
    const auto r = service->add_team(bearer(kOrganizer), nlohmann::json{{"team", team}}.dump());
    EXPECT_EQ(r.status, 201) << r.body;
    return r.json().at("token").get<std::string>();
  }

  const Dataset& train() const { return *service->competition().data().train; }

  Clock clock;
  std::unique_ptr<BountyService> service;
};

}  // namespace

TEST_F(ServiceTest, AuthStatuses) {
  const auto alice = add("alice");
  const auto bob = add("bob");
  const auto body = bundle_text("TRUE", ConstantModel{300});
  EXPECT_EQ(service->submit("", body).status, 401);
  EXPECT_EQ(service->submit("Bearer nope", body).status, 401);
  EXPECT_EQ(service->submit(alice, body).status, 401);  // missing scheme
  const auto r = service->submit(bearer(alice), body);
  ASSERT_EQ(r.status, 202);
  const auto id = std::to_string(r.json().at("id").get<std::uint64_t>());
  service->drain();
  EXPECT_EQ(service->submission(bearer(alice), id).status, 200);
  EXPECT_EQ(service->submission(bearer(kOrganizer), id).status, 200);
  EXPECT_EQ(service->submission(bearer(bob), id).status, 403);
  EXPECT_EQ(service->submission(bearer(alice), "999").status, 404);
  EXPECT_EQ(service->submission(bearer(alice), "abc").status, 404);
  EXPECT_EQ(service->submission("", id).status, 401);
  EXPECT_EQ(service->add_team(bearer(alice), R"({"team":"mallory"})").status, 401);
  EXPECT_EQ(service->admin_state(bearer(alice)).status, 401);
  EXPECT_EQ(service->freeze("").status, 401);
  EXPECT_EQ(service->remove_team(bearer(bob), "alice").status, 401);
}

TEST_F(ServiceTest, ReceiptLifecycle) {
  const auto alice = add("alice");
  // Team registration takes sequence 1.
  const auto r = service->submit(bearer(alice), fitted(train(), "c == \"b\""));
  ASSERT_EQ(r.status, 202);
  EXPECT_EQ(r.json().at("status"), "queued");
  EXPECT_EQ(r.json().at("id"), 2);
  service->drain();
  const auto got = service->submission(bearer(alice), "2").json();
  EXPECT_EQ(got.at("status"), "evaluated");
  for (const char* side : {"global", "local"}) {
    const auto& v = got.at(side);
    for (const char* field : {"accepted", "weight", "loss_current", "loss_candidate", "improvement", "overall_before",
                              "overall_after", "points", "repairs"}) {
      EXPECT_TRUE(v.contains(field)) << side << "." << field;
    }
  }
  EXPECT_TRUE(got.at("global").at("accepted").get<bool>());
}

TEST_F(ServiceTest, QueuedUntilApplied) {
  const auto alice = add("alice");
  service->drain();
  service->abandon();
  const auto r = service->submit(bearer(alice), bundle_text("TRUE", ConstantModel{1}));
  ASSERT_EQ(r.status, 202);
  EXPECT_EQ(service->submission(bearer(alice), std::to_string(r.json().at("id").get<int>())).json().at("status"),
            "queued");
}

TEST_F(ServiceTest, PayloadAndBundleErrors) {
  auto c = config();
  c.limits.bundle_bytes = 200;
  make(c);
  const auto alice = add("alice");
  EXPECT_EQ(service->submit(bearer(alice), std::string(201, ' ')).status, 413);
  const auto bad = service->submit(bearer(alice), R"({"format_version":1,"group":"x <","hypothesis":{"type":"constant","value":1}})");
  ASSERT_EQ(bad.status, 422);
  const auto issue = bad.json().at("issues").at(0);
  EXPECT_EQ(issue.at("code"), "SyntaxError");
  EXPECT_NE(issue.at("message").get<std::string>().find("column"), std::string::npos);
  EXPECT_EQ(service->submit(bearer(alice), R"({"format_version":1,"group":"zz < 1","hypothesis":{"type":"constant","value":1}})")
                .json()
                .at("issues")
                .at(0)
                .at("code"),
            "UnknownFeature");
}

TEST_F(ServiceTest, RateLimitResetsAtUtcMidnight) {
  make(config(2));
  const auto alice = add("alice");
  const auto body = bundle_text("TRUE", ConstantModel{1});
  clock.advance(hours(13) + minutes(7));
  EXPECT_EQ(service->submit(bearer(alice), body).status, 202);
  EXPECT_EQ(service->submit(bearer(alice), body).status, 202);
  const auto third = service->submit(bearer(alice), body);
  ASSERT_EQ(third.status, 429);
  EXPECT_EQ(third.json().at("reset_at"), "2024-06-02T00:00:00.000Z");
  EXPECT_EQ(third.headers.at("Retry-After"), std::to_string((10 * 60 + 53) * 60));
  // Rejected prechecks do not count.
  EXPECT_EQ(service->submit(bearer(alice), "{}").status, 422);
  clock.advance(hours(11));
  EXPECT_EQ(service->submit(bearer(alice), body).status, 202);
  EXPECT_EQ(service->submit(bearer(alice), body).status, 202);
  EXPECT_EQ(service->submit(bearer(alice), body).status, 429);
  service->drain();
  EXPECT_EQ(service->competition().log().size(), 5u);
}

TEST_F(ServiceTest, RateLimitIsExactUnderConcurrency) {
  make(config(7));
  std::vector<std::string> tokens;
  for (int t = 0; t < 4; ++t) tokens.push_back(add("t" + std::to_string(t)));
  std::vector<std::atomic<int>> accepted(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    for (int k = 0; k < 3; ++k) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < 5; ++i) {
          if (service->submit(bearer(tokens[t]), bundle_text("TRUE", ConstantModel{1.0 + i})).status == 202) ++accepted[t];
        }
      });
    }
  }
  for (auto& th : threads) th.join();
  for (auto& a : accepted) EXPECT_EQ(a.load(), 7);
}

TEST_F(ServiceTest, QueueFullIs503) {
  auto c = config();
  c.queue_depth = 1;
  make(c);
  const auto alice = add("alice");
  service->drain();
  service->abandon();
  const auto body = bundle_text("TRUE", ConstantModel{1});
  EXPECT_EQ(service->submit(bearer(alice), body).status, 202);
  EXPECT_EQ(service->submit(bearer(alice), body).status, 503);
}

TEST_F(ServiceTest, FreezeAndRemoval) {
  const auto alice = add("alice");
  const auto bob = add("bob");
  EXPECT_EQ(service->add_team(bearer(kOrganizer), R"({"team":"alice"})").status, 409);
  EXPECT_EQ(service->add_team(bearer(kOrganizer), R"({"team":"bad name!"})").status, 400);
  EXPECT_EQ(service->remove_team(bearer(kOrganizer), "bob").status, 200);
  EXPECT_EQ(service->remove_team(bearer(kOrganizer), "bob").status, 404);
  EXPECT_EQ(service->submit(bearer(bob), bundle_text("TRUE", ConstantModel{1})).status, 401);
  EXPECT_EQ(service->freeze(bearer(kOrganizer)).status, 200);
  const auto r = service->submit(bearer(alice), bundle_text("TRUE", ConstantModel{1}));
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.json().at("message"), "competition-frozen");
  service->drain();
  const auto state = service->admin_state(bearer(kOrganizer)).json();
  EXPECT_EQ(state.at("frozen"), true);
  EXPECT_EQ(state.at("state_hash"), service->state_hash());
}

TEST_F(ServiceTest, CredentialIsReturnedOnce) {
  const auto token = add("alice");
  EXPECT_GE(token.size(), 32u);  // at least 128 bits as hex
  service->drain();
  for (const auto& body : {service->admin_state(bearer(kOrganizer)).body, service->leaderboard().body,
                           service->events(0, milliseconds(0)).body, service->transcript().dump()}) {
    EXPECT_EQ(body.find(token), std::string::npos);
  }
}

TEST_F(ServiceTest, EventsFollowAcceptances) {
  const auto alice = add("alice");
  const auto latest = service->events(0, milliseconds(0)).json().at("latest").get<std::uint64_t>();
  EXPECT_TRUE(service->events(latest, milliseconds(0)).json().at("events").empty());
  ASSERT_EQ(service->submit(bearer(alice), fitted(train(), "c == \"b\"")).status, 202);
  service->drain();
  const auto fresh = service->events(latest, milliseconds(0)).json().at("events");
  int accepted = 0;
  std::uint64_t expect_seq = latest + 1;
  for (const auto& e : fresh) {
    EXPECT_EQ(e.at("seq"), expect_seq++);
    if (e.at("kind") == "global_update_accepted") {
      ++accepted;
      const auto& p = e.at("payload");
      EXPECT_GT(p.at("error_reduction").get<double>(), 5.0);
      const auto path = p.at("train_predictions").get<std::string>();
      EXPECT_EQ(path, "/model/global/1/train-predictions");
    }
  }
  EXPECT_EQ(accepted, 1);
}

TEST_F(ServiceTest, EventsLongPollWakesOnNewEvents) {
  const auto alice = add("alice");
  service->drain();
  const auto latest = service->events(0, milliseconds(0)).json().at("latest").get<std::uint64_t>();
  std::thread submitter([&] {
    std::this_thread::sleep_for(milliseconds(50));
    service->submit(bearer(alice), fitted(train(), "c == \"b\""));
  });
  const auto r = service->events(latest, milliseconds(5000)).json();
  submitter.join();
  EXPECT_FALSE(r.at("events").empty());
}

TEST_F(ServiceTest, TrainPredictions) {
  const auto alice = add("alice");
  const auto v0 = service->train_predictions("0");
  ASSERT_EQ(v0.status, 200);
  EXPECT_EQ(v0.content_type, "text/csv");
  const std::string group = "c == \"b\"";
  ASSERT_EQ(service->submit(bearer(alice), fitted(train(), group)).status, 202);
  service->drain();
  const auto v1 = service->train_predictions("1");
  ASSERT_EQ(v1.status, 200);
  EXPECT_EQ(service->train_predictions("2").status, 404);
  EXPECT_EQ(service->train_predictions("x").status, 404);

  auto parse = [](const std::string& csv) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) out.push_back(std::stod(line.substr(line.find(',') + 1)));
    return out;
  };
  const auto p0 = parse(v0.body);
  const auto p1 = parse(v1.body);
  ASSERT_EQ(p0.size(), train().rows());
  const auto base = predict(service->competition().global().pdl().base(), train());
  const auto mask = eval_predicate(parse_predicate(group), train());
  for (std::size_t r = 0; r < p0.size(); ++r) {
    EXPECT_EQ(p0[r], base[r]);
    if (!mask[r]) {
      EXPECT_EQ(p1[r], p0[r]);
    }
  }
  EXPECT_NE(p0, p1);
}

TEST_F(ServiceTest, LeaderboardOverTheService) {
  const auto alice = add("alice");
  add("bob");
  service->drain();
  auto entries = service->leaderboard().json().at("entries");
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[1].at("name"), "alice");
  EXPECT_EQ(entries[2].at("name"), "bob");
  ASSERT_EQ(service->submit(bearer(alice), fitted(train(), "c == \"b\"")).status, 202);
  service->drain();
  entries = service->leaderboard().json().at("entries");
  EXPECT_EQ(entries[0].at("name"), kGlobalModelName);
  for (const auto& e : entries) {
    EXPECT_LE(entries[0].at("validation_loss").get<double>(), e.at("validation_loss").get<double>());
  }
}

namespace {

// Every number appearing in a response body.
std::vector<double> numbers_in(const std::string& body) {
  static const std::regex number(R"(-?\d+(\.\d+)?([eE][-+]?\d+)?)");
  std::vector<double> out;
  for (auto it = std::sregex_iterator(body.begin(), body.end(), number); it != std::sregex_iterator(); ++it) {
    out.push_back(std::stod(it->str()));
  }
  return out;
}

}  // namespace

TEST_F(ServiceTest, NoEndpointRevealsHeldOutData) {
  std::vector<std::string> tokens;
  for (const char* t : {"alice", "bob"}) tokens.push_back(add(t));
  std::vector<std::string> bodies;
  auto keep = [&](const ApiResult& r) {
    bodies.push_back(r.body);
    for (const auto& [k, v] : r.headers) bodies.push_back(v);
    return r;
  };
  for (const char* g : {"c == \"b\"", "x < 3", "TRUE", "c == \"a\" AND x > 5"}) {
    for (const auto& t : tokens) keep(service->submit(bearer(t), fitted(train(), g)));
  }
  keep(service->submit(bearer(tokens[0]), "{}"));
  keep(service->submit(bearer(tokens[1]), bundle_text("x > 100", ConstantModel{5})));
  service->drain();
  for (std::uint64_t id = 1; id < 14; ++id) {
    keep(service->submission(bearer(kOrganizer), std::to_string(id)));
    keep(service->submission(bearer(tokens[0]), std::to_string(id)));
  }
  keep(service->leaderboard());
  keep(service->events(0, milliseconds(0)));
  keep(service->admin_state(bearer(kOrganizer)));
  const auto head = service->competition().global().pdl().current().value;
  for (std::uint32_t v = 0; v <= head + 1; ++v) keep(service->train_predictions(std::to_string(v)));
  keep(service->remove_team(bearer(kOrganizer), "bob"));
  keep(service->freeze(bearer(kOrganizer)));

  const auto& comp = service->competition();
  std::set<double> hidden;
  for (const auto* d : {comp.data().validation.get(), comp.data().test.get()}) {
    hidden.insert(d->labels().begin(), d->labels().end());
    const auto& pdl = comp.global().pdl();
    for (std::uint32_t v = 0; v <= head; ++v) {
      for (double p : pdl.predict(VersionId{v}, *d)) hidden.insert(p);
    }
  }
  // Predictions shared with the training split are public by design.
  for (std::uint32_t v = 0; v <= head; ++v) {
    for (double p : comp.global().pdl().predict(VersionId{v}, train())) hidden.erase(p);
  }
  for (double y : train().labels()) hidden.erase(y);
  ASSERT_GT(hidden.size(), 100u);
  std::size_t scanned = 0;
  for (const auto& body : bodies) {
    for (double x : numbers_in(body)) {
      ++scanned;
      EXPECT_FALSE(hidden.contains(x)) << "held-out value " << x << " in " << body.substr(0, 200);
    }
    // No vector shaped like a held-out split.
    EXPECT_EQ(body.find("validation.csv"), std::string::npos);
  }
  EXPECT_GT(scanned, 1000u);
}

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bounty-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Durability, CrashRestartKeepsTheHash) {
  const auto dir = fresh_dir("crash");
  const auto organizer = init_state_dir(dir, config(), data());
  Clock clock;
  ServiceOptions options;
  options.clock = clock.fn();
  options.sync_log = false;
  std::string hash;
  {
    auto service = BountyService::open(dir, options);
    const auto tok = service->add_team(bearer(organizer), R"({"team":"alice"})").json().at("token").get<std::string>();
    const auto& tr = *service->competition().data().train;
    for (const char* g : {"c == \"b\"", "x < 3", "c == \"c\" AND x > 4"}) {
      clock.advance(minutes(5));
      ASSERT_EQ(service->submit(bearer(tok), fitted(tr, g)).status, 202);
    }
    // Stop before the queue drains: the log is ahead of the applied state.
    service->abandon();
  }
  {
    auto service = BountyService::open(dir, options);
    service->drain();
    hash = service->state_hash();
    EXPECT_EQ(service->competition().log().size(), 4u);
    EXPECT_GE(service->competition().global().updates(), 1u);
  }
  // Torn tail: a half-written line is dropped on recovery.
  {
    std::ofstream log(dir / "log.jsonl", std::ios::app);
    log << R"({"kind":"submission","seq":5,"te)";
  }
  {
    auto service = BountyService::open(dir, options);
    service->drain();
    EXPECT_EQ(service->state_hash(), hash);
    // Recovery restores credentials and counters: the next id follows on.
    const auto tok = service->add_team(bearer(organizer), R"({"team":"bob"})").json().at("token").get<std::string>();
    const auto r = service->submit(bearer(tok), bundle_text("TRUE", ConstantModel{1}));
    EXPECT_EQ(r.json().at("id"), 6);
    service->drain();
  }
  {
    auto service = BountyService::open(dir, options);
    service->drain();
    const auto [cfg, d] = load_state_dir(dir);
    const auto replayed = Competition::replay(
        cfg, d, transcript_entries(service->transcript(), *d.train->schema_ptr(), cfg.limits));
    EXPECT_EQ(replayed.state_hash(), service->state_hash());
    EXPECT_EQ(service->admin_state(bearer(organizer)).json().at("state_hash"), replayed.state_hash());
  }
  std::filesystem::remove_all(dir);
}

TEST(Durability, InitRefusesExistingDir) {
  const auto dir = fresh_dir("exists");
  std::filesystem::create_directories(dir);
  EXPECT_THROW(init_state_dir(dir, config(), data()), Error);
  std::filesystem::remove_all(dir);
}

TEST(Concurrency, AdmissionOrderEquivalence) {
  Clock clock;
  ServiceOptions options;
  options.organizer_token_sha256 = sha256_hex(kOrganizer);
  options.clock = clock.fn();
  options.sync_log = false;
  BountyService service(Competition(config(1000), data()), options);
  std::vector<std::string> tokens;
  for (int t = 0; t < 4; ++t) {
    tokens.push_back(service.add_team(bearer(kOrganizer), nlohmann::json{{"team", "t" + std::to_string(t)}}.dump())
                         .json()
                         .at("token")
                         .get<std::string>());
  }
  const auto& tr = *service.competition().data().train;
  const std::vector<std::string> groups = {"c == \"a\"", "c == \"b\"", "c == \"c\"", "x < 2", "x >= 8",
                                           "x < 5 AND c == \"b\"", "TRUE", "x >= 3 AND x < 6"};
  std::vector<std::string> bodies;
  for (const auto& g : groups) bodies.push_back(fitted(tr, g));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 12; ++i) {
        const auto r = service.submit(bearer(tokens[t]), bodies[(t * 3 + i) % bodies.size()]);
        ASSERT_EQ(r.status, 202);
        if (i % 4 == 0) service.leaderboard();
      }
    });
  }
  for (auto& th : threads) th.join();
  service.drain();
  const auto& comp = service.competition();
  const auto replayed =
      Competition::replay(comp.config(), comp.data(), transcript_entries(service.transcript(), comp.schema(), comp.config().limits));
  EXPECT_EQ(replayed.state_hash(), service.state_hash());
  EXPECT_EQ(comp.log().size(), 4u + 48u);
  std::uint64_t seq = 1;
  for (const auto& e : comp.log()) EXPECT_EQ(e.sequence, seq++);
}

TEST(Http, Routes) {
  Clock clock;
  ServiceOptions options;
  options.organizer_token_sha256 = sha256_hex(kOrganizer);
  options.clock = clock.fn();
  options.sync_log = false;
  BountyService service(Competition(config(), data()), options);
  HttpServer server(service);
  const int port = server.start("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  const httplib::Headers org = {{"Authorization", bearer(kOrganizer)}};

  auto add = client.Post("/admin/teams", org, R"({"team":"alice"})", "application/json");
  ASSERT_TRUE(add);
  ASSERT_EQ(add->status, 201);
  const auto token = nlohmann::json::parse(add->body).at("token").get<std::string>();
  const httplib::Headers team = {{"Authorization", bearer(token)}};

  EXPECT_EQ(client.Get("/leaderboard")->status, 200);
  EXPECT_EQ(client.Get("/model/global/0/train-predictions")->status, 200);
  EXPECT_EQ(client.Get("/model/global/0/val-predictions")->status, 404);
  EXPECT_EQ(client.Get("/model/global/0/test-predictions")->status, 404);
  EXPECT_EQ(client.Get("/val-predictions")->status, 404);
  EXPECT_EQ(client.Get("/events?since=0")->status, 200);
  EXPECT_EQ(client.Post("/submissions", "{}", "application/json")->status, 401);
  const auto sub = client.Post("/submissions", team, bundle_text("TRUE", ConstantModel{300}), "application/json");
  ASSERT_EQ(sub->status, 202);
  service.drain();
  const auto id = std::to_string(nlohmann::json::parse(sub->body).at("id").get<int>());
  EXPECT_EQ(client.Get("/submissions/" + id, team)->status, 200);
  EXPECT_EQ(client.Get("/submissions/" + id)->status, 401);
  EXPECT_EQ(client.Get("/admin/state", org)->status, 200);
  EXPECT_EQ(client.Get("/admin/state", team)->status, 401);
  EXPECT_EQ(client.Post("/admin/freeze", org, "", "application/json")->status, 200);
  EXPECT_EQ(client.Post("/submissions", team, bundle_text("TRUE", ConstantModel{1}), "application/json")->status, 409);
  EXPECT_EQ(client.Delete("/admin/teams/alice", org)->status, 200);
  server.stop();
}
