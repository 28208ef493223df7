#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "bounty/http_server.hpp"
#include "bounty/service.hpp"
#include "bounty/sim.hpp"
#include "cli.hpp"

namespace bounty::cli {

namespace {

// Rebuilds the competition from a state directory without touching it.
Competition load_offline(const std::filesystem::path& dir, const std::string& test_override = {}) {
  auto [config, data] = load_state_dir(dir);
  if (!test_override.empty()) {
    data.test = std::make_shared<const Dataset>(load_csv_file(data.train->schema_ptr(), test_override));
  }
  std::vector<LogEntry> entries;
  const auto text = read_file(dir / "log.jsonl");
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto newline = text.find('\n', pos);
    if (newline == std::string::npos) break;
    nlohmann::json line;
    try {
      line = nlohmann::json::parse(std::string_view(text).substr(pos, newline - pos));
    } catch (const nlohmann::json::parse_error&) {
      break;
    }
    entries.push_back(log_entry_from_json(line, data.train->schema(), config.limits));
    pos = newline + 1;
  }
  return Competition::replay(std::move(config), std::move(data), entries);
}

std::string organizer_token(const std::string& token_file) {
  if (!token_file.empty()) return read_secret(token_file);
  if (const char* t = std::getenv("BOUNTY_ORGANIZER_TOKEN"); t && *t) return t;
  fail(kUsage, "Usage", "organizer token required: pass --token-file or set BOUNTY_ORGANIZER_TOKEN");
}

std::string server_or_profile(const Globals& g) {
  if (!g.server.empty()) return g.server;
  if (auto p = load_profile(); p && !p->server.empty()) return p->server;
  return "http://127.0.0.1:8080";
}

void print_json_or(const Globals& g, const nlohmann::json& doc, const std::string& text) {
  if (g.json) {
    std::cout << doc.dump() << '\n';
  } else {
    std::cout << text;
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    const auto item = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(kUsage, "Usage", "not a number list: " + text);
    }
    pos = comma + 1;
  }
  return out;
}

}  // namespace

void add_organizer_commands(CLI::App& app, Globals& g) {
  // init
  {
    auto* cmd = app.add_subcommand("init", "Create a competition state directory from a config file");
    auto config_path = std::make_shared<std::string>();
    auto state = std::make_shared<std::string>();
    auto token_out = std::make_shared<std::string>();
    cmd->add_option("--config", *config_path, "Competition config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--state", *state, "State directory to create")->required();
    cmd->add_option("--token-out", *token_out, "File receiving the organizer token (mode 0600)")->required();
    cmd->callback([=, &g] {
      const std::filesystem::path path(*config_path);
      const auto doc = nlohmann::json::parse(read_file(path));
      const auto base = path.parent_path();
      if (!doc.contains("data")) fail(kFailure, "BadConfig", "config has no data section");
      const auto data = sim::materialize_data(doc["data"], base, doc.value("seed", std::uint64_t{0}));
      const auto config = config_from_json(doc, base, &data.train->schema());
      if (std::filesystem::exists(*token_out)) fail(kFailure, "IoError", *token_out + " already exists");
      const auto token = init_state_dir(*state, config, data);
      write_private(*token_out, token + "\n");
      char buf[256];
      std::snprintf(buf, sizeof buf, "initialized %s (train %zu, validation %zu, test %zu rows)\n", state->c_str(),
                    data.train->rows(), data.validation->rows(), data.test->rows());
      print_json_or(g,
                    {{"state", *state},
                     {"train_rows", data.train->rows()},
                     {"validation_rows", data.validation->rows()},
                     {"test_rows", data.test->rows()}},
                    buf);
    });
  }

  // serve
  {
    auto* cmd = app.add_subcommand("serve", "Run the competition server");
    auto state = std::make_shared<std::string>();
    auto host = std::make_shared<std::string>("127.0.0.1");
    auto port = std::make_shared<int>(8080);
    cmd->add_option("--state", *state, "State directory")->required()->check(CLI::ExistingDirectory);
    cmd->add_option("--host", *host, "Bind address");
    cmd->add_option("--port", *port, "Port (0 picks a free one)");
    cmd->callback([=] {
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      auto service = BountyService::open(*state);
      HttpServer server(*service);
      const int bound = server.start(*host, *port);
      std::cerr << "listening on http://" << *host << ':' << bound << std::endl;
      int received = 0;
      sigwait(&signals, &received);
      server.stop();
      service->drain();
      std::cerr << "stopped" << std::endl;
    });
  }

  // add-team / remove-team / freeze / state
  {
    auto* cmd = app.add_subcommand("add-team", "Register a team (organizer)");
    auto name = std::make_shared<std::string>();
    auto token_file = std::make_shared<std::string>();
    auto token_out = std::make_shared<std::string>();
    cmd->add_option("name", *name, "Team id")->required();
    cmd->add_option("--token-file", *token_file, "File holding the organizer token");
    cmd->add_option("--token-out", *token_out, "File receiving the team token (mode 0600)")->required();
    cmd->callback([=, &g] {
      const auto res = http_post(server_or_profile(g), "/admin/teams", nlohmann::json{{"team", *name}}.dump(),
                                 organizer_token(*token_file));
      auto doc = nlohmann::json::parse(res.body);
      write_private(*token_out, doc.at("token").get<std::string>() + "\n");
      doc.erase("token");
      print_json_or(g, doc,
                    "team " + *name + " registered at " + doc.value("created_at", "") + "; token written to " +
                        *token_out + "\n");
    });
  }
  {
    auto* cmd = app.add_subcommand("remove-team", "Deactivate a team and revoke its token (organizer)");
    auto name = std::make_shared<std::string>();
    auto token_file = std::make_shared<std::string>();
    cmd->add_option("name", *name, "Team id")->required();
    cmd->add_option("--token-file", *token_file, "File holding the organizer token");
    cmd->callback([=, &g] {
      const auto res = http_delete(server_or_profile(g), "/admin/teams/" + *name, organizer_token(*token_file));
      print_json_or(g, nlohmann::json::parse(res.body), "team " + *name + " removed\n");
    });
  }
  {
    auto* cmd = app.add_subcommand("freeze", "Stop accepting submissions (organizer)");
    auto token_file = std::make_shared<std::string>();
    cmd->add_option("--token-file", *token_file, "File holding the organizer token");
    cmd->callback([=, &g] {
      const auto res = http_post(server_or_profile(g), "/admin/freeze", "{}", organizer_token(*token_file));
      print_json_or(g, nlohmann::json::parse(res.body), "competition frozen\n");
    });
  }
  {
    auto* cmd = app.add_subcommand("state", "Show the server's state summary (organizer)");
    auto token_file = std::make_shared<std::string>();
    cmd->add_option("--token-file", *token_file, "File holding the organizer token");
    cmd->callback([=, &g] {
      const auto res = http_get(server_or_profile(g), "/admin/state", organizer_token(*token_file));
      const auto doc = nlohmann::json::parse(res.body);
      std::string text;
      for (const auto& [k, v] : doc.items()) text += k + ": " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
      print_json_or(g, doc, text);
    });
  }

  // report
  {
    auto* cmd = app.add_subcommand("report", "Final report with training, validation and test losses");
    auto state = std::make_shared<std::string>();
    auto test = std::make_shared<std::string>();
    cmd->add_option("--state", *state, "State directory")->required()->check(CLI::ExistingDirectory);
    cmd->add_option("--test", *test, "Score against this test CSV instead of the stored split")
        ->check(CLI::ExistingFile);
    cmd->callback([=, &g] {
      const auto comp = load_offline(*state, *test);
      const auto report = comp.final_report();
      print_json_or(g, report.to_json(), report.to_text());
    });
  }

  // export-transcript / replay
  {
    auto* cmd = app.add_subcommand("export-transcript", "Write the competition transcript");
    auto state = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--state", *state, "State directory")->required()->check(CLI::ExistingDirectory);
    cmd->add_option("--out", *out, "Transcript file")->required();
    cmd->callback([=, &g] {
      const auto comp = load_offline(*state);
      auto config = to_json(comp.config());
      const auto dir = std::filesystem::absolute(*state);
      for (const char* key : {"schema", "train", "validation", "test"}) {
        config["data"][key] = (dir / config["data"][key].get<std::string>()).string();
      }
      nlohmann::json entries = nlohmann::json::array();
      for (const auto& e : comp.log()) entries.push_back(to_json(e));
      const nlohmann::json transcript = {{"format", "bounty-transcript"},
                                         {"version", 1},
                                         {"config", std::move(config)},
                                         {"entries", std::move(entries)},
                                         {"final_state_hash", comp.state_hash()}};
      write_file(*out, transcript.dump(2) + "\n");
      print_json_or(g, {{"out", *out}, {"entries", comp.log().size()}, {"final_state_hash", comp.state_hash()}},
                    "wrote " + *out + " (" + std::to_string(comp.log().size()) + " entries)\n");
    });
  }
  {
    auto* cmd = app.add_subcommand("replay", "Rebuild a competition from a transcript and verify its state hash");
    auto path = std::make_shared<std::string>();
    cmd->add_option("transcript", *path, "Transcript file")->required()->check(CLI::ExistingFile);
    cmd->callback([=, &g] {
      const auto transcript = nlohmann::json::parse(read_file(*path));
      const auto hash = sim::replay_transcript(transcript, std::filesystem::path(*path).parent_path());
      const auto expected = transcript.value("final_state_hash", std::string());
      if (hash != expected) {
        throw CliError(kFailure, {{"error", "ReplayMismatch"},
                                  {"message", "state hash differs"},
                                  {"expected", expected},
                                  {"actual", hash}});
      }
      print_json_or(g, {{"verified", true}, {"state_hash", hash}}, "state hash verified " + hash + "\n");
    });
  }

  // simulate
  {
    auto* cmd = app.add_subcommand("simulate", "Run a scripted competition scenario");
    auto path = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto alpha = std::make_shared<double>(0.0);
    auto sweep = std::make_shared<std::string>();
    cmd->add_option("scenario", *path, "Scenario file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", *out, "Directory for transcript, report, events and claims");
    cmd->add_option("--alpha", *alpha, "Override the scenario's alpha");
    cmd->add_option("--sweep", *sweep, "Comma-separated alphas for the sweep (default: alpha x 1/4,1/2,1,2,4)");
    cmd->callback([=, &g] {
      const auto scenario = sim::load_scenario(*path);
      sim::RunOptions options;
      if (*alpha > 0.0) options.alpha = *alpha;
      const auto run = sim::run_competition(scenario, options);
      std::vector<double> alphas;
      if (sweep->empty()) {
        for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) alphas.push_back(run.alpha * f);
      } else {
        alphas = parse_list(*sweep);
      }
      const auto rows = sim::alpha_sweep(scenario, alphas);
      const auto claims = sim::claims_summary(scenario, run, rows);
      if (!out->empty()) {
        std::filesystem::create_directories(*out);
        const std::filesystem::path dir(*out);
        write_file(dir / "transcript.json", run.transcript.dump(2) + "\n");
        write_file(dir / "report.json", run.report.to_json().dump(2) + "\n");
        write_file(dir / "report.txt", run.report.to_text());
        nlohmann::json events = nlohmann::json::array();
        for (const auto& e : run.events) events.push_back(to_json(e));
        write_file(dir / "events.json", events.dump(2) + "\n");
        nlohmann::json ledgers = nlohmann::json::object();
        for (std::size_t i = 0; i < run.ledgers.size(); ++i) {
          ledgers[scenario.agents[i].at("name").get<std::string>()] = run.ledgers[i].reads;
        }
        write_file(dir / "access.json", ledgers.dump(2) + "\n");
        write_file(dir / "claims.txt", claims);
      }
      nlohmann::json sweep_doc = nlohmann::json::array();
      for (const auto& r : rows) {
        sweep_doc.push_back({{"alpha", r.alpha},
                             {"acceptances", r.acceptances},
                             {"repairs", r.repairs},
                             {"global_validation_loss", r.global_validation_loss}});
      }
      print_json_or(g,
                    {{"scenario", scenario.name},
                     {"final_state_hash", run.final_state_hash},
                     {"global_acceptances", run.global_acceptances},
                     {"global_repairs", run.global_repairs},
                     {"report", run.report.to_json()},
                     {"sweep", sweep_doc}},
                    run.report.to_text() + "\n" + claims);
    });
  }
}

}  // namespace bounty::cli
