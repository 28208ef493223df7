#include <cstdio>
#include <iostream>

#include "cli.hpp"

namespace bounty::cli {

namespace {

Profile require_profile(const Globals& g) {
  auto p = load_profile();
  if (!p || p->token.empty()) fail(kUsage, "Usage", "no team profile; run 'bounty profile set' first");
  if (!g.server.empty()) p->server = g.server;
  return *p;
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

std::string verdict_text(const std::string& label, const nlohmann::json& v) {
  std::string s = label + ": " + (v.at("accepted").get<bool>() ? "accepted" : "rejected");
  if (!v.at("accepted").get<bool>()) s += " (" + v.at("reason").get<std::string>() + ")";
  s += "\n  w=" + fmt("%.6f", v.at("weight").get<double>());
  s += "  L(f,g)=" + fmt("%.4f", v.at("loss_current").get<double>());
  s += "  L(h,g)=" + fmt("%.4f", v.at("loss_candidate").get<double>());
  s += "  w*delta=" + fmt("%.4f", v.at("improvement").get<double>()) + "\n";
  if (v.at("accepted").get<bool>()) {
    s += "  version=" + std::to_string(v.at("version").get<std::uint32_t>());
    s += "  overall " + fmt("%.4f", v.at("overall_before").get<double>()) + " -> " +
         fmt("%.4f", v.at("overall_after").get<double>());
    s += "  points=" + fmt("%.4f", v.at("points").get<double>()) + "\n";
    for (const auto& r : v.at("repairs")) {
      s += "  repair " + r.at("group").get<std::string>() + " -> version " +
           std::to_string(r.at("target").get<std::uint32_t>()) + "\n";
    }
  }
  return s;
}

}  // namespace

void add_competitor_commands(CLI::App& app, Globals& g) {
  // profile
  {
    auto* profile = app.add_subcommand("profile", "Manage the local team profile");
    profile->require_subcommand(1);
    auto* set = profile->add_subcommand("set", "Store server, team and token");
    auto server = std::make_shared<std::string>();
    auto team = std::make_shared<std::string>();
    auto token_file = std::make_shared<std::string>();
    set->add_option("--server", *server, "Server URL")->required();
    set->add_option("--team", *team, "Team id")->required();
    set->add_option("--token-file", *token_file, "File holding the team token")->required()->check(CLI::ExistingFile);
    set->callback([=, &g] {
      save_profile(Profile{*server, *team, read_secret(*token_file)});
      const auto path = profile_path().string();
      if (g.json) {
        std::cout << nlohmann::json{{"profile", path}, {"server", *server}, {"team", *team}}.dump() << '\n';
      } else {
        std::cout << "profile saved to " << path << '\n';
      }
    });
    auto* show = profile->add_subcommand("show", "Print server and team (never the token)");
    show->callback([&g] {
      const auto p = load_profile();
      if (!p) fail(kFailure, "NoProfile", "no profile at " + profile_path().string());
      if (g.json) {
        std::cout << nlohmann::json{{"server", p->server}, {"team", p->team}}.dump() << '\n';
      } else {
        std::cout << "server: " << p->server << "\nteam: " << p->team << '\n';
      }
    });
  }

  // submit
  {
    auto* cmd = app.add_subcommand("submit", "Submit a (g, h) bundle");
    auto file = std::make_shared<std::string>();
    cmd->add_option("bundle", *file, "Bundle file (JSON)")->required()->check(CLI::ExistingFile);
    cmd->callback([=, &g] {
      const auto p = require_profile(g);
      const auto res = http_post(p.server, "/submissions", read_file(*file), p.token);
      const auto doc = nlohmann::json::parse(res.body);
      if (g.json) {
        std::cout << doc.dump() << '\n';
      } else {
        std::cout << "submission " << doc.at("id").get<std::uint64_t>() << ' ' << doc.at("status").get<std::string>()
                  << '\n';
      }
    });
  }

  // status
  {
    auto* cmd = app.add_subcommand("status", "Show a submission's verdict");
    auto id = std::make_shared<std::string>();
    cmd->add_option("id", *id, "Submission id")->required();
    cmd->callback([=, &g] {
      const auto p = require_profile(g);
      const auto res = http_get(p.server, "/submissions/" + *id, p.token);
      const auto doc = nlohmann::json::parse(res.body);
      if (g.json) {
        std::cout << doc.dump() << '\n';
        return;
      }
      std::cout << "submission " << doc.at("id").get<std::uint64_t>() << ' ' << doc.at("status").get<std::string>()
                << " (team " << doc.at("team").get<std::string>() << ", received "
                << doc.at("received_at").get<std::string>() << ")\n";
      if (doc.contains("global")) std::cout << verdict_text("global", doc["global"]);
      if (doc.contains("local")) std::cout << verdict_text("local", doc["local"]);
      if (doc.contains("failure")) std::cout << "failure: " << doc["failure"].get<std::string>() << '\n';
    });
  }

  // leaderboard
  {
    auto* cmd = app.add_subcommand("leaderboard", "Show the leaderboard");
    cmd->callback([&g] {
      std::string server = g.server;
      if (server.empty()) {
        if (auto p = load_profile()) server = p->server;
      }
      const auto res = http_get(server, "/leaderboard");
      if (g.json) {
        std::cout << res.body << '\n';
        return;
      }
      const auto doc = nlohmann::json::parse(res.body);
      std::printf("%-4s %-24s %18s %8s %8s %14s\n", "rank", "name", "validation_loss", "updates", "repairs", "points");
      int rank = 1;
      for (const auto& e : doc.at("entries")) {
        std::printf("%-4d %-24s %18.4f %8zu %8zu %14.4f\n", rank++, e.at("name").get<std::string>().c_str(),
                    e.at("validation_loss").get<double>(), e.at("updates").get<std::size_t>(),
                    e.at("repairs").get<std::size_t>(), e.at("points").get<double>());
      }
    });
  }

  // fetch-train-predictions
  {
    auto* cmd = app.add_subcommand("fetch-train-predictions", "Download global model predictions on the train split");
    auto version = std::make_shared<std::uint32_t>(0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("version", *version, "Global model version")->required();
    cmd->add_option("--out", *out, "Write the CSV here instead of stdout");
    cmd->callback([=, &g] {
      std::string server = g.server;
      if (server.empty()) {
        if (auto p = load_profile()) server = p->server;
      }
      const auto res = http_get(server, "/model/global/" + std::to_string(*version) + "/train-predictions");
      if (out->empty()) {
        std::cout << res.body;
      } else {
        write_file(*out, res.body);
        if (g.json) {
          std::cout << nlohmann::json{{"out", *out}, {"version", *version}}.dump() << '\n';
        } else {
          std::cout << "wrote " << *out << '\n';
        }
      }
    });
  }
}

}  // namespace bounty::cli
