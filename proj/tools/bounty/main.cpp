#include <iostream>

#include "bounty/error.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
  using namespace bounty::cli;
  CLI::App app{"bounty: diversified-ensembling competition host and client"};
  app.require_subcommand(1);
  Globals globals;
  app.add_flag("--json", globals.json, "Machine-readable output");
  app.add_option("--server", globals.server, "Server URL (overrides the profile)");
  add_organizer_commands(app, globals);
  add_competitor_commands(app, globals);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const CliError& e) {
    std::cerr << e.body().dump() << std::endl;
    return e.exit_code();
  } catch (const bounty::Error& e) {
    std::cerr << nlohmann::json{{"error", std::string(bounty::to_string(e.code()))}, {"message", e.what()}}.dump()
              << std::endl;
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "Failure"}, {"message", e.what()}}.dump() << std::endl;
    return kFailure;
  }
  return kOk;
}
