#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

namespace bounty::cli {

// Process exit codes.
enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kConnection = 3,
  kUnauthorized = 10,
  kForbidden = 11,
  kNotFound = 12,
  kConflict = 13,
  kTooLarge = 14,
  kInvalid = 15,
  kRateLimited = 16,
  kUnavailable = 17,
};

int exit_for_status(int http_status);

// Failure carrying its exit code and the JSON document printed on stderr.
class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, nlohmann::json body)
      : std::runtime_error(body.dump()), exit_code_(exit_code), body_(std::move(body)) {}

  int exit_code() const { return exit_code_; }
  const nlohmann::json& body() const { return body_; }

 private:
  int exit_code_;
  nlohmann::json body_;
};

[[noreturn]] void fail(int exit_code, const std::string& error, const std::string& message);

struct Profile {
  std::string server;
  std::string team;
  std::string token;
};

std::filesystem::path profile_path();
std::optional<Profile> load_profile();
void save_profile(const Profile& profile);

std::string read_file(const std::filesystem::path& path);
// Trimmed first line of a file holding a secret.
std::string read_secret(const std::filesystem::path& path);
// Writes with mode 0600 regardless of umask.
void write_private(const std::filesystem::path& path, const std::string& contents);
void write_file(const std::filesystem::path& path, const std::string& contents);

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Requests against `server` (e.g. http://127.0.0.1:8080). Throws CliError
// with kConnection when the server cannot be reached and with the mapped
// code for non-2xx statuses.
HttpResponse http_get(const std::string& server, const std::string& path, const std::string& token = {});
HttpResponse http_post(const std::string& server, const std::string& path, const std::string& body,
                       const std::string& token = {});
HttpResponse http_delete(const std::string& server, const std::string& path, const std::string& token = {});

struct Globals {
  bool json = false;
  std::string server;
};

void add_organizer_commands(CLI::App& app, Globals& globals);
void add_competitor_commands(CLI::App& app, Globals& globals);

}  // namespace bounty::cli
