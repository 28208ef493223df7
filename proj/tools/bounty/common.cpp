#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "cli.hpp"

namespace bounty::cli {

int exit_for_status(int status) {
  switch (status) {
    case 401: return kUnauthorized;
    case 403: return kForbidden;
    case 404: return kNotFound;
    case 409: return kConflict;
    case 413: return kTooLarge;
    case 422: return kInvalid;
    case 429: return kRateLimited;
    case 503: return kUnavailable;
    default: return kFailure;
  }
}

void fail(int exit_code, const std::string& error, const std::string& message) {
  throw CliError(exit_code, {{"error", error}, {"message", message}});
}

std::filesystem::path profile_path() {
  if (const char* p = std::getenv("BOUNTY_PROFILE"); p && *p) return p;
  if (const char* x = std::getenv("XDG_CONFIG_HOME"); x && *x) return std::filesystem::path(x) / "bounty/profile.json";
  const char* home = std::getenv("HOME");
  return std::filesystem::path(home ? home : ".") / ".config/bounty/profile.json";
}

std::optional<Profile> load_profile() {
  const auto path = profile_path();
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const auto doc = nlohmann::json::parse(read_file(path));
    return Profile{doc.value("server", ""), doc.value("team", ""), doc.value("token", "")};
  } catch (const nlohmann::json::exception& e) {
    fail(kFailure, "BadProfile", path.string() + ": " + e.what());
  }
}

void save_profile(const Profile& p) {
  const auto path = profile_path();
  std::filesystem::create_directories(path.parent_path());
  write_private(path, nlohmann::json{{"server", p.server}, {"team", p.team}, {"token", p.token}}.dump(2) + "\n");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kFailure, "IoError", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string read_secret(const std::filesystem::path& path) {
  auto text = read_file(path);
  text = text.substr(0, text.find('\n'));
  while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.pop_back();
  if (text.empty()) fail(kFailure, "IoError", path.string() + " holds no token");
  return text;
}

void write_private(const std::filesystem::path& path, const std::string& contents) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  if (fd < 0) fail(kFailure, "IoError", "cannot write " + path.string());
  ::fchmod(fd, 0600);
  std::size_t done = 0;
  while (done < contents.size()) {
    const auto n = ::write(fd, contents.data() + done, contents.size() - done);
    if (n <= 0) {
      ::close(fd);
      fail(kFailure, "IoError", "short write to " + path.string());
    }
    done += static_cast<std::size_t>(n);
  }
  ::close(fd);
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(kFailure, "IoError", "cannot write " + path.string());
  out << contents;
}

namespace {

httplib::Headers headers_for(const std::string& token) {
  httplib::Headers h;
  if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
  return h;
}

HttpResponse finish(const httplib::Result& res, const std::string& server) {
  if (!res) fail(kConnection, "ConnectionFailed", "cannot reach " + server + ": " + httplib::to_string(res.error()));
  if (res->status >= 200 && res->status < 300) return HttpResponse{res->status, res->body};
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    body = {{"error", "Http"}, {"message", res->body}};
  }
  body["status"] = res->status;
  throw CliError(exit_for_status(res->status), std::move(body));
}

httplib::Client client(const std::string& server) {
  if (server.empty()) fail(kUsage, "Usage", "no server given; pass --server or run 'bounty profile set'");
  httplib::Client c(server);
  c.set_connection_timeout(5, 0);
  c.set_read_timeout(60, 0);
  return c;
}

}  // namespace

HttpResponse http_get(const std::string& server, const std::string& path, const std::string& token) {
  auto c = client(server);
  return finish(c.Get(path, headers_for(token)), server);
}

HttpResponse http_post(const std::string& server, const std::string& path, const std::string& body,
                       const std::string& token) {
  auto c = client(server);
  return finish(c.Post(path, headers_for(token), body, "application/json"), server);
}

HttpResponse http_delete(const std::string& server, const std::string& path, const std::string& token) {
  auto c = client(server);
  return finish(c.Delete(path, headers_for(token)), server);
}

}  // namespace bounty::cli
