#pragma once

#include <memory>
#include <string>
#include <thread>

#include "bounty/service.hpp"

namespace bounty {

// HTTP/1.1 front end for a BountyService. Routes:
//   POST   /submissions                          bearer (team)
//   GET    /submissions/{id}                     bearer (team or organizer)
//   GET    /leaderboard                          public
//   GET    /model/global/{version}/train-predictions   public
//   GET    /events?since=N&wait=MS               public, long-poll
//   POST   /admin/teams, DELETE /admin/teams/{id}, GET /admin/state,
//   POST   /admin/freeze                         bearer (organizer)
class HttpServer {
 public:
  explicit HttpServer(BountyService& service);
  ~HttpServer();

  // Binds and serves on a background thread. Port 0 picks a free port.
  // Throws Errc::io_error when the address cannot be bound.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace bounty
