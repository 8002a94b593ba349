#pragma once

#include <memory>
#include <string>

#include "opscore/service/session.hpp"

namespace opscore::service {

struct ServerOptions {
  std::string address = "127.0.0.1";
  // 0 picks a free port; see FeedbackServer::port().
  unsigned short port = 8765;
  double tick_hz = 10.0;
};

// WebSocket server on the `/session` endpoint. Every connection gets its own
// FeedbackSession ticking at a fixed rate; the context is shared read-only.
class FeedbackServer {
 public:
  // Binds and listens immediately; BindFailure if that fails.
  FeedbackServer(ServiceContext context, ServerOptions options);
  ~FeedbackServer();
  FeedbackServer(const FeedbackServer&) = delete;
  FeedbackServer& operator=(const FeedbackServer&) = delete;

  unsigned short port() const;
  // Serves until stop() is called.
  void run();
  // Safe to call from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace opscore::service
