#pragma once

#include <atomic>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "reenact/engine/session.hpp"
#include "reenact/engine/socket.hpp"

namespace reenact::engine {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 9000;  // 0 picks a free port
  std::filesystem::path models_dir;
  std::filesystem::path profiles_dir;
  std::optional<std::string> neural_endpoint;
  TrackerOptions tracker;
};

/// Length-prefixed JSON sessions over TCP, one session per connection and one
/// thread per connection. A connection that starts with "GET " is answered as
/// HTTP instead; GET /profiles returns the profile listing.
class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();

  /// Binds the listening socket. Throws Error{Io} on bind failure.
  void start();
  int port() const { return port_; }

  /// Accepts connections until stop(); then waits for every connection.
  void run();

  /// Thread-safe. Closes the listener and all live connections.
  void stop();

 private:
  struct Connection {
    Socket socket;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void serve_connection(Connection& conn);
  void serve_http(Socket& socket, const std::string& first_bytes);
  void reap(bool all);

  ServerConfig config_;
  ModelStore models_;
  Socket listener_;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> next_session_{1};
  std::mutex mutex_;
  std::list<std::unique_ptr<Connection>> connections_;
};

}  // namespace reenact::engine
