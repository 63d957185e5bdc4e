#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace reenact::engine {

/// Owning TCP socket (blocking). I/O failures throw Error{Io}.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  static Socket connect(const std::string& host, int port);
  /// Port 0 picks an ephemeral port; see local_port().
  static Socket listen(const std::string& host, int port, int backlog = 16);

  /// Empty socket once the listener has been shut down.
  Socket accept();
  int local_port() const;

  /// False on orderly EOF before the first byte; throws on EOF mid-buffer.
  bool read_exact(void* data, std::size_t n);
  void write_all(std::string_view data);

  /// One length-prefixed unit; nullopt on orderly EOF between units.
  std::optional<std::string> read_unit();
  void write_unit(std::string_view payload);

  /// Unblocks pending reads and accepts in other threads.
  void shutdown();
  void close();
  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }

 private:
  int fd_ = -1;
};

/// Splits "host:port".
std::pair<std::string, int> parse_endpoint(const std::string& endpoint);

}  // namespace reenact::engine
