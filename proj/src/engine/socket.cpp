#include "reenact/engine/socket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "reenact/engine/protocol.hpp"
#include "reenact/error.hpp"

namespace reenact::engine {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::Io, what + ": " + std::strerror(errno)); }

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

Socket Socket::connect(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw Error(ErrorCode::Io, "resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) fail("connect " + host + ":" + service);
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Socket(fd);
}

Socket Socket::listen(const std::string& host, int port, int backlog) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) fail("socket");
  Socket s(fd);
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw Error(ErrorCode::InvalidArgument, "listen address must be IPv4: " + host);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    fail("bind " + host + ":" + std::to_string(port));
  if (::listen(fd, backlog) != 0) fail("listen");
  return s;
}

Socket Socket::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return Socket(fd);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return Socket();
  }
}

int Socket::local_port() const {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) fail("getsockname");
  return ntohs(addr.sin_port);
}

bool Socket::read_exact(void* data, std::size_t n) {
  auto* p = static_cast<char*>(data);
  std::size_t done = 0;
  while (done < n) {
    const ssize_t r = ::recv(fd_, p + done, n - done, 0);
    if (r > 0) {
      done += static_cast<std::size_t>(r);
    } else if (r == 0) {
      if (done == 0) return false;
      throw Error(ErrorCode::Io, "connection closed mid-message");
    } else if (errno != EINTR) {
      fail("recv");
    }
  }
  return true;
}

void Socket::write_all(std::string_view data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t r = ::send(fd_, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (r >= 0) {
      done += static_cast<std::size_t>(r);
    } else if (errno != EINTR) {
      fail("send");
    }
  }
}

std::optional<std::string> Socket::read_unit() {
  std::uint8_t prefix[4];
  if (!read_exact(prefix, 4)) return std::nullopt;
  std::string payload(parse_length_prefix(prefix), '\0');
  if (!payload.empty() && !read_exact(payload.data(), payload.size()))
    throw Error(ErrorCode::Io, "connection closed mid-message");
  return payload;
}

void Socket::write_unit(std::string_view payload) {
  std::string buf = length_prefix(payload.size());
  buf.append(payload);
  write_all(buf);
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::pair<std::string, int> parse_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size())
    throw Error(ErrorCode::InvalidArgument, "endpoint must be host:port, got '" + endpoint + "'");
  int port = 0;
  try {
    port = std::stoi(endpoint.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad port in '" + endpoint + "'");
  }
  if (port <= 0 || port > 65535) throw Error(ErrorCode::InvalidArgument, "bad port in '" + endpoint + "'");
  return {endpoint.substr(0, colon), port};
}

}  // namespace reenact::engine
