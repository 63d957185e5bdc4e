#include "reenact/engine/server.hpp"

#include <spdlog/spdlog.h>

#include "reenact/error.hpp"

namespace reenact::engine {

Server::Server(ServerConfig config) : config_(std::move(config)), models_(config_.models_dir) {}

Server::~Server() {
  stop();
  reap(true);
}

void Server::start() {
  listener_ = Socket::listen(config_.host, config_.port);
  port_ = listener_.local_port();
  spdlog::info("engine listening on {}:{}", config_.host, port_);
}

void Server::run() {
  while (!stopping_) {
    Socket s = listener_.accept();
    if (!s.valid()) break;
    std::lock_guard lock(mutex_);
    if (stopping_) break;
    auto conn = std::make_unique<Connection>();
    conn->socket = std::move(s);
    Connection& ref = *conn;
    connections_.push_back(std::move(conn));
    ref.thread = std::thread([this, &ref] {
      serve_connection(ref);
      ref.done = true;
    });
    reap(false);
  }
  reap(true);
  spdlog::info("engine stopped");
}

void Server::stop() {
  if (stopping_.exchange(true)) return;
  {
    std::lock_guard lock(mutex_);
    for (auto& c : connections_) c->socket.shutdown();
  }
  listener_.shutdown();
}

void Server::reap(bool all) {
  std::list<std::unique_ptr<Connection>> finished;
  {
    std::unique_lock lock(mutex_, std::defer_lock);
    if (all) lock.lock();
    // Callers from run() already hold the lock when all == false.
    for (auto it = connections_.begin(); it != connections_.end();) {
      if (all || (*it)->done) {
        finished.push_back(std::move(*it));
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& c : finished)
    if (c->thread.joinable()) c->thread.join();
}

namespace {

void send(Socket& socket, const ServerMessage& message) {
  for (const std::string& unit : encode_server_message(message)) socket.write_unit(unit);
}

}  // namespace

void Server::serve_http(Socket& socket, const std::string& first_bytes) {
  std::string request = first_bytes;
  char c;
  while (request.size() < 8192 && request.find("\r\n\r\n") == std::string::npos) {
    if (!socket.read_exact(&c, 1)) break;
    request.push_back(c);
  }
  const auto line_end = request.find("\r\n");
  const std::string line = request.substr(0, line_end);
  const auto path_end = line.find(' ', 4);
  std::string path = line.substr(4, path_end == std::string::npos ? std::string::npos : path_end - 4);
  if (const auto q = path.find('?'); q != std::string::npos) path.resize(q);

  std::string status = "200 OK", body;
  if (path == "/profiles") {
    body = profiles_to_json(list_profiles(config_.profiles_dir));
  } else {
    status = "404 Not Found";
    body = R"({"error":"not found"})";
  }
  socket.write_all("HTTP/1.1 " + status +
                   "\r\nContent-Type: application/json\r\nAccess-Control-Allow-Origin: *\r\nContent-Length: " +
                   std::to_string(body.size()) + "\r\nConnection: close\r\n\r\n" + body);
}

void Server::serve_connection(Connection& conn) {
  Socket& socket = conn.socket;
  std::unique_ptr<Session> session;
  try {
    for (;;) {
      std::uint8_t prefix[4];
      if (!socket.read_exact(prefix, 4)) break;
      if (std::string(prefix, prefix + 4) == "GET ") {
        serve_http(socket, "GET ");
        break;
      }
      std::string payload;
      try {
        payload.resize(parse_length_prefix(prefix));
      } catch (const Error& e) {
        send(socket, ErrorMessage{"bad_message", e.what()});
        break;  // framing lost
      }
      if (!payload.empty() && !socket.read_exact(payload.data(), payload.size()))
        throw Error(ErrorCode::Io, "connection closed mid-message");

      try {
        ClientMessage msg = parse_client_message(payload);
        if (auto* hello = std::get_if<Hello>(&msg)) {
          if (session) throw ProtocolError("session_exists", "connection already has session " + session->id());
          LoadedModel model = models_.get(hello->model);
          std::optional<TargetProfile> profile;
          for (const ProfileEntry& e : list_profiles(config_.profiles_dir))
            if (e.label == hello->profile_label) {
              profile = load_profile(e.path);
              break;
            }
          if (!profile) throw ProtocolError("unknown_profile", "no profile labelled '" + hello->profile_label + "'");
          SessionOptions opts;
          opts.raster.width = hello->settings.width;
          opts.raster.height = hello->settings.height;
          opts.binary = hello->settings.binary;
          opts.tracker = config_.tracker;
          std::unique_ptr<NeuralClient> neural;
          if (hello->settings.neural) {
            if (!config_.neural_endpoint)
              throw ProtocolError("neural_unavailable", "no inference endpoint configured");
            neural = std::make_unique<NeuralClient>(*config_.neural_endpoint);
          }
          try {
            opts.raster.validate();
          } catch (const Error& e) {
            throw ProtocolError("bad_message", e.what());
          }
          const std::string id = "s" + std::to_string(next_session_++);
          session = std::make_unique<Session>(id, model, std::move(*profile), opts, std::move(neural));
          spdlog::info("session {} opened: model={} profile={}", id, hello->model, hello->profile_label);
          send(socket, Ready{id});
        } else if (auto* frame = std::get_if<LandmarkFrame>(&msg)) {
          if (!session) throw ProtocolError("no_session", "send hello first");
          send(socket, session->process(*frame).message);
        } else if (auto* update = std::get_if<PolicyUpdate>(&msg)) {
          if (!session) throw ProtocolError("no_session", "send hello first");
          session->set_policy(update->apply(session->policy()));
        } else {
          break;  // Bye
        }
      } catch (const ProtocolError& e) {
        send(socket, ErrorMessage{e.code, e.what()});
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Io) throw;
        send(socket, ErrorMessage{e.is_data_error() ? "bad_message" : "internal", e.what()});
      }
    }
  } catch (const std::exception& e) {
    if (!stopping_) spdlog::warn("connection error: {}", e.what());
  }
  if (session) spdlog::info("session {} closed; perf {}", session->id(), session->perf().to_json());
  socket.shutdown();
}

}  // namespace reenact::engine
