#include "reenact/engine/neural_client.hpp"

#include "reenact/error.hpp"

namespace reenact::engine {

std::vector<std::uint8_t> NeuralClient::infer(const FrameMessage& conditioning) {
  FrameMessage request = conditioning;
  request.binary = false;
  request.output.reset();
  try {
    if (!socket_.valid()) {
      const auto [host, port] = parse_endpoint(endpoint_);
      socket_ = Socket::connect(host, port);
    }
    for (const std::string& unit : encode_server_message(request)) socket_.write_unit(unit);
    auto header = socket_.read_unit();
    if (!header) throw Error(ErrorCode::Io, "inference endpoint closed the connection");
    ServerMessage reply = parse_server_message(*header, [&] {
      auto unit = socket_.read_unit();
      if (!unit) throw Error(ErrorCode::Io, "inference endpoint closed the connection");
      return *unit;
    });
    if (const auto* err = std::get_if<ErrorMessage>(&reply))
      throw Error(ErrorCode::BadFormat, "inference endpoint error " + err->code + ": " + err->msg);
    auto* frame = std::get_if<FrameMessage>(&reply);
    if (!frame || !frame->output) throw Error(ErrorCode::BadFormat, "inference reply lacks output_png");
    return std::move(*frame->output);
  } catch (const Error&) {
    socket_.close();
    throw;
  }
}

}  // namespace reenact::engine
