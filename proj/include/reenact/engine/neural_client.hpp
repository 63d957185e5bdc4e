#pragma once

#include <string>

#include "reenact/engine/protocol.hpp"
#include "reenact/engine/socket.hpp"

namespace reenact::engine {

/// Out-of-process renderer speaking the Frame schema: the conditioning frame
/// goes out as a JSON Frame, and the reply Frame carries output_png.
class NeuralClient {
 public:
  explicit NeuralClient(std::string endpoint) : endpoint_(std::move(endpoint)) {}

  /// PNG bytes of the rendered output. Throws Error{Io} on transport failure
  /// and Error{BadFormat} when the reply is not a Frame with output.
  std::vector<std::uint8_t> infer(const FrameMessage& conditioning);
  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
  Socket socket_;
};

}  // namespace reenact::engine
