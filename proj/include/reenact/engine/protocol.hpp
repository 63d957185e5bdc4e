#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "reenact/conditioning.hpp"
#include "reenact/reenactment.hpp"
#include "reenact/tracking.hpp"

namespace reenact::engine {

/// Each wire unit is a 4-byte big-endian length followed by that many bytes.
inline constexpr std::size_t kMaxUnitBytes = std::size_t{64} << 20;

std::string encode_base64(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> decode_base64(std::string_view text);

std::string length_prefix(std::size_t n);
/// Parses a 4-byte big-endian length; throws BadFormat above kMaxUnitBytes.
std::size_t parse_length_prefix(const std::uint8_t* bytes);

/// Raised for messages that cannot be accepted; `code` is sent back verbatim.
struct ProtocolError : std::runtime_error {
  ProtocolError(std::string c, const std::string& msg) : std::runtime_error(msg), code(std::move(c)) {}
  std::string code;
};

// Client -> server

struct HelloSettings {
  int width = 256;
  int height = 256;
  bool binary = false;  // raw RGB payload units instead of base64 PNG
  bool neural = false;  // forward conditioning to the configured inference endpoint
};

struct Hello {
  std::string model;
  std::string profile_label;
  HelloSettings settings;
};

struct PolicyUpdate {
  std::optional<bool> retarget_pose;
  std::optional<double> expression_gain;
  std::optional<bool> transfer_gaze;
  std::optional<bool> clamp_expression;

  SwapPolicy apply(SwapPolicy policy) const;
};

struct Bye {};

using ClientMessage = std::variant<Hello, LandmarkFrame, PolicyUpdate, Bye>;

/// Throws ProtocolError{"bad_message"} for malformed input.
ClientMessage parse_client_message(std::string_view text);
std::string to_json(const ClientMessage& message);

// Server -> client

struct Ready {
  std::string session_id;
};

struct Diagnostics {
  std::vector<double> identity;
  double residual_rmse = 0.0;
  bool stale = false;
};

struct FrameMessage {
  double t = 0.0;
  std::vector<std::uint8_t> nmfc;    // PNG, or raw RGB in binary mode
  std::vector<std::uint8_t> gaze;
  std::optional<std::vector<std::uint8_t>> output;
  Rect mouth_roi;
  double latency_ms = 0.0;
  Diagnostics diagnostics;
  bool binary = false;
  int width = 0;   // raw RGB dimensions in binary mode
  int height = 0;
};

struct ErrorMessage {
  std::string code;
  std::string msg;
};

using ServerMessage = std::variant<Ready, FrameMessage, ErrorMessage>;

/// Wire units (without length prefixes) for one server message: a JSON header,
/// followed in binary mode by one raw unit per image.
std::vector<std::string> encode_server_message(const ServerMessage& message);

/// Inverse of encode_server_message. `next_unit` supplies the raw units that
/// follow a binary frame header.
template <class NextUnit>
ServerMessage parse_server_message(std::string_view header, NextUnit&& next_unit);
ServerMessage parse_server_header(std::string_view header, int& raw_units);
void attach_raw_units(FrameMessage& frame, std::vector<std::string> units);

template <class NextUnit>
ServerMessage parse_server_message(std::string_view header, NextUnit&& next_unit) {
  int raw = 0;
  ServerMessage m = parse_server_header(header, raw);
  if (raw > 0) {
    std::vector<std::string> units;
    for (int i = 0; i < raw; ++i) units.push_back(next_unit());
    attach_raw_units(std::get<FrameMessage>(m), std::move(units));
  }
  return m;
}

}  // namespace reenact::engine
