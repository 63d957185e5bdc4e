#include "reenact/engine/protocol.hpp"

#include <cmath>

#include <json.hpp>
#include <sodium.h>

#include "reenact/error.hpp"

namespace reenact::engine {

using nlohmann::json;

std::string encode_base64(std::span<const std::uint8_t> bytes) {
  const int variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_ENCODED_LEN(bytes.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), variant);
  out.pop_back();  // terminating NUL
  return out;
}

std::vector<std::uint8_t> decode_base64(std::string_view text) {
  std::vector<std::uint8_t> out(text.size() / 4 * 3 + 3);
  std::size_t len = 0;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, nullptr,
                        sodium_base64_VARIANT_ORIGINAL) != 0)
    throw Error(ErrorCode::BadFormat, "invalid base64");
  out.resize(len);
  return out;
}

std::string length_prefix(std::size_t n) {
  if (n > kMaxUnitBytes) throw Error(ErrorCode::InvalidArgument, "wire unit too large");
  std::string p(4, '\0');
  for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((n >> (8 * (3 - i))) & 0xff);
  return p;
}

std::size_t parse_length_prefix(const std::uint8_t* b) {
  const std::size_t n = (std::size_t{b[0]} << 24) | (std::size_t{b[1]} << 16) | (std::size_t{b[2]} << 8) | b[3];
  if (n > kMaxUnitBytes) throw Error(ErrorCode::BadFormat, "wire unit of " + std::to_string(n) + " bytes");
  return n;
}

SwapPolicy PolicyUpdate::apply(SwapPolicy p) const {
  if (retarget_pose) p.retarget_pose = *retarget_pose;
  if (expression_gain) p.expression_gain = *expression_gain;
  if (transfer_gaze) p.transfer_gaze = *transfer_gaze;
  if (clamp_expression) p.clamp_expression = *clamp_expression;
  return p;
}

namespace {

template <class T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

ClientMessage parse_client_message(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ProtocolError("bad_message", std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!j.is_object()) throw ProtocolError("bad_message", "message must be an object");
    const std::string type = j.at("type").get<std::string>();
    if (type == "hello") {
      Hello h;
      h.model = j.at("model").get<std::string>();
      h.profile_label = j.at("profile_label").get<std::string>();
      if (j.contains("settings")) {
        const json& s = j.at("settings");
        h.settings.width = s.value("width", h.settings.width);
        h.settings.height = s.value("height", h.settings.height);
        h.settings.binary = s.value("binary", false);
        h.settings.neural = s.value("neural", false);
      }
      return h;
    }
    if (type == "landmarks") return landmark_frame_from_json(std::string(text));
    if (type == "policy") {
      PolicyUpdate p;
      p.retarget_pose = optional_field<bool>(j, "retarget_pose");
      p.expression_gain = optional_field<double>(j, "expression_gain");
      p.transfer_gaze = optional_field<bool>(j, "transfer_gaze");
      p.clamp_expression = optional_field<bool>(j, "clamp_expression");
      return p;
    }
    if (type == "bye") return Bye{};
    throw ProtocolError("bad_message", "unknown message type '" + type + "'");
  } catch (const json::exception& e) {
    throw ProtocolError("bad_message", e.what());
  } catch (const Error& e) {
    throw ProtocolError("bad_message", e.what());
  }
}

std::string to_json(const ClientMessage& message) {
  struct Visitor {
    std::string operator()(const Hello& h) const {
      json j = {{"type", "hello"}, {"model", h.model}, {"profile_label", h.profile_label}};
      j["settings"] = {{"width", h.settings.width},
                       {"height", h.settings.height},
                       {"binary", h.settings.binary},
                       {"neural", h.settings.neural}};
      return j.dump();
    }
    std::string operator()(const LandmarkFrame& f) const {
      json j = json::parse(landmark_frame_to_json(f));
      j["type"] = "landmarks";
      return j.dump();
    }
    std::string operator()(const PolicyUpdate& p) const {
      json j = {{"type", "policy"}};
      if (p.retarget_pose) j["retarget_pose"] = *p.retarget_pose;
      if (p.expression_gain) j["expression_gain"] = *p.expression_gain;
      if (p.transfer_gaze) j["transfer_gaze"] = *p.transfer_gaze;
      if (p.clamp_expression) j["clamp_expression"] = *p.clamp_expression;
      return j.dump();
    }
    std::string operator()(const Bye&) const { return json{{"type", "bye"}}.dump(); }
  };
  return std::visit(Visitor{}, message);
}

std::vector<std::string> encode_server_message(const ServerMessage& message) {
  struct Visitor {
    std::vector<std::string> operator()(const Ready& r) const {
      return {json{{"type", "ready"}, {"session_id", r.session_id}}.dump()};
    }
    std::vector<std::string> operator()(const ErrorMessage& e) const {
      return {json{{"type", "error"}, {"code", e.code}, {"msg", e.msg}}.dump()};
    }
    std::vector<std::string> operator()(const FrameMessage& f) const {
      json j = {{"type", "frame"}, {"t", f.t}};
      j["mouth_roi"] = {f.mouth_roi.x, f.mouth_roi.y, f.mouth_roi.w, f.mouth_roi.h};
      j["latency_ms"] = f.latency_ms;
      j["diagnostics"] = {{"identity", f.diagnostics.identity},
                          {"residual_rmse", f.diagnostics.residual_rmse},
                          {"stale", f.diagnostics.stale}};
      std::vector<std::string> units;
      if (f.binary) {
        j["binary"] = true;
        j["width"] = f.width;
        j["height"] = f.height;
        j["parts"] = f.output ? 3 : 2;
        units.push_back(j.dump());
        units.emplace_back(f.nmfc.begin(), f.nmfc.end());
        units.emplace_back(f.gaze.begin(), f.gaze.end());
        if (f.output) units.emplace_back(f.output->begin(), f.output->end());
      } else {
        j["nmfc_png"] = encode_base64(f.nmfc);
        j["gaze_png"] = encode_base64(f.gaze);
        j["output_png"] = f.output ? json(encode_base64(*f.output)) : json(nullptr);
        units.push_back(j.dump());
      }
      return units;
    }
  };
  return std::visit(Visitor{}, message);
}

namespace {

FrameMessage parse_frame(const json& j, int& raw_units) {
  FrameMessage f;
  f.t = j.at("t").get<double>();
  const auto roi = j.at("mouth_roi").get<std::vector<int>>();
  if (roi.size() != 4) throw Error(ErrorCode::BadFormat, "mouth_roi must hold 4 values");
  f.mouth_roi = {roi[0], roi[1], roi[2], roi[3]};
  f.latency_ms = j.at("latency_ms").get<double>();
  const json& d = j.at("diagnostics");
  f.diagnostics.identity = d.at("identity").get<std::vector<double>>();
  f.diagnostics.residual_rmse = d.at("residual_rmse").get<double>();
  f.diagnostics.stale = d.at("stale").get<bool>();
  f.binary = j.value("binary", false);
  if (f.binary) {
    f.width = j.at("width").get<int>();
    f.height = j.at("height").get<int>();
    raw_units = j.at("parts").get<int>();
    if (raw_units != 2 && raw_units != 3) throw Error(ErrorCode::BadFormat, "binary frame needs 2 or 3 parts");
  } else {
    f.nmfc = decode_base64(j.at("nmfc_png").get<std::string>());
    f.gaze = decode_base64(j.at("gaze_png").get<std::string>());
    if (auto out = optional_field<std::string>(j, "output_png")) f.output = decode_base64(*out);
  }
  return f;
}

}  // namespace

ServerMessage parse_server_header(std::string_view header, int& raw_units) {
  raw_units = 0;
  try {
    const json j = json::parse(header);
    const std::string type = j.at("type").get<std::string>();
    if (type == "ready") return Ready{j.at("session_id").get<std::string>()};
    if (type == "error") return ErrorMessage{j.at("code").get<std::string>(), j.at("msg").get<std::string>()};
    if (type != "frame") throw Error(ErrorCode::BadFormat, "unknown server message '" + type + "'");
    return ServerMessage(std::in_place_type<FrameMessage>, parse_frame(j, raw_units));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("server message: ") + e.what());
  }
}

void attach_raw_units(FrameMessage& f, std::vector<std::string> units) {
  auto bytes = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
  f.nmfc = bytes(units.at(0));
  f.gaze = bytes(units.at(1));
  if (units.size() > 2) f.output = bytes(units[2]);
}

}  // namespace reenact::engine
