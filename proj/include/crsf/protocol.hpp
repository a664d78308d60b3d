#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "crsf/core.hpp"
#include "crsf/registry.hpp"

namespace crsf {

enum class MessageType { REGISTER, CAPACITY_UPDATE, DISCOVER, SELECTION_NOTICE, ACK, ERROR, TICK };

inline const char* to_string(MessageType t) {
  switch (t) {
    case MessageType::REGISTER: return "REGISTER";
    case MessageType::CAPACITY_UPDATE: return "CAPACITY_UPDATE";
    case MessageType::DISCOVER: return "DISCOVER";
    case MessageType::SELECTION_NOTICE: return "SELECTION_NOTICE";
    case MessageType::ACK: return "ACK";
    case MessageType::ERROR: return "ERROR";
    case MessageType::TICK: return "TICK";
  }
  return "?";
}

inline std::optional<MessageType> parse_message_type(std::string_view s) {
  for (auto t : {MessageType::REGISTER, MessageType::CAPACITY_UPDATE, MessageType::DISCOVER, MessageType::SELECTION_NOTICE,
                 MessageType::ACK, MessageType::ERROR, MessageType::TICK})
    if (s == to_string(t)) return t;
  return std::nullopt;
}

struct RegisterPayload {
  SfProfile profile;
  bool operator==(const RegisterPayload&) const = default;
};

struct CapacityUpdatePayload {
  SfId sf_id;
  double capacity = 0.0;
  bool operator==(const CapacityUpdatePayload&) const = default;
};

struct DiscoverPayload {
  ServiceRequest request;
  std::map<SfId, double> latency;  // L per SF, ms
  bool operator==(const DiscoverPayload&) const = default;
};

struct SelectionNoticePayload {
  RequestId request_id;
  std::optional<SfId> sf_id;  // empty: unserved
  double value = 0.0;
  bool optimal = true;
  bool operator==(const SelectionNoticePayload&) const = default;
};

struct AckPayload {
  MessageType of = MessageType::REGISTER;
  std::int64_t id = 0;  // sf_id or request_id of the acknowledged message
  bool operator==(const AckPayload&) const = default;
};

struct ErrorPayload {
  std::string code;
  std::string message;
  bool operator==(const ErrorPayload&) const = default;
};

/// Closes the collecting phase of the current slot (deterministic mode).
struct TickPayload {
  bool operator==(const TickPayload&) const = default;
};

using Payload = std::variant<RegisterPayload, CapacityUpdatePayload, DiscoverPayload, SelectionNoticePayload, AckPayload,
                             ErrorPayload, TickPayload>;

struct ProtocolMessage {
  std::int64_t slot = 0;
  Payload payload;

  MessageType type() const { return static_cast<MessageType>(payload.index()); }
  bool operator==(const ProtocolMessage&) const = default;
};

inline ProtocolMessage make_error(std::int64_t slot, ErrorCode code, const std::string& message) {
  return {slot, ErrorPayload{to_string(code), message}};
}

namespace wire {

using nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& what) { throw Error(ErrorCode::schema, what); }

inline const json& field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) schema_error(std::string("missing field '") + name + "'");
  return *it;
}

inline std::int64_t get_int(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_number_integer()) schema_error(std::string("field '") + name + "' must be an integer");
  return v.get<std::int64_t>();
}

inline double get_number(const json& v, const std::string& what) {
  if (!v.is_number()) schema_error("'" + what + "' must be a number");
  return v.get<double>();
}

inline double get_real(const json& obj, const char* name) { return get_number(field(obj, name), name); }

inline std::string get_string(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_string()) schema_error(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

inline bool get_bool(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_boolean()) schema_error(std::string("field '") + name + "' must be a boolean");
  return v.get<bool>();
}

inline const json& get_object(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_object()) schema_error(std::string("field '") + name + "' must be an object");
  return v;
}

inline ServiceTypeId get_service_type(const json& obj, const char* name) {
  const std::string s = get_string(obj, name);
  if (!ServiceTypeId::valid(s)) schema_error("invalid service type '" + s + "'");
  return ServiceTypeId(s);
}

// Maps keyed by SF id travel as JSON objects with decimal keys.
inline json sf_map_to_json(const std::map<SfId, double>& m) {
  json out = json::object();
  for (const auto& [id, v] : m) out[std::to_string(id.value())] = v;
  return out;
}

inline std::map<SfId, double> sf_map_from_json(const json& obj, const char* name) {
  std::map<SfId, double> out;
  for (const auto& [key, v] : get_object(obj, name).items()) {
    std::int64_t id = 0;
    std::size_t used = 0;
    try {
      id = std::stoll(key, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != key.size() || std::to_string(id) != key)
      schema_error(std::string("field '") + name + "' has a non-integer SF key '" + key + "'");
    out[SfId(id)] = get_number(v, name);
  }
  return out;
}

inline json to_json(const SfProfile& p) {
  return {{"sf_id", p.sf_id.value()},
          {"subnetwork_id", p.subnetwork_id.value()},
          {"service_type", p.service_type.name()},
          {"qos_params", p.qos_params},
          {"capacity", p.capacity}};
}

inline SfProfile profile_from_json(const json& o) {
  SfProfile p;
  p.sf_id = SfId(get_int(o, "sf_id"));
  p.subnetwork_id = SubnetworkId(get_int(o, "subnetwork_id"));
  p.service_type = get_service_type(o, "service_type");
  const json& params = field(o, "qos_params");
  if (!params.is_array()) schema_error("field 'qos_params' must be an array");
  for (const auto& v : params) p.qos_params.push_back(get_number(v, "qos_params"));
  p.capacity = get_real(o, "capacity");
  return p;
}

inline json to_json(const ServiceRequest& r) {
  return {{"request_id", r.request_id.value()},
          {"origin_subnetwork", r.origin_subnetwork.value()},
          {"service_type", r.service_type.name()},
          {"category_id", r.category_id.value()},
          {"priority_weights", sf_map_to_json(r.priority_weights)}};
}

inline ServiceRequest request_from_json(const json& o) {
  ServiceRequest r;
  r.request_id = RequestId(get_int(o, "request_id"));
  r.origin_subnetwork = SubnetworkId(get_int(o, "origin_subnetwork"));
  r.service_type = get_service_type(o, "service_type");
  r.category_id = CategoryId(get_int(o, "category_id"));
  r.priority_weights = sf_map_from_json(o, "priority_weights");
  return r;
}

struct PayloadWriter {
  json operator()(const RegisterPayload& p) const { return to_json(p.profile); }
  json operator()(const CapacityUpdatePayload& p) const { return {{"sf_id", p.sf_id.value()}, {"capacity", p.capacity}}; }
  json operator()(const DiscoverPayload& p) const {
    return {{"request", to_json(p.request)}, {"latency", sf_map_to_json(p.latency)}};
  }
  json operator()(const SelectionNoticePayload& p) const {
    json o = {{"request_id", p.request_id.value()}, {"value", p.value}, {"optimal", p.optimal}};
    o["sf_id"] = p.sf_id ? json(p.sf_id->value()) : json(nullptr);
    o["status"] = p.sf_id ? "served" : "unserved";
    return o;
  }
  json operator()(const AckPayload& p) const { return {{"of", to_string(p.of)}, {"id", p.id}}; }
  json operator()(const ErrorPayload& p) const { return {{"code", p.code}, {"message", p.message}}; }
  json operator()(const TickPayload&) const { return json::object(); }
};

inline Payload payload_from_json(MessageType type, const json& o) {
  switch (type) {
    case MessageType::REGISTER: return RegisterPayload{profile_from_json(o)};
    case MessageType::CAPACITY_UPDATE: return CapacityUpdatePayload{SfId(get_int(o, "sf_id")), get_real(o, "capacity")};
    case MessageType::DISCOVER: {
      const json& req = get_object(o, "request");
      return DiscoverPayload{request_from_json(req), sf_map_from_json(o, "latency")};
    }
    case MessageType::SELECTION_NOTICE: {
      SelectionNoticePayload p;
      p.request_id = RequestId(get_int(o, "request_id"));
      const json& sf = field(o, "sf_id");
      const std::string status = get_string(o, "status");
      if (sf.is_null()) {
        if (status != "unserved") schema_error("a notice without an SF must be 'unserved'");
      } else {
        if (!sf.is_number_integer()) schema_error("field 'sf_id' must be an integer or null");
        if (status != "served") schema_error("a notice naming an SF must be 'served'");
        p.sf_id = SfId(sf.get<std::int64_t>());
      }
      p.value = get_real(o, "value");
      p.optimal = get_bool(o, "optimal");
      return p;
    }
    case MessageType::ACK: {
      const auto of = parse_message_type(get_string(o, "of"));
      if (!of) schema_error("ACK names an unknown message type");
      return AckPayload{*of, get_int(o, "id")};
    }
    case MessageType::ERROR: return ErrorPayload{get_string(o, "code"), get_string(o, "message")};
    case MessageType::TICK: return TickPayload{};
  }
  schema_error("unknown message type");
}

}  // namespace wire

inline nlohmann::json to_json(const ProtocolMessage& m) {
  return {{"type", to_string(m.type())}, {"slot", m.slot}, {"payload", std::visit(wire::PayloadWriter{}, m.payload)}};
}

/// Validates a decoded JSON document as a message. Throws Error with code
/// unsupported (unknown type) or schema (wrong shape).
inline ProtocolMessage message_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::parse, "message must be a JSON object");
  const auto type_it = doc.find("type");
  if (type_it == doc.end() || !type_it->is_string()) throw Error(ErrorCode::schema, "missing string field 'type'");
  const auto type = parse_message_type(type_it->get<std::string>());
  if (!type) throw Error(ErrorCode::unsupported, "unsupported message type '" + type_it->get<std::string>() + "'");
  ProtocolMessage m;
  m.slot = wire::get_int(doc, "slot");
  if (m.slot < 0) throw Error(ErrorCode::schema, "slot must be nonnegative");
  m.payload = wire::payload_from_json(*type, wire::get_object(doc, "payload"));
  return m;
}

inline constexpr std::size_t kFrameHeaderBytes = 4;
inline constexpr std::size_t kMaxFrameBytes = 1u << 20;

inline std::string encode_frame(const ProtocolMessage& m) {
  const std::string body = to_json(m).dump();
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(kFrameHeaderBytes + body.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xFF));
  out += body;
  return out;
}

inline std::uint32_t frame_length(std::string_view header) {
  std::uint32_t n = 0;
  for (std::size_t i = 0; i < kFrameHeaderBytes; ++i) n = (n << 8) | static_cast<unsigned char>(header[i]);
  return n;
}

inline ProtocolMessage decode_body(std::string_view body) {
  nlohmann::json doc = nlohmann::json::parse(body.begin(), body.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error(ErrorCode::parse, "frame body is not valid JSON");
  return message_from_json(doc);
}

/// Decodes exactly one complete frame.
inline ProtocolMessage decode_frame(std::string_view bytes) {
  if (bytes.size() < kFrameHeaderBytes) throw Error(ErrorCode::parse, "truncated frame header");
  const std::uint32_t n = frame_length(bytes);
  if (n > kMaxFrameBytes) throw Error(ErrorCode::parse, "frame exceeds the size limit");
  if (bytes.size() - kFrameHeaderBytes < n) throw Error(ErrorCode::parse, "truncated frame body");
  if (bytes.size() - kFrameHeaderBytes > n) throw Error(ErrorCode::parse, "trailing bytes after frame");
  return decode_body(bytes.substr(kFrameHeaderBytes));
}

/// Splits a byte stream into frame bodies.
class FrameReader {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }

  /// Next complete frame body, if any. Throws Error(parse) on an oversized
  /// length prefix; the stream cannot be resynchronized after that.
  std::optional<std::string> next() {
    if (buffer_.size() - pos_ < kFrameHeaderBytes) return std::nullopt;
    const std::uint32_t n = frame_length(std::string_view(buffer_).substr(pos_));
    if (n > kMaxFrameBytes) throw Error(ErrorCode::parse, "frame exceeds the size limit");
    if (buffer_.size() - pos_ - kFrameHeaderBytes < n) return std::nullopt;
    std::string body = buffer_.substr(pos_ + kFrameHeaderBytes, n);
    pos_ += kFrameHeaderBytes + n;
    if (pos_ == buffer_.size()) {
      buffer_.clear();
      pos_ = 0;
    } else if (pos_ > 4096) {
      buffer_.erase(0, pos_);
      pos_ = 0;
    }
    return body;
  }

  std::size_t buffered() const noexcept { return buffer_.size() - pos_; }

 private:
  std::string buffer_;
  std::size_t pos_ = 0;
};

}  // namespace crsf
