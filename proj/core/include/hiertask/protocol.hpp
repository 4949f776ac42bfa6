#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace hiertask {

enum class MsgType {
  TaskRequest,
  StrategyResponse,
  InstructionDispatch,
  Observation,
  Status,
  Ack,
  Error,
};

std::string to_string(MsgType t);
MsgType msg_type_from_string(const std::string& s);

/// One wire message. Encoded as a single line of UTF-8 JSON; the payload
/// body is message-type specific (see docs/protocol.md for one worked
/// example per type).
struct Envelope {
  MsgType type = MsgType::Error;
  std::string msg_id;
  std::optional<std::string> correlates_to;
  std::int64_t sent_at = 0;  // milliseconds since epoch
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

/// Serializes to one newline-terminated JSON line.
std::string encode(const Envelope& e);

/// Parses one complete line. Throws DecodeError (with the byte offset for
/// malformed JSON) on garbage, unknown msg-type, or missing required
/// fields. decode(encode(e)) == e field-for-field.
Envelope decode(std::string_view line);

/// Normalizes a message-log JSON line for cross-run and cross-transport
/// comparison: sent_at zeroed and msg-ids renamed to m1, m2, ... in order
/// of first appearance (state carried in `rename`).
nlohmann::json normalize_envelope(nlohmann::json envelope,
                                  std::map<std::string, std::string>& rename);

}  // namespace hiertask
