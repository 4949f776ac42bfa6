#include "hiertask/protocol.hpp"

#include <map>

#include "hiertask/errors.hpp"

namespace hiertask {

std::string to_string(MsgType t) {
  switch (t) {
    case MsgType::TaskRequest: return "TaskRequest";
    case MsgType::StrategyResponse: return "StrategyResponse";
    case MsgType::InstructionDispatch: return "InstructionDispatch";
    case MsgType::Observation: return "Observation";
    case MsgType::Status: return "Status";
    case MsgType::Ack: return "Ack";
    case MsgType::Error: return "Error";
  }
  return "Error";
}

MsgType msg_type_from_string(const std::string& s) {
  if (s == "TaskRequest") return MsgType::TaskRequest;
  if (s == "StrategyResponse") return MsgType::StrategyResponse;
  if (s == "InstructionDispatch") return MsgType::InstructionDispatch;
  if (s == "Observation") return MsgType::Observation;
  if (s == "Status") return MsgType::Status;
  if (s == "Ack") return MsgType::Ack;
  if (s == "Error") return MsgType::Error;
  throw DecodeError("unknown msg-type: " + s, 0);
}

std::string encode(const Envelope& e) {
  nlohmann::json j = {{"type", to_string(e.type)},
                      {"msg_id", e.msg_id},
                      {"sent_at", e.sent_at},
                      {"payload", e.payload}};
  if (e.correlates_to) j["correlates_to"] = *e.correlates_to;
  return j.dump() + "\n";
}

Envelope decode(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& err) {
    throw DecodeError(std::string("malformed envelope: ") + err.what(),
                      err.byte);
  }
  if (!j.is_object()) throw DecodeError("envelope is not a JSON object", 0);
  for (const char* field : {"type", "msg_id", "sent_at", "payload"}) {
    if (!j.contains(field)) {
      throw DecodeError(std::string("envelope missing required field \"") +
                            field + "\"",
                        0);
    }
  }
  Envelope e;
  e.type = msg_type_from_string(j.at("type").get<std::string>());
  e.msg_id = j.at("msg_id").get<std::string>();
  if (e.msg_id.empty()) throw DecodeError("envelope msg_id is empty", 0);
  if (j.contains("correlates_to")) {
    e.correlates_to = j.at("correlates_to").get<std::string>();
  }
  e.sent_at = j.at("sent_at").get<std::int64_t>();
  if (!j.at("payload").is_object()) {
    throw DecodeError("envelope payload must be an object", 0);
  }
  e.payload = j.at("payload");
  return e;
}

nlohmann::json normalize_envelope(nlohmann::json envelope,
                                  std::map<std::string, std::string>& rename) {
  auto canon = [&rename](const std::string& id) {
    auto it = rename.find(id);
    if (it == rename.end()) {
      it = rename.emplace(id, "m" + std::to_string(rename.size() + 1)).first;
    }
    return it->second;
  };
  if (envelope.contains("msg_id")) {
    envelope["msg_id"] = canon(envelope["msg_id"].get<std::string>());
  }
  if (envelope.contains("correlates_to")) {
    envelope["correlates_to"] =
        canon(envelope["correlates_to"].get<std::string>());
  }
  if (envelope.contains("sent_at")) envelope["sent_at"] = 0;
  return envelope;
}

}  // namespace hiertask
