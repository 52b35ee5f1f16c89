#include "viscon/farm/protocol.hpp"

namespace viscon::farm::protocol {

using json = nlohmann::ordered_json;

namespace {

void require(const json& j, const char* field, json::value_t type) {
  auto it = j.find(field);
  bool ok = it != j.end();
  if (ok) {
    if (type == json::value_t::number_float)
      ok = it->is_number();
    else if (type == json::value_t::number_unsigned)
      ok = it->is_number_integer() && it->get<long long>() >= 0;
    else
      ok = it->type() == type;
  }
  if (!ok) throw Error(Errc::ProtocolViolation, std::string("missing or invalid field '") + field + "'");
}

}  // namespace

Message parse(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(Errc::ProtocolViolation, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::ProtocolViolation, "message is not an object");
  require(j, "kind", json::value_t::string);
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "HELLO") {
    require(j, "worker_id", json::value_t::string);
    require(j, "slots", json::value_t::number_unsigned);
    if (j["slots"].get<long long>() < 1) throw Error(Errc::ProtocolViolation, "slots must be positive");
    return {Kind::Hello, std::move(j)};
  }
  if (kind == "TASK") {
    require(j, "task", json::value_t::object);
    return {Kind::Task, std::move(j)};
  }
  if (kind == "RESULT") {
    require(j, "id", json::value_t::string);
    require(j, "cpu_seconds", json::value_t::number_float);
    require(j, "ok", json::value_t::boolean);
    return {Kind::Result, std::move(j)};
  }
  if (kind == "HEARTBEAT") {
    require(j, "worker_id", json::value_t::string);
    return {Kind::Heartbeat, std::move(j)};
  }
  if (kind == "DONE") return {Kind::Done, std::move(j)};
  if (kind == "ACK") return {Kind::Ack, std::move(j)};
  throw Error(Errc::ProtocolViolation, "unknown message kind '" + kind + "'");
}

std::string hello(std::string_view worker_id, unsigned slots) {
  return json{{"kind", "HELLO"}, {"worker_id", worker_id}, {"slots", slots}}.dump();
}

std::string task(const Task& t) { return json{{"kind", "TASK"}, {"task", task_to_json(t)}}.dump(); }

std::string result(std::string_view id, double cpu_seconds, bool ok, std::string_view message) {
  return json{{"kind", "RESULT"}, {"id", id}, {"cpu_seconds", cpu_seconds}, {"ok", ok}, {"message", message}}.dump();
}

std::string heartbeat(std::string_view worker_id) {
  return json{{"kind", "HEARTBEAT"}, {"worker_id", worker_id}}.dump();
}

std::string done() { return json{{"kind", "DONE"}}.dump(); }

std::string ack(std::string_view id) { return json{{"kind", "ACK"}, {"id", id}}.dump(); }

}  // namespace viscon::farm::protocol
