#pragma once

// Newline-delimited JSON messages exchanged between coordinator and workers.
// Every message is one UTF-8 JSON object with a "kind" field.

#include <string>
#include <string_view>

#include "json.hpp"
#include "viscon/farm/task.hpp"

namespace viscon::farm::protocol {

enum class Kind { Hello, Task, Result, Heartbeat, Done, Ack };

struct Message {
  Kind kind;
  nlohmann::ordered_json body;
};

// Throws Error(ProtocolViolation) on malformed input or missing fields.
Message parse(std::string_view line);

std::string hello(std::string_view worker_id, unsigned slots);
std::string task(const Task& task);
std::string result(std::string_view id, double cpu_seconds, bool ok, std::string_view message);
std::string heartbeat(std::string_view worker_id);
std::string done();
std::string ack(std::string_view id);

}  // namespace viscon::farm::protocol
