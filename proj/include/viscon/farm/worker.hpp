#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>

#include "viscon/farm/socket.hpp"

namespace viscon::farm {

struct WorkerOptions {
  HostPort coordinator;
  unsigned slots = 1;
  std::string worker_id;  // empty: "<hostname>-<pid>"
  std::chrono::milliseconds heartbeat_interval{2000};
  unsigned connect_retries = 5;
  std::chrono::milliseconds backoff_initial{200};
  std::chrono::milliseconds backoff_max{5000};

  // Fault injection for tests. After receiving this many tasks the worker
  // either drops the connection immediately (crash) or goes silent: no more
  // heartbeats or results until the coordinator hangs up (stall).
  std::optional<std::size_t> crash_after_tasks;
  std::optional<std::size_t> stall_after_tasks;
};

inline constexpr int kWorkerExitOk = 0;
inline constexpr int kWorkerExitFailure = 1;
inline constexpr int kWorkerExitInjectedFault = 3;

// Serves tasks until the coordinator broadcasts DONE. Returns an exit code.
int run_worker(const WorkerOptions& options);

std::string default_worker_id();

}  // namespace viscon::farm
