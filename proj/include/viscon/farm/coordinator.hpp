#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "viscon/farm/socket.hpp"
#include "viscon/farm/stats.hpp"
#include "viscon/farm/task.hpp"

namespace viscon::farm {

struct CoordinatorOptions {
  HostPort bind{"127.0.0.1", 0};
  std::chrono::milliseconds heartbeat_timeout{10000};
  std::optional<std::filesystem::path> persist_path;
};

struct CoordinatorSnapshot {
  std::vector<Task> tasks;
  std::map<std::string, std::size_t> running_by_worker;      // live workers only
  std::map<std::string, std::size_t> max_running_by_worker;  // high-water mark
  std::map<std::string, std::size_t> results_recorded;       // per task id
  std::size_t duplicate_results = 0;
  std::size_t reassignments = 0;
  std::size_t protocol_violations = 0;
  bool finished = false;
};

// Dispatches manifest tasks to TCP workers. At-least-once delivery: tasks held
// by a worker that disconnects or misses heartbeats go back to PENDING; the
// first RESULT per task id wins and later copies are acknowledged but ignored.
class Coordinator {
 public:
  Coordinator(TaskManifest& manifest, CoordinatorOptions options);
  ~Coordinator();
  Coordinator(const Coordinator&) = delete;
  Coordinator& operator=(const Coordinator&) = delete;

  void start();  // binds and begins accepting; throws Error(BindFailure)
  std::uint16_t port() const noexcept { return port_; }

  // Blocks until every task is DONE or FAILED, broadcasts DONE, returns stats
  // for the tasks completed by this coordinator.
  FarmStats wait();
  CoordinatorSnapshot snapshot() const;

 private:
  struct Connection;

  void accept_loop();
  void reader_loop(std::shared_ptr<Connection> conn);
  void monitor_loop();
  void handle_line(const std::shared_ptr<Connection>& conn, const std::string& line);
  void drop_locked(const std::shared_ptr<Connection>& conn, const std::string& reason);
  void dispatch_locked();
  void check_finished_locked();
  void persist_locked();
  bool send(const std::shared_ptr<Connection>& conn, const std::string& line);

  TaskManifest& manifest_;
  CoordinatorOptions options_;
  Socket listener_;
  std::uint16_t port_ = 0;

  mutable std::mutex mu_;
  std::condition_variable finished_cv_;
  bool finished_ = false;
  bool stopping_ = false;
  std::deque<std::size_t> pending_;
  std::vector<std::uint8_t> in_run_;  // tasks this coordinator is responsible for
  std::vector<std::shared_ptr<Connection>> connections_;
  std::map<std::string, std::size_t> max_running_;
  std::map<std::string, std::size_t> results_recorded_;
  std::size_t duplicate_results_ = 0;
  std::size_t reassignments_ = 0;
  std::size_t protocol_violations_ = 0;
  std::size_t executed_ = 0;
  double cpu_total_ = 0.0;
  std::chrono::steady_clock::time_point started_at_;
  double wall_seconds_ = 0.0;

  std::jthread accept_thread_;
  std::jthread monitor_thread_;
};

// start() + wait().
FarmStats serve_coordinator(TaskManifest& manifest, const CoordinatorOptions& options);

}  // namespace viscon::farm
