#include <unistd.h>

#include <atomic>
#include <condition_variable>
#include <deque>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "viscon/farm/protocol.hpp"
#include "viscon/farm/task.hpp"
#include "viscon/farm/worker.hpp"

namespace viscon::farm {

std::string default_worker_id() {
  char host[256] = {};
  if (gethostname(host, sizeof host - 1) != 0) host[0] = '\0';
  return std::string(host[0] ? host : "worker") + "-" + std::to_string(::getpid());
}

namespace {

enum class SessionEnd { Done, Lost, InjectedFault };

class Session {
 public:
  Session(Socket socket, const WorkerOptions& options, const std::string& worker_id)
      : socket_(std::move(socket)), options_(options), worker_id_(worker_id) {}

  SessionEnd run() {
    if (!send(protocol::hello(worker_id_, options_.slots))) return SessionEnd::Lost;
    std::vector<std::jthread> executors;
    for (unsigned s = 0; s < options_.slots; ++s) executors.emplace_back([this] { execute_loop(); });
    std::jthread beat([this] { heartbeat_loop(); });

    SessionEnd end = read_loop();

    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    if (end != SessionEnd::Done) socket_.shutdown();
    beat.join();
    for (auto& e : executors) e.join();
    return end;
  }

 private:
  SessionEnd read_loop() {
    std::string line;
    std::size_t received = 0;
    for (;;) {
      auto status = socket_.read_line(line, std::chrono::milliseconds(200));
      if (status == Socket::ReadStatus::Timeout) continue;
      if (status == Socket::ReadStatus::Closed) return silent_ ? SessionEnd::InjectedFault : SessionEnd::Lost;
      protocol::Message msg;
      try {
        msg = protocol::parse(line);
      } catch (const Error& e) {
        std::clog << "worker: ignoring bad message: " << e.what() << '\n';
        continue;
      }
      if (msg.kind == protocol::Kind::Done) return SessionEnd::Done;
      if (msg.kind != protocol::Kind::Task) continue;
      Task task;
      try {
        task = task_from_json(msg.body["task"]);
      } catch (const Error& e) {
        std::clog << "worker: ignoring bad task: " << e.what() << '\n';
        continue;
      }
      ++received;
      if (options_.crash_after_tasks && received >= *options_.crash_after_tasks) {
        socket_.shutdown();
        return SessionEnd::InjectedFault;
      }
      if (options_.stall_after_tasks && received >= *options_.stall_after_tasks) silent_ = true;
      {
        std::lock_guard lock(mu_);
        queue_.push_back(std::move(task));
      }
      cv_.notify_all();  // the heartbeat thread shares this condition variable
    }
  }

  void execute_loop() {
    for (;;) {
      Task task;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stop_ || (!queue_.empty() && !silent_); });
        if (stop_) return;
        task = std::move(queue_.front());
        queue_.pop_front();
      }
      double cpu = 0.0;
      bool ok = true;
      std::string message;
      try {
        cpu = execute_task(task);
      } catch (const std::exception& e) {
        ok = false;
        message = e.what();
      }
      if (silent_) continue;
      send(protocol::result(task.id, cpu, ok, message));
    }
  }

  void heartbeat_loop() {
    std::unique_lock lock(mu_);
    while (!stop_) {
      cv_.wait_for(lock, options_.heartbeat_interval, [this] { return stop_; });
      if (stop_) return;
      if (silent_) continue;
      lock.unlock();
      send(protocol::heartbeat(worker_id_));
      lock.lock();
    }
  }

  bool send(const std::string& line) {
    std::lock_guard lock(write_mu_);
    return socket_.send_line(line);
  }

  Socket socket_;
  const WorkerOptions& options_;
  const std::string& worker_id_;
  std::mutex mu_;
  std::mutex write_mu_;
  std::condition_variable cv_;
  std::deque<Task> queue_;
  bool stop_ = false;
  std::atomic<bool> silent_{false};
};

}  // namespace

int run_worker(const WorkerOptions& options) {
  if (options.slots == 0) {
    std::cerr << "worker: slots must be positive\n";
    return kWorkerExitFailure;
  }
  const std::string worker_id = options.worker_id.empty() ? default_worker_id() : options.worker_id;
  for (;;) {
    std::optional<Socket> socket;
    auto backoff = options.backoff_initial;
    for (unsigned attempt = 0; attempt <= options.connect_retries; ++attempt) {
      try {
        socket = Socket::connect(options.coordinator);
        break;
      } catch (const Error& e) {
        if (attempt == options.connect_retries) {
          std::cerr << "worker: " << e.what() << "; giving up after " << attempt + 1 << " attempts\n";
          return kWorkerExitFailure;
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::min(backoff * 2, options.backoff_max);
      }
    }
    Session session(std::move(*socket), options, worker_id);
    switch (session.run()) {
      case SessionEnd::Done:
        return kWorkerExitOk;
      case SessionEnd::InjectedFault:
        return kWorkerExitInjectedFault;
      case SessionEnd::Lost:
        std::clog << "worker: connection lost, reconnecting\n";
        break;
    }
  }
}

}  // namespace viscon::farm
