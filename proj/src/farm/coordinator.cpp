#include <algorithm>
#include <iostream>
#include <set>

#include "viscon/farm/coordinator.hpp"
#include "viscon/farm/protocol.hpp"

namespace viscon::farm {

using Clock = std::chrono::steady_clock;

struct Coordinator::Connection {
  Socket socket;
  std::mutex write_mu;
  std::string worker_id;
  unsigned slots = 0;
  bool greeted = false;
  bool dead = false;
  std::set<std::size_t> running;
  Clock::time_point last_seen = Clock::now();
  std::jthread reader;
};

Coordinator::Coordinator(TaskManifest& manifest, CoordinatorOptions options)
    : manifest_(manifest), options_(std::move(options)) {}

Coordinator::~Coordinator() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    for (auto& c : connections_) c->socket.shutdown();
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  if (monitor_thread_.joinable()) monitor_thread_.join();
  std::vector<std::shared_ptr<Connection>> conns;
  {
    std::lock_guard lock(mu_);
    conns = connections_;
  }
  for (auto& c : conns)
    if (c->reader.joinable()) c->reader.join();
}

void Coordinator::start() {
  manifest_.check_unique_ids();
  listener_ = Socket::listen(options_.bind);
  port_ = listener_.local_port();

  std::lock_guard lock(mu_);
  in_run_.assign(manifest_.tasks.size(), 0);
  for (std::size_t i = 0; i < manifest_.tasks.size(); ++i) {
    Task& t = manifest_.tasks[i];
    if (t.status == TaskStatus::Done && output_exists(t, manifest_)) continue;
    t.status = TaskStatus::Pending;
    t.worker_id.clear();
    t.message.clear();
    in_run_[i] = 1;
    pending_.push_back(i);
  }
  started_at_ = Clock::now();
  check_finished_locked();
  accept_thread_ = std::jthread([this] { accept_loop(); });
  monitor_thread_ = std::jthread([this] { monitor_loop(); });
}

void Coordinator::accept_loop() {
  for (;;) {
    {
      std::lock_guard lock(mu_);
      if (stopping_ || finished_) return;
    }
    auto client = listener_.accept(std::chrono::milliseconds(100));
    if (!client) continue;
    auto conn = std::make_shared<Connection>();
    conn->socket = std::move(*client);
    std::lock_guard lock(mu_);
    if (stopping_ || finished_) {
      conn->socket.send_line(protocol::done());
      return;
    }
    connections_.push_back(conn);
    conn->reader = std::jthread([this, conn] { reader_loop(conn); });
  }
}

void Coordinator::reader_loop(std::shared_ptr<Connection> conn) {
  std::string line;
  for (;;) {
    {
      std::lock_guard lock(mu_);
      if (conn->dead || stopping_) return;
    }
    auto status = conn->socket.read_line(line, std::chrono::milliseconds(100));
    if (status == Socket::ReadStatus::Timeout) continue;
    std::lock_guard lock(mu_);
    if (status == Socket::ReadStatus::Closed) {
      if (!conn->dead) drop_locked(conn, "connection closed");
      return;
    }
    handle_line(conn, line);
  }
}

void Coordinator::monitor_loop() {
  for (;;) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    std::lock_guard lock(mu_);
    if (stopping_ || finished_) return;
    const auto now = Clock::now();
    for (auto& c : connections_)
      if (!c->dead && c->greeted && now - c->last_seen > options_.heartbeat_timeout)
        drop_locked(c, "heartbeat timeout");
  }
}

bool Coordinator::send(const std::shared_ptr<Connection>& conn, const std::string& line) {
  std::lock_guard lock(conn->write_mu);
  return conn->socket.send_line(line);
}

void Coordinator::handle_line(const std::shared_ptr<Connection>& conn, const std::string& line) {
  if (conn->dead) return;
  protocol::Message msg;
  try {
    msg = protocol::parse(line);
    conn->last_seen = Clock::now();
    if (!conn->greeted && msg.kind != protocol::Kind::Hello)
      throw Error(Errc::ProtocolViolation, "message before HELLO");
    switch (msg.kind) {
      case protocol::Kind::Hello: {
        if (conn->greeted) throw Error(Errc::ProtocolViolation, "repeated HELLO");
        conn->greeted = true;
        conn->worker_id = msg.body["worker_id"].get<std::string>();
        conn->slots = msg.body["slots"].get<unsigned>();
        dispatch_locked();
        break;
      }
      case protocol::Kind::Heartbeat:
        break;
      case protocol::Kind::Result: {
        const std::string id = msg.body["id"].get<std::string>();
        auto it = std::find_if(manifest_.tasks.begin(), manifest_.tasks.end(),
                               [&](const Task& t) { return t.id == id; });
        if (it == manifest_.tasks.end()) throw Error(Errc::ProtocolViolation, "RESULT for unknown task '" + id + "'");
        const auto idx = static_cast<std::size_t>(it - manifest_.tasks.begin());
        conn->running.erase(idx);
        Task& t = *it;
        if (t.status == TaskStatus::Done || t.status == TaskStatus::Failed || !in_run_[idx]) {
          ++duplicate_results_;
        } else {
          ++results_recorded_[id];
          t.worker_id = conn->worker_id;
          if (msg.body["ok"].get<bool>()) {
            t.status = TaskStatus::Done;
            t.cpu_seconds = msg.body["cpu_seconds"].get<double>();
            t.message.clear();
            ++executed_;
            cpu_total_ += t.cpu_seconds;
          } else {
            t.status = TaskStatus::Failed;
            t.message = msg.body.value("message", std::string("worker reported failure"));
          }
          // A requeued copy may still sit in the pending queue; dispatch skips non-PENDING entries.
          persist_locked();
        }
        send(conn, protocol::ack(id));
        check_finished_locked();
        dispatch_locked();
        break;
      }
      case protocol::Kind::Task:
      case protocol::Kind::Done:
      case protocol::Kind::Ack:
        throw Error(Errc::ProtocolViolation, "unexpected message kind from worker");
    }
  } catch (const Error& e) {
    ++protocol_violations_;
    drop_locked(conn, e.what());
  }
}

void Coordinator::drop_locked(const std::shared_ptr<Connection>& conn, const std::string& reason) {
  if (conn->dead) return;
  conn->dead = true;
  conn->socket.shutdown();
  if (!conn->running.empty())
    std::clog << "farm: dropping worker '" << conn->worker_id << "' (" << reason << "), requeueing "
              << conn->running.size() << " task(s)\n";
  // Requeue at the front, keeping manifest order among them.
  for (auto it = conn->running.rbegin(); it != conn->running.rend(); ++it) {
    Task& t = manifest_.tasks[*it];
    if (t.status != TaskStatus::Running) continue;
    t.status = TaskStatus::Pending;
    t.worker_id.clear();
    pending_.push_front(*it);
    ++reassignments_;
  }
  conn->running.clear();
  dispatch_locked();
}

void Coordinator::dispatch_locked() {
  if (finished_) return;
  for (auto& c : connections_) {
    if (c->dead || !c->greeted) continue;
    while (c->running.size() < c->slots && !pending_.empty()) {
      const std::size_t idx = pending_.front();
      pending_.pop_front();
      Task& t = manifest_.tasks[idx];
      if (t.status != TaskStatus::Pending) continue;
      t.status = TaskStatus::Running;
      t.worker_id = c->worker_id;
      c->running.insert(idx);
      auto& high = max_running_[c->worker_id];
      high = std::max(high, c->running.size());
      Task wire = t;
      wire.input_path = manifest_.resolve(t.input_path).string();
      wire.output_path = manifest_.resolve(t.output_path).string();
      if (!send(c, protocol::task(wire))) {
        drop_locked(c, "send failed");
        return;
      }
    }
  }
}

void Coordinator::check_finished_locked() {
  if (finished_) return;
  for (std::size_t i = 0; i < manifest_.tasks.size(); ++i) {
    if (!in_run_[i]) continue;
    const auto s = manifest_.tasks[i].status;
    if (s != TaskStatus::Done && s != TaskStatus::Failed) return;
  }
  finished_ = true;
  wall_seconds_ = std::chrono::duration<double>(Clock::now() - started_at_).count();
  for (auto& c : connections_)
    if (!c->dead) send(c, protocol::done());
  persist_locked();
  finished_cv_.notify_all();
}

void Coordinator::persist_locked() {
  if (!options_.persist_path) return;
  try {
    manifest_.save(*options_.persist_path);
  } catch (const Error& e) {
    std::clog << "farm: " << e.what() << '\n';
  }
}

FarmStats Coordinator::wait() {
  std::unique_lock lock(mu_);
  finished_cv_.wait(lock, [this] { return finished_; });
  const double wall = wall_seconds_ > 0.0 ? wall_seconds_ : 1e-9;
  return stats_from_totals(executed_, cpu_total_, wall);
}

CoordinatorSnapshot Coordinator::snapshot() const {
  std::lock_guard lock(mu_);
  CoordinatorSnapshot s;
  s.tasks = manifest_.tasks;
  for (const auto& c : connections_)
    if (!c->dead && c->greeted) s.running_by_worker[c->worker_id] += c->running.size();
  s.max_running_by_worker = max_running_;
  s.results_recorded = results_recorded_;
  s.duplicate_results = duplicate_results_;
  s.reassignments = reassignments_;
  s.protocol_violations = protocol_violations_;
  s.finished = finished_;
  return s;
}

FarmStats serve_coordinator(TaskManifest& manifest, const CoordinatorOptions& options) {
  Coordinator coordinator(manifest, options);
  coordinator.start();
  return coordinator.wait();
}

}  // namespace viscon::farm
