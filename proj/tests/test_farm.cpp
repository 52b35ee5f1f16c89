#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "test_util.hpp"
#include "viscon/analysis.hpp"
#include "viscon/farm/coordinator.hpp"
#include "viscon/farm/local.hpp"
#include "viscon/farm/protocol.hpp"
#include "viscon/farm/stats.hpp"
#include "viscon/farm/worker.hpp"
#include "viscon/plan_synth.hpp"

using namespace viscon;
using namespace viscon::farm;
using testutil::TempDir;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

TaskManifest make_batch(const fs::path& dir, std::size_t count, int size = 24, std::uint64_t seed = 1) {
  PlanSynthParams p;
  p.width = p.height = size;
  p.seed = seed;
  p.room_count = {2, 4};
  return generate_batch(p, count, dir, {{FieldKind::SpatialConnectivity}, 1.0, 1});
}

std::vector<std::uint8_t> direct_output(const TaskManifest& m, const Task& t) {
  TempDir scratch;
  const auto plan = load_occupancy(m.resolve(t.input_path), t.cell_size);
  const auto r = analyze_plan(plan, t.analysis, {VisibilityBackend::Shadowcast, 1});
  const fs::path out = scratch / fs::path(t.output_path).filename().string();
  write_field_output(r.field, r.pruned, out);
  return read_file(out);
}

std::uint16_t unused_port() {
  auto s = Socket::listen({"127.0.0.1", 0});
  return s.local_port();
}

}  // namespace

TEST_SUITE("sim_farm") {

TEST_CASE("task JSON keeps unknown fields") {
  const auto j = nlohmann::ordered_json::parse(
      R"({"id":"a","input_path":"p.pgm","analysis":"VISUAL","cell_size":0.3,"output_path":"o.f32",)"
      R"("status":"DONE","cpu_seconds":1.5,"worker_id":"w","colour":"blue","visibility":"exact"})");
  const Task t = task_from_json(j);
  CHECK(t.id == "a");
  CHECK(t.analysis == FieldKind::VisualConnectivity);
  CHECK(t.cell_size == 0.3);
  CHECK(t.status == TaskStatus::Done);
  CHECK(t.extra["colour"] == "blue");
  const auto back = task_to_json(t);
  CHECK(back["colour"] == "blue");
  CHECK(back["visibility"] == "exact");
  CHECK(task_from_json(back).id == "a");

  CHECK_ERRC(task_from_json(nlohmann::ordered_json::parse(R"({"id":"a"})")), Errc::ManifestIo);
  CHECK_ERRC(task_from_json(nlohmann::ordered_json::parse("[1]")), Errc::ManifestIo);
  CHECK_ERRC(parse_task_status("LOST"), Errc::ManifestIo);
  for (auto s : {TaskStatus::Pending, TaskStatus::Running, TaskStatus::Done, TaskStatus::Failed})
    CHECK(parse_task_status(task_status_name(s)) == s);
}

TEST_CASE("manifests round-trip and resolve paths against their directory") {
  TempDir dir;
  auto m = make_batch(dir / "plans", 2);
  const auto loaded = TaskManifest::load(dir / "plans" / "manifest.jsonl");
  CHECK(loaded.to_jsonl() == m.to_jsonl());
  CHECK(loaded.resolve("plan_00000.pgm") == fs::absolute(dir / "plans" / "plan_00000.pgm"));
  CHECK(loaded.resolve("/abs/x.pgm") == fs::path("/abs/x.pgm"));

  TaskManifest dup = loaded;
  dup.tasks.push_back(dup.tasks.front());
  CHECK_ERRC(dup.check_unique_ids(), Errc::DuplicateIds);

  std::ofstream(dir / "bad.jsonl") << "{\"id\":\"x\"\n";
  CHECK_ERRC(TaskManifest::load(dir / "bad.jsonl"), Errc::ManifestIo);
  CHECK_ERRC(TaskManifest::load(dir / "absent.jsonl"), Errc::ManifestIo);
}

TEST_CASE("stats arithmetic") {
  CHECK(stats_from_totals(1, 800.0, 100.0).speedup == 8.0);
  CHECK(stats_from_totals(1, 10.0, 10.0).speedup == 1.0);

  const double cpu = parse_duration("00:14:36:15");
  const double wall = parse_duration("02:47:09");
  CHECK(cpu == 52575.0);
  CHECK(wall == 10029.0);
  const auto s = stats_from_totals(1, cpu, wall);
  CHECK(std::abs(s.speedup - 5.2423) < 1e-4);
  CHECK(std::abs(s.speedup - 5.25) <= 0.01);
  CHECK(format_stats_table(s).find("5.24") != std::string::npos);

  // The second row of the same table computes to 9.28 rather than the printed 9.16.
  const auto vga = stats_from_totals(1, parse_duration("02:07:50:53"), parse_duration("06:00:57"));
  CHECK(std::abs(vga.speedup - 9.28) < 0.005);

  CHECK(format_duration(52575.0) == "00:14:36:15");
  CHECK(format_duration(10029.0, false) == "02:47:09");
  CHECK(format_duration(0.4) == "00:00:00:00");
  CHECK(format_duration(90061.0) == "01:01:01:01");
  CHECK_ERRC(parse_duration("12:00"), Errc::InvalidParams);
  CHECK_ERRC(parse_duration("aa:00:00"), Errc::InvalidParams);
  CHECK_ERRC(stats_from_totals(1, 1.0, 0.0), Errc::InvalidParams);

  const auto j = stats_to_json(s);
  CHECK(j["sample_count"] == 1);
  CHECK(j["speedup"].get<double>() == s.speedup);
}

TEST_CASE("compute_stats counts DONE tasks and keeps the identity") {
  std::vector<Task> tasks(5);
  double expect = 0.0;
  for (int i = 0; i < 5; ++i) {
    tasks[i].id = "t" + std::to_string(i);
    tasks[i].cpu_seconds = 1.25 * (i + 1);
    tasks[i].status = i == 3 ? TaskStatus::Failed : TaskStatus::Done;
    if (i != 3) expect += tasks[i].cpu_seconds;
  }
  const auto s = compute_stats(tasks, 3.0);
  CHECK(s.sample_count == 4);
  CHECK(s.total_cpu_seconds == expect);
  CHECK(std::abs(s.speedup * s.wall_seconds - s.total_cpu_seconds) <= 1e-9 * s.total_cpu_seconds);
  for (auto& t : tasks) t.status = TaskStatus::Pending;
  CHECK_ERRC(compute_stats(tasks, 1.0), Errc::EmptyTaskList);
}

TEST_CASE("local farm runs, resumes and isolates failures") {
  TempDir dir;
  auto m = make_batch(dir.path(), 8);
  const auto stats = run_local(m, {4, dir / "manifest.jsonl"});
  CHECK(stats.sample_count == 8);
  for (const auto& t : m.tasks) {
    CHECK(t.status == TaskStatus::Done);
    CHECK(t.cpu_seconds >= 0.0);
    CHECK(output_exists(t, m));
    CHECK(read_file(m.resolve(t.output_path)) == direct_output(m, t));
  }
  // Progress was persisted.
  const auto saved = TaskManifest::load(dir / "manifest.jsonl");
  for (const auto& t : saved.tasks) CHECK(t.status == TaskStatus::Done);

  const auto again = run_local(m, {4, std::nullopt});
  CHECK(again.sample_count == 0);

  // A DONE task whose output vanished is redone.
  fs::remove(m.resolve(m.tasks[2].output_path));
  CHECK(run_local(m, {2, std::nullopt}).sample_count == 1);

  TempDir dir2;
  auto m2 = make_batch(dir2.path(), 4);
  m2.tasks[1].input_path = "nope.pgm";
  run_local(m2, {2, std::nullopt});
  CHECK(m2.tasks[1].status == TaskStatus::Failed);
  CHECK_FALSE(m2.tasks[1].message.empty());
  for (std::size_t i : {0u, 2u, 3u}) CHECK(m2.tasks[i].status == TaskStatus::Done);
}

TEST_CASE("local farm output is independent of worker count") {
  TempDir a, b;
  auto ma = make_batch(a.path(), 6, 20, 9);
  auto mb = make_batch(b.path(), 6, 20, 9);
  run_local(ma, {1, std::nullopt});
  run_local(mb, {5, std::nullopt});
  for (std::size_t i = 0; i < ma.tasks.size(); ++i)
    CHECK(read_file(ma.resolve(ma.tasks[i].output_path)) == read_file(mb.resolve(mb.tasks[i].output_path)));
}

TEST_CASE("visibility backend can be chosen per task") {
  TempDir dir;
  auto m = make_batch(dir.path(), 1, 20);
  Task t = m.tasks[0];
  t.analysis = FieldKind::VisualConnectivity;
  t.output_path = "v.f32";
  t.extra["visibility"] = "exact";
  execute_task(t, m);
  const auto plan = largest_component(load_occupancy(m.resolve(t.input_path)));
  const auto ref = visual_connectivity_field(plan, {VisibilityBackend::Exact, 1});
  const auto got = load_field_f32(m.resolve("v.f32"), FieldKind::VisualConnectivity);
  for (std::size_t c = 0; c < plan.size(); ++c)
    if (plan.is_free(c)) CHECK(got.values[c] == ref.values[c]);
}

TEST_CASE("protocol messages parse and validate") {
  auto h = protocol::parse(protocol::hello("w1", 3));
  CHECK(h.kind == protocol::Kind::Hello);
  CHECK(h.body["slots"] == 3);
  auto r = protocol::parse(protocol::result("t1", 0.5, true, ""));
  CHECK(r.kind == protocol::Kind::Result);
  CHECK(r.body["id"] == "t1");
  Task t;
  t.id = "x";
  t.input_path = "/p.pgm";
  t.output_path = "/o.f32";
  CHECK(task_from_json(protocol::parse(protocol::task(t)).body["task"]).id == "x");
  CHECK(protocol::parse(protocol::done()).kind == protocol::Kind::Done);
  CHECK(protocol::parse(protocol::heartbeat("w")).kind == protocol::Kind::Heartbeat);
  CHECK(protocol::parse(protocol::ack("x")).kind == protocol::Kind::Ack);
  CHECK_ERRC(protocol::parse("not json"), Errc::ProtocolViolation);
  CHECK_ERRC(protocol::parse(R"({"kind":"HELLO","worker_id":"w"})"), Errc::ProtocolViolation);
  CHECK_ERRC(protocol::parse(R"({"kind":"HELLO","worker_id":"w","slots":0})"), Errc::ProtocolViolation);
  CHECK_ERRC(protocol::parse(R"({"kind":"RESULT","id":"x"})"), Errc::ProtocolViolation);
  CHECK_ERRC(protocol::parse(R"({"kind":"SHOUT"})"), Errc::ProtocolViolation);
  CHECK_ERRC(protocol::parse("[]"), Errc::ProtocolViolation);
}

TEST_CASE("host:port parsing") {
  auto hp = parse_host_port("127.0.0.1:8080");
  CHECK(hp.host == "127.0.0.1");
  CHECK(hp.port == 8080);
  CHECK_ERRC(parse_host_port("localhost"), Errc::InvalidParams);
  CHECK_ERRC(parse_host_port("h:99999"), Errc::InvalidParams);
  CHECK_ERRC(parse_host_port("h:8x"), Errc::InvalidParams);
}

TEST_CASE("coordinator with two workers records each result once") {
  TempDir dir;
  auto m = make_batch(dir.path(), 10);
  Coordinator c(m, {{"127.0.0.1", 0}, 10s, dir / "manifest.jsonl"});
  c.start();
  REQUIRE(c.port() != 0);
  std::vector<int> codes(2, -1);
  std::vector<std::thread> workers;
  for (int i = 0; i < 2; ++i)
    workers.emplace_back([&, i] {
      WorkerOptions w;
      w.coordinator = {"127.0.0.1", c.port()};
      w.worker_id = "w" + std::to_string(i);
      w.slots = 2;
      codes[i] = run_worker(w);
    });
  const auto stats = c.wait();
  for (auto& w : workers) w.join();
  CHECK(codes == std::vector<int>{0, 0});
  CHECK(stats.sample_count == 10);
  const auto snap = c.snapshot();
  CHECK(snap.finished);
  CHECK(snap.duplicate_results == 0);
  for (const auto& t : snap.tasks) {
    CHECK(t.status == TaskStatus::Done);
    CHECK(snap.results_recorded.at(t.id) == 1);
    CHECK(read_file(m.resolve(t.output_path)) == direct_output(m, t));
  }
  for (const auto& [id, n] : snap.max_running_by_worker) CHECK(n <= 2);
  const auto saved = TaskManifest::load(dir / "manifest.jsonl");
  for (const auto& t : saved.tasks) CHECK(t.status == TaskStatus::Done);
}

TEST_CASE("a worker never holds more tasks than its slots") {
  TempDir dir;
  auto m = make_batch(dir.path(), 5);
  Coordinator c(m, {{"127.0.0.1", 0}, 10s, std::nullopt});
  c.start();
  std::thread worker([&] {
    WorkerOptions w;
    w.coordinator = {"127.0.0.1", c.port()};
    w.worker_id = "solo";
    w.slots = 2;
    run_worker(w);
  });
  c.wait();
  worker.join();
  const auto snap = c.snapshot();
  CHECK(snap.max_running_by_worker.at("solo") <= 2);
  CHECK(snap.max_running_by_worker.at("solo") >= 1);
}

TEST_CASE("a crashed worker's task is completed by the survivor") {
  TempDir dir;
  auto m = make_batch(dir.path(), 8);
  Coordinator c(m, {{"127.0.0.1", 0}, 10s, std::nullopt});
  c.start();
  int crashed_code = -1, healthy_code = -1;
  std::thread crasher([&] {
    WorkerOptions w;
    w.coordinator = {"127.0.0.1", c.port()};
    w.worker_id = "crasher";
    w.crash_after_tasks = 1;
    w.connect_retries = 0;
    crashed_code = run_worker(w);
  });
  crasher.join();  // holds one task when it drops
  std::thread healthy([&] {
    WorkerOptions w;
    w.coordinator = {"127.0.0.1", c.port()};
    w.worker_id = "healthy";
    healthy_code = run_worker(w);
  });
  c.wait();
  healthy.join();
  CHECK(crashed_code == kWorkerExitInjectedFault);
  CHECK(healthy_code == kWorkerExitOk);
  const auto snap = c.snapshot();
  CHECK(snap.reassignments >= 1);
  for (const auto& t : snap.tasks) {
    CHECK(t.status == TaskStatus::Done);
    CHECK(t.worker_id == "healthy");
    CHECK(snap.results_recorded.at(t.id) == 1);
  }
}

TEST_CASE("a silent worker is dropped after the heartbeat timeout") {
  TempDir dir;
  auto m = make_batch(dir.path(), 4);
  Coordinator c(m, {{"127.0.0.1", 0}, 600ms, std::nullopt});
  c.start();
  int stalled_code = -1;
  std::thread stalled([&] {
    WorkerOptions w;
    w.coordinator = {"127.0.0.1", c.port()};
    w.worker_id = "stalled";
    w.heartbeat_interval = 100ms;
    w.stall_after_tasks = 1;
    w.connect_retries = 0;
    stalled_code = run_worker(w);
  });
  std::this_thread::sleep_for(200ms);
  std::thread healthy([&] {
    WorkerOptions w;
    w.coordinator = {"127.0.0.1", c.port()};
    w.worker_id = "healthy";
    w.heartbeat_interval = 100ms;
    run_worker(w);
  });
  c.wait();
  healthy.join();
  stalled.join();
  CHECK(stalled_code == kWorkerExitInjectedFault);
  const auto snap = c.snapshot();
  CHECK(snap.reassignments >= 1);
  for (const auto& t : snap.tasks) {
    CHECK(t.status == TaskStatus::Done);
    CHECK(snap.results_recorded.at(t.id) == 1);
  }
}

TEST_CASE("heartbeats keep a busy worker alive") {
  TempDir dir;
  PlanSynthParams p;
  p.style = PlanStyle::OpenPlan;
  p.furniture_density = 0.0;
  p.width = p.height = 80;
  auto m = generate_batch(p, 1, dir.path(), {{FieldKind::SpatialConnectivity}, 1.0, 1});
  Coordinator c(m, {{"127.0.0.1", 0}, 500ms, std::nullopt});
  c.start();
  std::thread worker([&] {
    WorkerOptions w;
    w.coordinator = {"127.0.0.1", c.port()};
    w.heartbeat_interval = 100ms;
    run_worker(w);
  });
  const auto stats = c.wait();
  worker.join();
  const auto snap = c.snapshot();
  CHECK(snap.reassignments == 0);
  CHECK(stats.sample_count == 1);
  // Only meaningful if the task outlived the timeout.
  CHECK(stats.wall_seconds > 0.5);
}

TEST_CASE("duplicate RESULT messages are acknowledged but not recorded") {
  TempDir dir;
  auto m = make_batch(dir.path(), 2);
  Coordinator c(m, {{"127.0.0.1", 0}, 10s, std::nullopt});
  c.start();
  auto sock = Socket::connect({"127.0.0.1", c.port()});
  REQUIRE(sock.send_line(protocol::hello("raw", 1)));
  std::string line;
  REQUIRE(sock.read_line(line, 5s) == Socket::ReadStatus::Line);
  auto msg = protocol::parse(line);
  REQUIRE(msg.kind == protocol::Kind::Task);
  const Task t = task_from_json(msg.body["task"]);
  execute_task(t);
  REQUIRE(sock.send_line(protocol::result(t.id, 0.25, true, "")));
  REQUIRE(sock.send_line(protocol::result(t.id, 99.0, true, "")));
  int acks = 0;
  while (acks < 2) {
    REQUIRE(sock.read_line(line, 5s) == Socket::ReadStatus::Line);
    msg = protocol::parse(line);
    if (msg.kind == protocol::Kind::Ack) {
      CHECK(msg.body["id"] == t.id);
      ++acks;
    } else {
      REQUIRE(msg.kind == protocol::Kind::Task);
      const Task next = task_from_json(msg.body["task"]);
      execute_task(next);
      REQUIRE(sock.send_line(protocol::result(next.id, 0.5, true, "")));
    }
  }
  const auto stats = c.wait();
  const auto snap = c.snapshot();
  CHECK(snap.duplicate_results == 1);
  CHECK(snap.results_recorded.at(t.id) == 1);
  CHECK(stats.total_cpu_seconds == 0.75);
  for (const auto& task : snap.tasks)
    if (task.id == t.id) CHECK(task.cpu_seconds == 0.25);
}

TEST_CASE("protocol violations drop the connection") {
  TempDir dir;
  auto m = make_batch(dir.path(), 1);
  Coordinator c(m, {{"127.0.0.1", 0}, 10s, std::nullopt});
  c.start();
  {
    auto bad = Socket::connect({"127.0.0.1", c.port()});
    REQUIRE(bad.send_line("{\"kind\":\"RESULT\",\"id\":\"x\",\"cpu_seconds\":1,\"ok\":true}"));
    std::string line;
    CHECK(bad.read_line(line, 5s) == Socket::ReadStatus::Closed);
  }
  std::thread worker([&] {
    WorkerOptions w;
    w.coordinator = {"127.0.0.1", c.port()};
    run_worker(w);
  });
  c.wait();
  worker.join();
  CHECK(c.snapshot().protocol_violations == 1);
}

TEST_CASE("an unreachable coordinator makes the worker give up") {
  WorkerOptions w;
  w.coordinator = {"127.0.0.1", unused_port()};
  w.connect_retries = 2;
  w.backoff_initial = 10ms;
  CHECK(run_worker(w) == kWorkerExitFailure);
}

}  // TEST_SUITE
