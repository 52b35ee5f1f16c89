#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>
#include <vector>

#include "viscon/farm/local.hpp"

namespace viscon::farm {

FarmStats run_local(TaskManifest& manifest, const LocalOptions& options) {
  if (options.workers == 0) throw Error(Errc::InvalidParams, "workers must be positive");
  manifest.check_unique_ids();

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < manifest.tasks.size(); ++i) {
    const Task& t = manifest.tasks[i];
    if (t.status == TaskStatus::Done && output_exists(t, manifest)) continue;
    todo.push_back(i);
  }

  const auto wall_start = std::chrono::steady_clock::now();
  std::mutex table_mutex;
  std::atomic<std::size_t> next{0};
  std::size_t executed = 0;
  double cpu_total = 0.0;

  auto worker = [&](unsigned slot) {
    const std::string worker_id = "local-" + std::to_string(slot);
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) break;
      Task snapshot;
      {
        std::lock_guard lock(table_mutex);
        Task& t = manifest.tasks[todo[k]];
        t.status = TaskStatus::Running;
        t.worker_id = worker_id;
        t.message.clear();
        snapshot = t;
      }
      double cpu = 0.0;
      std::string failure;
      try {
        cpu = execute_task(snapshot, manifest);
      } catch (const std::exception& e) {
        failure = e.what();
      }
      std::lock_guard lock(table_mutex);
      Task& t = manifest.tasks[todo[k]];
      if (failure.empty()) {
        t.status = TaskStatus::Done;
        t.cpu_seconds = cpu;
        ++executed;
        cpu_total += cpu;
      } else {
        t.status = TaskStatus::Failed;
        t.message = failure;
      }
      if (options.persist_path) manifest.save(*options.persist_path);
    }
  };

  {
    const unsigned n = std::min<unsigned>(options.workers, static_cast<unsigned>(std::max<std::size_t>(todo.size(), 1)));
    std::vector<std::jthread> pool;
    for (unsigned s = 1; s < n; ++s) pool.emplace_back(worker, s);
    worker(0);
  }

  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  if (!(wall > 0.0)) wall = 1e-9;
  if (options.persist_path) manifest.save(*options.persist_path);
  return stats_from_totals(executed, cpu_total, wall);
}

FarmStats run_local(const std::filesystem::path& manifest_path, unsigned workers) {
  TaskManifest manifest = TaskManifest::load(manifest_path);
  return run_local(manifest, {workers, manifest_path});
}

}  // namespace viscon::farm
