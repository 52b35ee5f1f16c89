#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "viscon/plan_grid.hpp"

namespace viscon::farm {

enum class TaskStatus { Pending, Running, Done, Failed };

std::string_view task_status_name(TaskStatus status) noexcept;
TaskStatus parse_task_status(std::string_view name);

struct Task {
  std::string id;
  std::string input_path;
  FieldKind analysis = FieldKind::SpatialConnectivity;
  double cell_size = 1.0;
  std::string output_path;
  TaskStatus status = TaskStatus::Pending;
  double cpu_seconds = 0.0;
  std::string worker_id;
  std::string message;  // failure reason, omitted when empty
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();  // unknown fields, preserved
};

nlohmann::ordered_json task_to_json(const Task& task);
Task task_from_json(const nlohmann::ordered_json& j);  // throws Error(ManifestIo)

// JSON Lines list of tasks. Relative paths resolve against base_dir.
struct TaskManifest {
  std::vector<Task> tasks;
  std::filesystem::path base_dir;

  static TaskManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string to_jsonl() const;

  std::filesystem::path resolve(const std::string& p) const;
  Task* find(std::string_view id);
  void check_unique_ids() const;  // throws Error(DuplicateIds)
};


// Loads the plan, prunes it to its largest component, runs the analysis single
// threaded and writes the output atomically (.f32 sidecar or remapped .pgm).
// Returns the CPU seconds consumed by the calling thread.
double execute_task(const Task& task, const TaskManifest& manifest);
double execute_task(const Task& resolved_task);  // paths already absolute

bool output_exists(const Task& task, const TaskManifest& manifest);

double thread_cpu_seconds();

}  // namespace viscon::farm
