#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "viscon/analysis.hpp"
#include "viscon/farm/task.hpp"

namespace viscon::farm {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view task_status_name(TaskStatus status) noexcept {
  switch (status) {
    case TaskStatus::Pending: return "PENDING";
    case TaskStatus::Running: return "RUNNING";
    case TaskStatus::Done: return "DONE";
    case TaskStatus::Failed: return "FAILED";
  }
  return "PENDING";
}

TaskStatus parse_task_status(std::string_view name) {
  if (name == "PENDING") return TaskStatus::Pending;
  if (name == "RUNNING") return TaskStatus::Running;
  if (name == "DONE") return TaskStatus::Done;
  if (name == "FAILED") return TaskStatus::Failed;
  throw Error(Errc::ManifestIo, "unknown task status '" + std::string(name) + "'");
}

json task_to_json(const Task& task) {
  json j;
  j["id"] = task.id;
  j["input_path"] = task.input_path;
  j["analysis"] = std::string(field_kind_name(task.analysis));
  j["cell_size"] = task.cell_size;
  j["output_path"] = task.output_path;
  j["status"] = std::string(task_status_name(task.status));
  j["cpu_seconds"] = task.cpu_seconds;
  j["worker_id"] = task.worker_id;
  if (!task.message.empty()) j["message"] = task.message;
  for (const auto& [key, value] : task.extra.items()) j[key] = value;
  return j;
}

Task task_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::ManifestIo, "task entry is not a JSON object");
  Task t;
  try {
    t.id = j.at("id").get<std::string>();
    t.input_path = j.at("input_path").get<std::string>();
    t.analysis = parse_field_kind(j.at("analysis").get<std::string>());
    t.cell_size = j.value("cell_size", 1.0);
    t.output_path = j.at("output_path").get<std::string>();
    t.status = parse_task_status(j.value("status", std::string("PENDING")));
    t.cpu_seconds = j.value("cpu_seconds", 0.0);
    t.worker_id = j.value("worker_id", std::string());
    t.message = j.value("message", std::string());
  } catch (const json::exception& e) {
    throw Error(Errc::ManifestIo, std::string("bad task entry: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::ManifestIo, e.what());
  }
  if (t.id.empty()) throw Error(Errc::ManifestIo, "task id is empty");
  static const std::set<std::string> known{"id",     "input_path",  "analysis",  "cell_size", "output_path",
                                           "status", "cpu_seconds", "worker_id", "message"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) t.extra[key] = value;
  return t;
}

TaskManifest TaskManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ManifestIo, "cannot open manifest " + path.string());
  TaskManifest m;
  m.base_dir = fs::absolute(path).parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::ManifestIo, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    m.tasks.push_back(task_from_json(j));
  }
  m.check_unique_ids();
  return m;
}

std::string TaskManifest::to_jsonl() const {
  std::string out;
  for (const Task& t : tasks) {
    out += task_to_json(t).dump();
    out += '\n';
  }
  return out;
}

void TaskManifest::save(const fs::path& path) const {
  const std::string text = to_jsonl();
  try {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  } catch (const Error& e) {
    throw Error(Errc::ManifestIo, e.what());
  }
}

fs::path TaskManifest::resolve(const std::string& p) const {
  fs::path path(p);
  return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
}

Task* TaskManifest::find(std::string_view id) {
  for (Task& t : tasks)
    if (t.id == id) return &t;
  return nullptr;
}

void TaskManifest::check_unique_ids() const {
  std::set<std::string_view> seen;
  for (const Task& t : tasks)
    if (!seen.insert(t.id).second) throw Error(Errc::DuplicateIds, "duplicate task id '" + t.id + "'");
}

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

double execute_task(const Task& task) {
  const double start = thread_cpu_seconds();
  AnalysisOptions options;
  options.threads = 1;
  if (auto it = task.extra.find("visibility"); it != task.extra.end() && it->is_string())
    options.visibility = parse_visibility_backend(it->get<std::string>());
  OccupancyGrid plan = load_occupancy(task.input_path, task.cell_size);
  PlanAnalysis result = analyze_plan(plan, task.analysis, options);
  const fs::path out(task.output_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_field_output(result.field, result.pruned, out);
  return thread_cpu_seconds() - start;
}

double execute_task(const Task& task, const TaskManifest& manifest) {
  Task resolved = task;
  resolved.input_path = manifest.resolve(task.input_path).string();
  resolved.output_path = manifest.resolve(task.output_path).string();
  return execute_task(resolved);
}

bool output_exists(const Task& task, const TaskManifest& manifest) {
  std::error_code ec;
  return fs::is_regular_file(manifest.resolve(task.output_path), ec);
}

}  // namespace viscon::farm
