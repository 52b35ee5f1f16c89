#pragma once

#include <span>
#include <string>
#include <string_view>

#include "json.hpp"
#include "viscon/farm/task.hpp"

namespace viscon::farm {

// Batch accounting: summed per-task CPU time against elapsed wall time.
struct FarmStats {
  std::size_t sample_count = 0;
  double total_cpu_seconds = 0.0;
  double wall_seconds = 0.0;
  double speedup = 0.0;  // total_cpu_seconds / wall_seconds
};

// Counts DONE tasks only. Throws EmptyTaskList when there are none.
FarmStats compute_stats(std::span<const Task> tasks, double wall_seconds);
FarmStats stats_from_totals(std::size_t samples, double cpu_seconds, double wall_seconds);

// "dd:hh:mm:ss" (or "hh:mm:ss" with include_days = false), rounded to whole seconds.
std::string format_duration(double seconds, bool include_days = true);
// Accepts hh:mm:ss or dd:hh:mm:ss.
double parse_duration(std::string_view text);

std::string format_stats_table(const FarmStats& stats, std::string_view label = "batch");
nlohmann::json stats_to_json(const FarmStats& stats);

}  // namespace viscon::farm
