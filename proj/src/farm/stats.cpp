#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "viscon/farm/stats.hpp"

namespace viscon::farm {

FarmStats stats_from_totals(std::size_t samples, double cpu_seconds, double wall_seconds) {
  if (!(wall_seconds > 0.0)) throw Error(Errc::InvalidParams, "wall time must be positive");
  return {samples, cpu_seconds, wall_seconds, cpu_seconds / wall_seconds};
}

FarmStats compute_stats(std::span<const Task> tasks, double wall_seconds) {
  std::size_t samples = 0;
  double cpu = 0.0;
  for (const Task& t : tasks) {
    if (t.status != TaskStatus::Done) continue;
    ++samples;
    cpu += t.cpu_seconds;
  }
  if (samples == 0) throw Error(Errc::EmptyTaskList, "no completed tasks to account");
  return stats_from_totals(samples, cpu, wall_seconds);
}

std::string format_duration(double seconds, bool include_days) {
  auto total = static_cast<long long>(std::llround(std::max(0.0, seconds)));
  const long long s = total % 60;
  total /= 60;
  const long long m = total % 60;
  total /= 60;
  char buf[48];
  if (include_days) {
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld:%02lld", total / 24, total % 24, m, s);
  } else {
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", total, m, s);
  }
  return buf;
}

double parse_duration(std::string_view text) {
  std::vector<long long> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ':') {
      parts.push_back(cur.empty() ? -1 : std::stoll(cur));
      cur.clear();
    } else if (ch >= '0' && ch <= '9') {
      cur += ch;
    } else {
      throw Error(Errc::InvalidParams, "bad duration '" + std::string(text) + "'");
    }
  }
  parts.push_back(cur.empty() ? -1 : std::stoll(cur));
  if (parts.size() < 3 || parts.size() > 4) throw Error(Errc::InvalidParams, "bad duration '" + std::string(text) + "'");
  for (long long p : parts)
    if (p < 0) throw Error(Errc::InvalidParams, "bad duration '" + std::string(text) + "'");
  const std::size_t k = parts.size();
  double days = k == 4 ? static_cast<double>(parts[0]) : 0.0;
  return days * 86400.0 + parts[k - 3] * 3600.0 + parts[k - 2] * 60.0 + parts[k - 1];
}

std::string format_stats_table(const FarmStats& stats, std::string_view label) {
  char speed[32];
  std::snprintf(speed, sizeof speed, "%.2f", stats.speedup);
  std::ostringstream os;
  os << "Dataset                            " << label << '\n'
     << "No. of samples                     " << stats.sample_count << '\n'
     << "Total CPU time [dd:hh:mm:ss]       " << format_duration(stats.total_cpu_seconds) << '\n'
     << "Actual Evaluation Time [dd:hh:mm:ss] " << format_duration(stats.wall_seconds) << '\n'
     << "Speed-up                           " << speed << '\n';
  return os.str();
}

nlohmann::json stats_to_json(const FarmStats& stats) {
  return {{"sample_count", stats.sample_count},
          {"total_cpu_seconds", stats.total_cpu_seconds},
          {"wall_seconds", stats.wall_seconds},
          {"speedup", stats.speedup},
          {"total_cpu", format_duration(stats.total_cpu_seconds)},
          {"wall", format_duration(stats.wall_seconds)}};
}

}  // namespace viscon::farm
