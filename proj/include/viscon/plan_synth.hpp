#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "viscon/farm/task.hpp"
#include "viscon/plan_grid.hpp"

namespace viscon {

enum class PlanStyle { Corridors, OpenPlan };

PlanStyle parse_plan_style(std::string_view name);  // "corridors" | "open"
std::string_view plan_style_name(PlanStyle style) noexcept;

struct IntRange {
  int min = 0;
  int max = 0;
};

struct PlanSynthParams {
  int width = 100;
  int height = 100;
  PlanStyle style = PlanStyle::Corridors;
  std::uint64_t seed = 0;
  IntRange room_count{4, 8};
  IntRange corridor_width{2, 3};
  // Fraction of free interior area taken by furniture. Open plans also spend it
  // on partial partitions; corridor plans furnish their rooms with it.
  double furniture_density = 0.15;
  int door_width = 2;
  int wall_thickness = 1;
  int retry_budget = 32;

  void validate() const;  // throws Error(InvalidParams)
};

// Deterministic in params (including seed). The result is already reduced to
// its largest free component and keeps a blocked perimeter ring.
OccupancyGrid generate_plan(const PlanSynthParams& params);

struct BatchOptions {
  std::vector<FieldKind> analyses{FieldKind::SpatialConnectivity, FieldKind::VisualConnectivity};
  double cell_size = 1.0;
  unsigned threads = 0;
};

// Writes plan_{index:05}.pgm (seed = params.seed + index) and, when count > 0,
// manifest.jsonl with one PENDING task per plan and analysis.
farm::TaskManifest generate_batch(const PlanSynthParams& params, std::size_t count,
                                  const std::filesystem::path& out_dir, const BatchOptions& options = {});

std::string plan_file_name(std::size_t index);

}  // namespace viscon
