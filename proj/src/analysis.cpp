#include "viscon/analysis.hpp"

#include "viscon/dataset_kit.hpp"
#include "viscon/spatial_connectivity.hpp"

namespace viscon {

AnalysisField run_analysis(const OccupancyGrid& grid, FieldKind kind, const AnalysisOptions& options) {
  switch (kind) {
    case FieldKind::SpatialConnectivity:
      return spatial_connectivity_field(grid, {options.threads});
    case FieldKind::VisualConnectivity:
      return visual_connectivity_field(grid, {options.visibility, options.threads});
    case FieldKind::VisualMeanDepth:
      return visual_mean_depth_field(grid, {options.visibility, options.threads});
    case FieldKind::Sdf:
      return signed_distance_field(grid);
  }
  throw Error(Errc::InvalidParams, "unknown analysis kind");
}

PlanAnalysis analyze_plan(const OccupancyGrid& plan, FieldKind kind, const AnalysisOptions& options) {
  OccupancyGrid pruned = largest_component(plan);
  AnalysisField field = run_analysis(pruned, kind, options);
  return {std::move(pruned), std::move(field)};
}

void write_field_output(const AnalysisField& field, const OccupancyGrid& grid,
                        const std::filesystem::path& path) {
  if (path.extension() == ".f32") {
    save_field_f32(field, path);
  } else {
    save_gray(remap_to_gray(field, grid, default_direction(field.kind)), path);
  }
}

}  // namespace viscon
