#pragma once

#include <filesystem>

#include "viscon/plan_grid.hpp"
#include "viscon/visual_connectivity.hpp"

namespace viscon {

struct AnalysisOptions {
  VisibilityBackend visibility = VisibilityBackend::Shadowcast;
  unsigned threads = 0;
};

// Runs one analysis on an already-pruned grid.
AnalysisField run_analysis(const OccupancyGrid& grid, FieldKind kind, const AnalysisOptions& options = {});

struct PlanAnalysis {
  OccupancyGrid pruned;
  AnalysisField field;
};

// Prunes to the largest component first, then analyses.
PlanAnalysis analyze_plan(const OccupancyGrid& plan, FieldKind kind, const AnalysisOptions& options = {});

// `.f32` paths get the raw sidecar; anything else a grayscale PGM remapped
// with the kind's default direction.
void write_field_output(const AnalysisField& field, const OccupancyGrid& grid,
                        const std::filesystem::path& path);

}  // namespace viscon
