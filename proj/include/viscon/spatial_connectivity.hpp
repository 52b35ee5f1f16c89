#pragma once

#include <vector>

#include "viscon/plan_grid.hpp"

namespace viscon {

struct GridEdge {
  CellIndex from;
  CellIndex to;
  double weight;  // metres
};

inline constexpr double kSqrt2 = 1.41421356237309504880;

// Walkable edges out of a free cell (no corner cutting).
std::vector<GridEdge> grid_neighbors(const OccupancyGrid& grid, Cell cell);

// Shortest walking distance from `source` to every cell; +inf for blocked or
// unreachable cells.
std::vector<double> geodesic_distances(const OccupancyGrid& grid, Cell source);

struct SpatialOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
};

// Mean geodesic distance from each free cell to every other free cell.
// Requires a single connected free region (prune with largest_component).
AnalysisField spatial_connectivity_field(const OccupancyGrid& grid, SpatialOptions options = {});

}  // namespace viscon
