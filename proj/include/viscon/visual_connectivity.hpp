#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "viscon/plan_grid.hpp"

namespace viscon {

enum class VisibilityBackend { Shadowcast, Exact };

VisibilityBackend parse_visibility_backend(std::string_view name);
std::string_view visibility_backend_name(VisibilityBackend backend) noexcept;

struct VisibilitySet {
  CellIndex origin = 0;
  std::vector<CellIndex> visible;  // free cells, ascending, origin excluded
};

// True when the open segment between the two cell centres misses the interior
// of every blocked cell. Touching a blocked cell's edge or corner does not block.
bool line_of_sight(const OccupancyGrid& grid, Cell from, Cell to);

VisibilitySet visible_set_exact(const OccupancyGrid& grid, Cell origin);

// Symmetric recursive shadow-casting over four quadrants with fractional slopes.
VisibilitySet visible_set_shadowcast(const OccupancyGrid& grid, Cell origin);

VisibilitySet visible_set(const OccupancyGrid& grid, Cell origin, VisibilityBackend backend);

struct VisualOptions {
  VisibilityBackend backend = VisibilityBackend::Shadowcast;
  unsigned threads = 0;
};

// Dense adjacency bitsets over free cells (compact numbering in row-major order).
class VisibilityGraph {
 public:
  VisibilityGraph(const OccupancyGrid& grid, VisualOptions options);

  std::size_t node_count() const noexcept { return cell_of_.size(); }
  std::size_t words_per_row() const noexcept { return words_; }
  CellIndex cell_of(std::size_t node) const noexcept { return cell_of_[node]; }
  const std::uint64_t* row(std::size_t node) const noexcept { return bits_.data() + node * words_; }
  bool connected(std::size_t a, std::size_t b) const noexcept {
    return (row(a)[b / 64] >> (b % 64)) & 1u;
  }
  std::size_t degree(std::size_t node) const;

 private:
  std::vector<CellIndex> cell_of_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

// Number of free cells visible from each free cell.
AnalysisField visual_connectivity_field(const OccupancyGrid& grid, VisualOptions options = {});

// Mean step count to every other free cell in the unweighted visibility graph.
AnalysisField visual_mean_depth_field(const OccupancyGrid& grid, VisualOptions options = {});

}  // namespace viscon
