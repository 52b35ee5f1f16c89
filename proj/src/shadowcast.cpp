#include <algorithm>
#include <cstdint>
#include <vector>

#include "viscon/visual_connectivity.hpp"

namespace viscon {
namespace {

struct Slope {
  std::int64_t num;
  std::int64_t den;  // > 0
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

// One quadrant of the scan. Rows advance away from the origin along `depth`;
// `col` runs across the row, slopes are col / depth. A wall square shadows the
// open slope interval between its extreme corners, so what stays lit is a union
// of closed windows, possibly single slopes where two shadows meet at a corner.
// A floor cell is lit when its centre slope lies in a window, which is exactly
// the open-segment rule and therefore symmetric.
class QuadrantScan {
 public:
  QuadrantScan(const OccupancyGrid& grid, Cell origin, int quadrant, std::vector<std::uint8_t>& seen)
      : grid_(grid), origin_(origin), quadrant_(quadrant), seen_(seen) {
    max_depth_ = std::max(grid.width(), grid.height());
  }

  void run() { scan(1, {-1, 1}, {1, 1}); }

 private:
  Cell transform(std::int64_t depth, std::int64_t col) const {
    const int d = static_cast<int>(depth), c = static_cast<int>(col);
    switch (quadrant_) {
      case 0: return {origin_.x + c, origin_.y - d};  // north
      case 1: return {origin_.x + d, origin_.y + c};  // east
      case 2: return {origin_.x + c, origin_.y + d};  // south
      default: return {origin_.x - d, origin_.y + c};  // west
    }
  }

  bool is_wall(std::int64_t depth, std::int64_t col) const {
    return !grid_.is_free(transform(depth, col));
  }

  static bool less(Slope a, Slope b) { return a.num * b.den < b.num * a.den; }
  static bool less_eq(Slope a, Slope b) { return a.num * b.den <= b.num * a.den; }

  // Window [start, end] is closed.
  void scan(std::int64_t depth, Slope start, Slope end) {
    if (depth > max_depth_) return;
    const std::int64_t lo_col = std::max(-depth, floor_div(depth * start.num, start.den) - 1);
    const std::int64_t hi_col = std::min(depth, ceil_div(depth * end.num, end.den) + 1);
    Slope open_from = start;
    for (std::int64_t col = lo_col; col <= hi_col; ++col) {
      const Slope centre{col, depth};
      const bool wall = is_wall(depth, col);
      if (!wall) {
        if (less_eq(start, centre) && less_eq(centre, end)) seen_[grid_.index(transform(depth, col))] = 1;
        continue;
      }
      // Corner slopes in doubled coordinates: near side 2d-1, far side 2d+1.
      const Slope shadow_lo{2 * col - 1, 2 * depth + (col > 0 ? 1 : -1)};
      const Slope shadow_hi{2 * col + 1, 2 * depth + (col < 0 ? 1 : -1)};
      if (!less(open_from, shadow_hi)) continue;  // already past this shadow
      if (less_eq(open_from, shadow_lo)) {
        const Slope piece_end = less(end, shadow_lo) ? end : shadow_lo;
        if (less_eq(open_from, piece_end)) scan(depth + 1, open_from, piece_end);
      }
      open_from = shadow_hi;
    }
    if (less_eq(open_from, end)) scan(depth + 1, open_from, end);
  }

  const OccupancyGrid& grid_;
  Cell origin_;
  int quadrant_;
  std::vector<std::uint8_t>& seen_;
  std::int64_t max_depth_ = 0;
};

}  // namespace

VisibilitySet visible_set_shadowcast(const OccupancyGrid& grid, Cell origin) {
  if (!grid.in_bounds(origin)) throw Error(Errc::OutOfBounds, "origin outside the grid");
  if (!grid.is_free(origin)) throw Error(Errc::BlockedCell, "origin cell is blocked");
  std::vector<std::uint8_t> seen(grid.size(), 0);
  for (int q = 0; q < 4; ++q) QuadrantScan(grid, origin, q, seen).run();
  VisibilitySet out;
  out.origin = grid.index(origin);
  seen[out.origin] = 0;
  for (CellIndex i = 0; i < grid.size(); ++i)
    if (seen[i]) out.visible.push_back(i);
  return out;
}

}  // namespace viscon
