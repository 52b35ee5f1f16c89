#include <algorithm>
#include <cstdint>
#include <cstdlib>

#include "viscon/visual_connectivity.hpp"

namespace viscon {
namespace {

// Floor/ceil of a / b for a >= 0, b > 0.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a / b; }
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

// Works in doubled coordinates: cell (x, y) spans (2x, 2x+2) x (2y, 2y+2) and
// its centre sits at (2x+1, 2y+1), so every boundary test is integer-exact.
bool line_of_sight(const OccupancyGrid& grid, Cell from, Cell to) {
  const std::int64_t px = 2 * from.x + 1, py = 2 * from.y + 1;
  const std::int64_t qx = 2 * to.x + 1, qy = 2 * to.y + 1;
  const std::int64_t dx = qx - px, dy = qy - py;

  if (dx == 0) {
    for (int y = std::min(from.y, to.y); y <= std::max(from.y, to.y); ++y)
      if (!grid.is_free(Cell{from.x, y})) return false;
    return true;
  }
  if (dy == 0) {
    for (int x = std::min(from.x, to.x); x <= std::max(from.x, to.x); ++x)
      if (!grid.is_free(Cell{x, from.y})) return false;
    return true;
  }

  const std::int64_t xmin = std::min(px, qx), xmax = std::max(px, qx);
  const std::int64_t scale = std::abs(dx);
  const std::int64_t dir = dx > 0 ? dy : -dy;  // dy * sign(dx)
  // y(x) * scale, exact.
  auto y_scaled = [&](std::int64_t x) { return py * scale + (x - px) * dir; };

  for (int col = std::min(from.x, to.x); col <= std::max(from.x, to.x); ++col) {
    const std::int64_t a = std::max<std::int64_t>(2 * col, xmin);
    const std::int64_t b = std::min<std::int64_t>(2 * col + 2, xmax);
    const std::int64_t ya = y_scaled(a), yb = y_scaled(b);
    const std::int64_t lo = std::min(ya, yb), hi = std::max(ya, yb);
    // Rows whose open span (2j, 2j+2) overlaps the open range (lo, hi) / scale.
    const std::int64_t jmin = floor_div(lo, 2 * scale);
    const std::int64_t jmax = ceil_div(hi, 2 * scale) - 1;
    for (std::int64_t j = jmin; j <= jmax; ++j)
      if (!grid.is_free(Cell{col, static_cast<int>(j)})) return false;
  }
  return true;
}

VisibilitySet visible_set_exact(const OccupancyGrid& grid, Cell origin) {
  if (!grid.in_bounds(origin)) throw Error(Errc::OutOfBounds, "origin outside the grid");
  if (!grid.is_free(origin)) throw Error(Errc::BlockedCell, "origin cell is blocked");
  VisibilitySet out;
  out.origin = grid.index(origin);
  for (CellIndex i = 0; i < grid.size(); ++i) {
    if (i == out.origin || !grid.is_free(i)) continue;
    if (line_of_sight(grid, origin, grid.cell(i))) out.visible.push_back(i);
  }
  return out;
}

}  // namespace viscon
