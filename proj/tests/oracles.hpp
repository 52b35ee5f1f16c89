#pragma once

// Brute-force reference implementations. Deliberately naive and independent of
// the library's algorithms: explicit adjacency matrices, Floyd-Warshall,
// rational segment/box clipping, exhaustive nearest-obstacle search.

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "viscon/plan_grid.hpp"

namespace oracle {

using viscon::Cell;
using viscon::OccupancyGrid;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool free_at(const OccupancyGrid& g, int x, int y) {
  return x >= 0 && y >= 0 && x < g.width() && y < g.height() && g.at(Cell{x, y}) == viscon::Occupancy::Free;
}

// Random grid with each cell blocked with probability `density`.
inline OccupancyGrid random_grid(std::mt19937_64& rng, int w, int h, double density, double cell_size = 1.0) {
  std::bernoulli_distribution blocked(density);
  std::vector<viscon::Occupancy> cells(static_cast<std::size_t>(w) * h);
  for (auto& c : cells) c = blocked(rng) ? viscon::Occupancy::Blocked : viscon::Occupancy::Free;
  return OccupancyGrid(w, h, cell_size, std::move(cells));
}

inline OccupancyGrid parse_grid(int w, int h, const char* rows, double cell_size = 1.0) {
  std::vector<viscon::Occupancy> cells;
  for (const char* p = rows; *p; ++p) {
    if (*p == '.') cells.push_back(viscon::Occupancy::Free);
    if (*p == '#') cells.push_back(viscon::Occupancy::Blocked);
  }
  return OccupancyGrid(w, h, cell_size, std::move(cells));
}

// All-pairs walking distances over the full cell set (blocked rows stay +inf).
inline std::vector<std::vector<double>> floyd_warshall(const OccupancyGrid& g) {
  const int w = g.width(), h = g.height();
  const std::size_t n = g.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
  const double cs = g.cell_size();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!free_at(g, x, y)) continue;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      d[i][i] = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (!free_at(g, nx, ny)) continue;
          const bool diagonal = dx != 0 && dy != 0;
          // Corner rule: both cells sharing the corner must be open.
          if (diagonal && !(free_at(g, x + dx, y) && free_at(g, x, y + dy))) continue;
          const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
          d[i][j] = diagonal ? cs * std::sqrt(2.0) : cs;
        }
    }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

// Mean distance to every other free cell; NaN for blocked cells.
inline std::vector<double> spatial_means(const OccupancyGrid& g) {
  const auto d = floyd_warshall(g);
  std::vector<double> out(g.size(), std::nan(""));
  std::size_t free = 0;
  for (std::size_t i = 0; i < g.size(); ++i) free += g.is_free(i);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_free(i)) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (j != i && g.is_free(j)) s += d[i][j];
    out[i] = free > 1 ? s / static_cast<double>(free - 1) : 0.0;
  }
  return out;
}

// Open segment between cell centres against open unit boxes, in exact
// rational arithmetic on doubled coordinates.
inline bool segment_hits_box(Cell a, Cell b, Cell box) {
  const std::int64_t p[2] = {2 * a.x + 1, 2 * a.y + 1};
  const std::int64_t d[2] = {2 * (b.x - a.x), 2 * (b.y - a.y)};
  const std::int64_t lo[2] = {2 * box.x, 2 * box.y};
  const std::int64_t hi[2] = {2 * box.x + 2, 2 * box.y + 2};
  // Running interval (enter_num/enter_den, exit_num/exit_den), open, within (0, 1).
  std::int64_t en = 0, ed = 1, xn = 1, xd = 1;
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0) {
      if (!(p[k] > lo[k] && p[k] < hi[k])) return false;
      continue;
    }
    std::int64_t t0n = lo[k] - p[k], t1n = hi[k] - p[k], den = d[k];
    if (den < 0) {
      den = -den;
      t0n = -t0n;
      t1n = -t1n;
      std::swap(t0n, t1n);
    }
    if (t0n * ed > en * den) {
      en = t0n;
      ed = den;
    }
    if (t1n * xd < xn * den) {
      xn = t1n;
      xd = den;
    }
  }
  return en * xd < xn * ed;
}

inline bool visible(const OccupancyGrid& g, Cell a, Cell b) {
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x)
      if (!free_at(g, x, y) && segment_hits_box(a, b, Cell{x, y})) return false;
  return true;
}

// Visibility matrix over all cells (false for blocked cells and the diagonal).
inline std::vector<std::vector<bool>> visibility_matrix(const OccupancyGrid& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<bool>> m(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (g.is_free(i) && g.is_free(j) && visible(g, g.cell(i), g.cell(j))) m[i][j] = m[j][i] = true;
  return m;
}

inline std::vector<double> visibility_counts(const OccupancyGrid& g) {
  const auto m = visibility_matrix(g);
  std::vector<double> out(g.size(), std::nan(""));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_free(i)) continue;
    std::size_t c = 0;
    for (std::size_t j = 0; j < g.size(); ++j) c += m[i][j];
    out[i] = static_cast<double>(c);
  }
  return out;
}

// Mean BFS depth in the visibility graph; empty vector when it is disconnected.
inline std::vector<double> mean_depths(const OccupancyGrid& g) {
  const auto m = visibility_matrix(g);
  const std::size_t n = g.size();
  std::size_t free = 0;
  for (std::size_t i = 0; i < n; ++i) free += g.is_free(i);
  std::vector<double> out(n, std::nan(""));
  for (std::size_t s = 0; s < n; ++s) {
    if (!g.is_free(s)) continue;
    std::vector<int> depth(n, -1);
    std::queue<std::size_t> q;
    depth[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v)
        if (m[u][v] && depth[v] < 0) {
          depth[v] = depth[u] + 1;
          q.push(v);
        }
    }
    double sum = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (v == s || !g.is_free(v)) continue;
      if (depth[v] < 0) return {};
      sum += depth[v];
    }
    out[s] = free > 1 ? sum / static_cast<double>(free - 1) : 0.0;
  }
  return out;
}

// Distance from each free cell centre to the nearest blocked centre, the ring
// of cells just outside the grid included.
inline std::vector<double> nearest_blocked(const OccupancyGrid& g) {
  const int w = g.width(), h = g.height();
  std::vector<double> out(g.size(), 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!free_at(g, x, y)) continue;
      double best = kInf;
      for (int by = -1; by <= h; ++by)
        for (int bx = -1; bx <= w; ++bx) {
          if (free_at(g, bx, by)) continue;
          const double dx = bx - x, dy = by - y;
          best = std::min(best, std::sqrt(dx * dx + dy * dy));
        }
      out[static_cast<std::size_t>(y) * w + x] = best * g.cell_size();
    }
  return out;
}

// Connected free regions under the walking adjacency, by repeated flood fill
// over the explicit neighbour test. Returns labels (-1 for blocked).
inline std::vector<int> flood_labels(const OccupancyGrid& g, int* count = nullptr) {
  const int w = g.width(), h = g.height();
  std::vector<int> label(g.size(), -1);
  int next = 0;
  for (int sy = 0; sy < h; ++sy)
    for (int sx = 0; sx < w; ++sx) {
      const std::size_t s = static_cast<std::size_t>(sy) * w + sx;
      if (!free_at(g, sx, sy) || label[s] >= 0) continue;
      std::vector<Cell> stack{{sx, sy}};
      label[s] = next;
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = c.x + dx, ny = c.y + dy;
            if ((dx == 0 && dy == 0) || !free_at(g, nx, ny)) continue;
            if (dx != 0 && dy != 0 && !(free_at(g, c.x + dx, c.y) && free_at(g, c.x, c.y + dy))) continue;
            const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
            if (label[ni] < 0) {
              label[ni] = next;
              stack.push_back({nx, ny});
            }
          }
      }
      ++next;
    }
  if (count) *count = next;
  return label;
}

inline int component_count(const OccupancyGrid& g) {
  int n = 0;
  flood_labels(g, &n);
  return n;
}

}  // namespace oracle
