#include <algorithm>
#include <array>
#include <bit>
#include <memory>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "viscon/parallel.hpp"
#include "viscon/spatial_connectivity.hpp"

namespace viscon {

std::vector<GridEdge> grid_neighbors(const OccupancyGrid& grid, Cell cell) {
  if (!grid.in_bounds(cell)) throw Error(Errc::OutOfBounds, "cell outside the grid");
  if (!grid.is_free(cell)) throw Error(Errc::BlockedCell, "cell is blocked");
  std::vector<GridEdge> edges;
  const CellIndex from = grid.index(cell);
  for_each_walkable_neighbor(grid, cell, [&](Cell n, bool diagonal) {
    edges.push_back({from, grid.index(n), diagonal ? grid.cell_size() * kSqrt2 : grid.cell_size()});
  });
  return edges;
}

namespace {

// Free cells on a grid padded with a blocked ring, each with a bit mask of
// walkable directions (bits 0-3 orthogonal, 4-7 diagonal).
struct WalkGraph {
  int padded_width = 0;
  std::vector<std::uint8_t> moves;         // padded index -> direction mask
  std::vector<std::uint32_t> padded_of;    // compact -> padded index
  std::vector<std::uint32_t> compact_at;   // padded index -> compact
  std::vector<CellIndex> cell_of;          // compact -> grid index
  std::vector<std::int32_t> compact_of;    // grid index -> compact, -1 if blocked
  std::array<std::int32_t, 8> step{};

  explicit WalkGraph(const OccupancyGrid& grid) : compact_of(grid.size(), -1) {
    padded_width = grid.width() + 2;
    moves.assign(static_cast<std::size_t>(padded_width) * (grid.height() + 2), 0);
    compact_at.assign(moves.size(), 0);
    const std::array<Cell, 8> dirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
    for (int d = 0; d < 8; ++d) step[d] = dirs[d].y * padded_width + dirs[d].x;
    for (CellIndex i = 0; i < grid.size(); ++i) {
      if (!grid.is_free(i)) continue;
      const Cell c = grid.cell(i);
      const auto p = static_cast<std::uint32_t>((c.y + 1) * padded_width + c.x + 1);
      compact_of[i] = static_cast<std::int32_t>(cell_of.size());
      cell_of.push_back(i);
      padded_of.push_back(p);
      compact_at[p] = static_cast<std::uint32_t>(cell_of.size() - 1);
      std::uint8_t mask = 0;
      for_each_walkable_neighbor(grid, c, [&](Cell n, bool) {
        for (int d = 0; d < 8; ++d)
          if (c.x + dirs[d].x == n.x && c.y + dirs[d].y == n.y) mask |= static_cast<std::uint8_t>(1u << d);
      });
      moves[p] = mask;
    }
  }

  std::size_t size() const noexcept { return cell_of.size(); }
};

// Single-source shortest paths with step weights 1 and sqrt(2). Each distance
// is held exactly as (orthogonal steps, diagonal steps), so the reported value
// never depends on relaxation order. Buckets of width 1 (the lightest edge)
// make every node in the lowest bucket final when it is popped.
class DialSearch {
 public:
  explicit DialSearch(const WalkGraph& g)
      : graph_(g), orth_(g.moves.size()), diag_(g.moves.size()), dist_(g.moves.size()), key_(g.moves.size()) {
    // Every push is a strict improvement through one edge, so 8 per node bounds each bucket.
    for (auto& b : buckets_) b.resize(8 * g.size() + 1);
  }

  // Expands nodes in distance order from `source` (a padded index) and calls
  // settle(compact, orth, diag) for each one whose compact index is at least
  // `first`, stopping once all of those are settled. Returns how many of them
  // were left unreachable.
  template <class Settle>
  std::size_t run(std::uint32_t source, std::uint32_t first, Settle&& settle) {
    std::size_t remaining = graph_.size() - first;
    std::fill(orth_.begin(), orth_.end(), 0);
    std::fill(diag_.begin(), diag_.end(), 0);
    std::fill(dist_.begin(), dist_.end(), std::numeric_limits<double>::infinity());
    sizes_.fill(0);
    dist_[source] = 0.0;
    key_[source] = 0;
    buckets_[0][sizes_[0]++] = source;
    for (std::uint32_t key = 0; remaining > 0; ++key) {
      const std::size_t cur = key % kBuckets;
      std::uint32_t* bucket = buckets_[cur].data();
      // Nodes pushed into this bucket while draining it are re-read by index.
      for (std::size_t k = 0; k < sizes_[cur]; ++k) {
        const std::uint32_t u = bucket[k];
        // Stale copies: the node moved to a lower key or was already expanded.
        if (key_[u] != key) continue;
        key_[u] = kExpanded;
        const std::int32_t ou = orth_[u], du = diag_[u];
        const std::uint32_t c = graph_.compact_at[u];
        if (c >= first) {
          settle(c, ou, du);
          if (--remaining == 0) break;
        }
        // A settled neighbour is never farther than u plus a step, so the
        // distance test alone rejects it.
        for (unsigned m = graph_.moves[u]; m != 0; m &= m - 1) {
          const int d = std::countr_zero(m);
          const std::uint32_t v = u + static_cast<std::uint32_t>(graph_.step[d]);
          const bool diagonal = d >= 4;
          const std::int32_t a = diagonal ? ou : ou + 1;
          const std::int32_t b = diagonal ? du + 1 : du;
          const double cand = value(a, b);
          if (cand < dist_[v]) {
            orth_[v] = a;
            diag_[v] = b;
            dist_[v] = cand;
            const auto k2 = static_cast<std::uint32_t>(cand);  // floor for non-negative values
            key_[v] = k2;
            const std::size_t slot = k2 % kBuckets;
            buckets_[slot][sizes_[slot]++] = v;
          }
        }
      }
      sizes_[cur] = 0;
      if ((sizes_[0] | sizes_[1] | sizes_[2] | sizes_[3]) == 0) break;
    }
    return remaining;
  }

  static double value(std::int32_t orth, std::int32_t diag) noexcept {
    return static_cast<double>(orth) + static_cast<double>(diag) * kSqrt2;
  }

  const std::vector<std::int32_t>& orth() const noexcept { return orth_; }
  const std::vector<std::int32_t>& diag() const noexcept { return diag_; }
  const std::vector<double>& dist() const noexcept { return dist_; }

 private:
  static constexpr std::size_t kBuckets = 4;  // keys span at most floor(d) .. floor(d) + 2
  static constexpr std::uint32_t kExpanded = ~0u;

  const WalkGraph& graph_;
  std::vector<std::int32_t> orth_;  // zero where unreached, so row sums need no mask
  std::vector<std::int32_t> diag_;
  std::vector<double> dist_;
  std::vector<std::uint32_t> key_;
  std::array<std::vector<std::uint32_t>, kBuckets> buckets_;
  std::array<std::size_t, kBuckets> sizes_{};
};

}  // namespace

std::vector<double> geodesic_distances(const OccupancyGrid& grid, Cell source) {
  if (!grid.in_bounds(source)) throw Error(Errc::OutOfBounds, "source outside the grid");
  if (!grid.is_free(source)) throw Error(Errc::BlockedCell, "source cell is blocked");
  WalkGraph graph(grid);
  DialSearch search(graph);
  std::vector<double> out(grid.size(), std::numeric_limits<double>::infinity());
  search.run(graph.padded_of[static_cast<std::size_t>(graph.compact_of[grid.index(source)])], 0,
             [&](std::uint32_t c, std::int32_t orth, std::int32_t diag) {
               out[graph.cell_of[c]] = DialSearch::value(orth, diag) * grid.cell_size();
             });
  return out;
}

AnalysisField spatial_connectivity_field(const OccupancyGrid& grid, SpatialOptions options) {
  WalkGraph graph(grid);
  const std::size_t n = graph.size();
  if (n == 0) throw Error(Errc::NoFreeCells, "grid has no free cells");
  AnalysisField field(grid, FieldKind::SpatialConnectivity);
  if (n == 1) return field;

  // Distances are symmetric: the search from s only has to settle cells after
  // s in compact order and credits each distance to both row sums. Step counts
  // are integers, so the totals do not depend on scheduling.
  struct Sums {
    std::vector<std::int64_t> orth, diag;
  };
  const unsigned threads = resolve_threads(options.threads);
  std::vector<std::unique_ptr<DialSearch>> searches(threads);
  std::vector<Sums> sums(threads);
  parallel_chunks(n - 1, threads, 16, [&](unsigned worker, std::size_t begin, std::size_t end) {
    if (!searches[worker]) {
      searches[worker] = std::make_unique<DialSearch>(graph);
      sums[worker] = {std::vector<std::int64_t>(n, 0), std::vector<std::int64_t>(n, 0)};
    }
    DialSearch& search = *searches[worker];
    Sums& acc = sums[worker];
    for (std::size_t s = begin; s < end; ++s) {
      const auto unreached = search.run(graph.padded_of[s], static_cast<std::uint32_t>(s + 1),
                                        [&](std::uint32_t c, std::int32_t orth, std::int32_t diag) {
                                          acc.orth[c] += orth;
                                          acc.diag[c] += diag;
                                          acc.orth[s] += orth;
                                          acc.diag[s] += diag;
                                        });
      if (unreached != 0) {
        const Cell c = grid.cell(graph.cell_of[s]);
        throw Error(Errc::UnreachableCell, "free cells unreachable from (" + std::to_string(c.x) +
                                               "," + std::to_string(c.y) +
                                               "); prune with largest_component first");
      }
    }
  });
  for (std::size_t s = 0; s < n; ++s) {
    std::int64_t orth = 0, diag = 0;
    for (const Sums& acc : sums) {
      if (acc.orth.empty()) continue;
      orth += acc.orth[s];
      diag += acc.diag[s];
    }
    const double total = static_cast<double>(orth) + static_cast<double>(diag) * kSqrt2;
    field.values[graph.cell_of[s]] = total / static_cast<double>(n - 1) * grid.cell_size();
  }
  return field;
}

}  // namespace viscon
