#include <bit>
#include <string>

#include "viscon/kernels.hpp"
#include "viscon/parallel.hpp"
#include "viscon/visual_connectivity.hpp"

namespace viscon {

VisibilityBackend parse_visibility_backend(std::string_view name) {
  if (name == "shadowcast") return VisibilityBackend::Shadowcast;
  if (name == "exact") return VisibilityBackend::Exact;
  throw Error(Errc::InvalidParams, "unknown visibility backend '" + std::string(name) + "'");
}

std::string_view visibility_backend_name(VisibilityBackend backend) noexcept {
  return backend == VisibilityBackend::Exact ? "exact" : "shadowcast";
}

VisibilitySet visible_set(const OccupancyGrid& grid, Cell origin, VisibilityBackend backend) {
  return backend == VisibilityBackend::Exact ? visible_set_exact(grid, origin)
                                             : visible_set_shadowcast(grid, origin);
}

VisibilityGraph::VisibilityGraph(const OccupancyGrid& grid, VisualOptions options) {
  std::vector<std::int64_t> compact_of(grid.size(), -1);
  for (CellIndex i = 0; i < grid.size(); ++i) {
    if (grid.is_free(i)) {
      compact_of[i] = static_cast<std::int64_t>(cell_of_.size());
      cell_of_.push_back(i);
    }
  }
  const std::size_t n = cell_of_.size();
  words_ = (n + 63) / 64;
  bits_.assign(n * words_, 0);
  auto set_bit = [&](std::size_t r, std::size_t c) { bits_[r * words_ + c / 64] |= std::uint64_t{1} << (c % 64); };

  if (options.backend == VisibilityBackend::Exact) {
    // Upper triangle in parallel (each worker writes only its own rows), then mirror.
    parallel_chunks(n, options.threads, 8, [&](unsigned, std::size_t begin, std::size_t end) {
      for (std::size_t a = begin; a < end; ++a) {
        const Cell ca = grid.cell(cell_of_[a]);
        for (std::size_t b = a + 1; b < n; ++b)
          if (line_of_sight(grid, ca, grid.cell(cell_of_[b]))) set_bit(a, b);
      }
    });
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (connected(a, b)) set_bit(b, a);
  } else {
    parallel_chunks(n, options.threads, 8, [&](unsigned, std::size_t begin, std::size_t end) {
      for (std::size_t a = begin; a < end; ++a) {
        auto vis = visible_set_shadowcast(grid, grid.cell(cell_of_[a]));
        for (CellIndex c : vis.visible) set_bit(a, static_cast<std::size_t>(compact_of[c]));
      }
    });
  }
}

std::size_t VisibilityGraph::degree(std::size_t node) const {
  return kernels::active().popcount(row(node), words_);
}

AnalysisField visual_connectivity_field(const OccupancyGrid& grid, VisualOptions options) {
  const std::size_t n = grid.free_count();
  if (n == 0) throw Error(Errc::NoFreeCells, "grid has no free cells");
  AnalysisField field(grid, FieldKind::VisualConnectivity);
  if (options.backend == VisibilityBackend::Exact) {
    VisibilityGraph graph(grid, options);
    for (std::size_t a = 0; a < n; ++a) field.values[graph.cell_of(a)] = static_cast<double>(graph.degree(a));
    return field;
  }
  std::vector<CellIndex> cells;
  cells.reserve(n);
  for (CellIndex i = 0; i < grid.size(); ++i)
    if (grid.is_free(i)) cells.push_back(i);
  parallel_chunks(n, options.threads, 8, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t a = begin; a < end; ++a) {
      auto vis = visible_set_shadowcast(grid, grid.cell(cells[a]));
      field.values[cells[a]] = static_cast<double>(vis.visible.size());
    }
  });
  return field;
}

AnalysisField visual_mean_depth_field(const OccupancyGrid& grid, VisualOptions options) {
  const std::size_t n = grid.free_count();
  if (n == 0) throw Error(Errc::NoFreeCells, "grid has no free cells");
  AnalysisField field(grid, FieldKind::VisualMeanDepth);
  if (n == 1) return field;

  VisibilityGraph graph(grid, options);
  const std::size_t words = graph.words_per_row();
  const auto& k = kernels::active();
  struct Scratch {
    std::vector<std::uint64_t> visited, frontier, next;
  };
  const unsigned threads = resolve_threads(options.threads);
  std::vector<Scratch> scratch(threads);

  parallel_chunks(n, threads, 4, [&](unsigned worker, std::size_t begin, std::size_t end) {
    Scratch& s = scratch[worker];
    s.visited.resize(words);
    s.frontier.resize(words);
    s.next.resize(words);
    for (std::size_t src = begin; src < end; ++src) {
      std::fill(s.visited.begin(), s.visited.end(), 0);
      std::fill(s.frontier.begin(), s.frontier.end(), 0);
      s.visited[src / 64] |= std::uint64_t{1} << (src % 64);
      s.frontier[src / 64] = s.visited[src / 64];
      std::size_t reached = 1;
      std::uint64_t total = 0;
      for (std::uint64_t depth = 1;; ++depth) {
        std::fill(s.next.begin(), s.next.end(), 0);
        for (std::size_t w = 0; w < words; ++w) {
          for (std::uint64_t bits = s.frontier[w]; bits != 0; bits &= bits - 1) {
            const std::size_t u = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
            k.bitset_or(s.next.data(), graph.row(u), words);
          }
        }
        const std::size_t fresh = k.bitset_advance(s.next.data(), s.visited.data(), words);
        if (fresh == 0) break;
        reached += fresh;
        total += depth * fresh;
        s.frontier.swap(s.next);
      }
      if (reached != n) {
        const Cell c = grid.cell(graph.cell_of(src));
        throw Error(Errc::DisconnectedVisibilityGraph,
                    "visibility graph is disconnected at (" + std::to_string(c.x) + "," +
                        std::to_string(c.y) + ")");
      }
      field.values[graph.cell_of(src)] = static_cast<double>(total) / static_cast<double>(n - 1);
    }
  });
  return field;
}

}  // namespace viscon
