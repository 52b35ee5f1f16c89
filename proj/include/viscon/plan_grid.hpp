#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "viscon/error.hpp"

namespace viscon {

enum class Occupancy : std::uint8_t { Free = 0, Blocked = 1 };

// Column/row coordinate; x = column, y = row, origin top-left.
struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

using CellIndex = std::size_t;

// Binary free/blocked raster. Cells are row-major.
class OccupancyGrid {
 public:
  OccupancyGrid(int width, int height, double cell_size = 1.0,
                Occupancy fill = Occupancy::Free);
  OccupancyGrid(int width, int height, double cell_size, std::vector<Occupancy> cells);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double cell_size() const noexcept { return cell_size_; }
  void set_cell_size(double cell_size);
  std::size_t size() const noexcept { return cells_.size(); }

  bool in_bounds(Cell c) const noexcept {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  CellIndex index(Cell c) const noexcept {
    return static_cast<CellIndex>(c.y) * static_cast<CellIndex>(width_) + static_cast<CellIndex>(c.x);
  }
  Cell cell(CellIndex i) const noexcept {
    return {static_cast<int>(i % static_cast<CellIndex>(width_)),
            static_cast<int>(i / static_cast<CellIndex>(width_))};
  }

  Occupancy at(CellIndex i) const noexcept { return cells_[i]; }
  Occupancy at(Cell c) const noexcept { return cells_[index(c)]; }
  bool is_free(CellIndex i) const noexcept { return cells_[i] == Occupancy::Free; }
  // Out-of-bounds cells behave as blocked (virtual wall ring around the plan).
  bool is_free(Cell c) const noexcept { return in_bounds(c) && cells_[index(c)] == Occupancy::Free; }

  void set(CellIndex i, Occupancy v) noexcept { cells_[i] = v; }
  void set(Cell c, Occupancy v) noexcept { cells_[index(c)] = v; }

  std::span<const Occupancy> cells() const noexcept { return cells_; }
  std::size_t free_count() const noexcept;

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  int width_;
  int height_;
  double cell_size_;
  std::vector<Occupancy> cells_;
};

enum class FieldKind { SpatialConnectivity, VisualConnectivity, VisualMeanDepth, Sdf };

std::string_view field_kind_name(FieldKind kind) noexcept;   // "SPATIAL", "VISUAL", ...
FieldKind parse_field_kind(std::string_view name);           // accepts upper or lower case, "depth"

// Per-cell real-valued analysis result. Values on blocked cells are undefined.
struct AnalysisField {
  int width = 0;
  int height = 0;
  FieldKind kind = FieldKind::SpatialConnectivity;
  std::vector<double> values;
  std::vector<std::uint8_t> defined;

  AnalysisField() = default;
  AnalysisField(const OccupancyGrid& grid, FieldKind kind);

  std::size_t size() const noexcept { return values.size(); }
  bool is_defined(CellIndex i) const noexcept { return defined[i] != 0; }
  double operator[](CellIndex i) const noexcept { return values[i]; }
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// --- image I/O (PGM P5, 8-bit) -------------------------------------------

inline constexpr std::uint8_t kFreeThreshold = 128;

GrayImage load_gray(const std::filesystem::path& path);
void save_gray(const GrayImage& image, const std::filesystem::path& path);

// pixel < 128 -> blocked, otherwise free.
OccupancyGrid load_occupancy(const std::filesystem::path& path, double cell_size = 1.0);
void save_occupancy(const OccupancyGrid& grid, const std::filesystem::path& path);

GrayImage to_image(const OccupancyGrid& grid);
OccupancyGrid from_image(const GrayImage& image, double cell_size = 1.0);

// Raw float sidecar: u32 width, u32 height (LE) then row-major f32 LE, NaN where undefined.
void save_field_f32(const AnalysisField& field, const std::filesystem::path& path);
AnalysisField load_field_f32(const std::filesystem::path& path, FieldKind kind);

// Writes to a sibling temp file then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// --- grid operations ----------------------------------------------------

// Walkable neighbours of a free cell: 4 orthogonal, plus diagonals whose two
// shared orthogonal cells are both free (no corner cutting). This rule is the
// single adjacency definition for components and shortest paths.
template <typename Fn>
void for_each_walkable_neighbor(const OccupancyGrid& grid, Cell c, Fn&& fn) {
  static constexpr int kOrth[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  static constexpr int kDiag[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (const auto& d : kOrth) {
    Cell n{c.x + d[0], c.y + d[1]};
    if (grid.is_free(n)) fn(n, false);
  }
  for (const auto& d : kDiag) {
    Cell n{c.x + d[0], c.y + d[1]};
    if (grid.is_free(n) && grid.is_free(Cell{c.x + d[0], c.y}) && grid.is_free(Cell{c.x, c.y + d[1]}))
      fn(n, true);
  }
}

// Component label per cell (-1 for blocked), labels numbered by first
// row-major cell; returns component sizes indexed by label.
std::vector<std::size_t> label_components(const OccupancyGrid& grid, std::vector<int>& labels);

// Keeps only the largest connected free region; ties keep the region holding
// the smallest row-major index.
OccupancyGrid largest_component(const OccupancyGrid& grid);

// Exact Euclidean distance from each free cell centre to the nearest blocked
// cell centre, counting a virtual blocked ring outside the grid. Scaled by cell_size.
AnalysisField signed_distance_field(const OccupancyGrid& grid);

}  // namespace viscon
