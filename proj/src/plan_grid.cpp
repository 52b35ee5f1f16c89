#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "viscon/plan_grid.hpp"

namespace viscon {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedImage: return "MalformedImage";
    case Errc::IoFailure: return "IoFailure";
    case Errc::NoFreeCells: return "NoFreeCells";
    case Errc::BlockedCell: return "BlockedCell";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::InvalidGrid: return "InvalidGrid";
    case Errc::DisconnectedVisibilityGraph: return "DisconnectedVisibilityGraph";
    case Errc::UnreachableCell: return "UnreachableCell";
    case Errc::InfeasibleParams: return "InfeasibleParams";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::ManifestIo: return "ManifestIo";
    case Errc::BindFailure: return "BindFailure";
    case Errc::ConnectFailure: return "ConnectFailure";
    case Errc::ProtocolViolation: return "ProtocolViolation";
    case Errc::EmptyTaskList: return "EmptyTaskList";
    case Errc::EmptyField: return "EmptyField";
    case Errc::DuplicateIds: return "DuplicateIds";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::MissingAnalysis: return "MissingAnalysis";
  }
  return "Unknown";
}

namespace {

void check_dims(int width, int height, double cell_size) {
  if (width < 1 || height < 1)
    throw Error(Errc::InvalidGrid, "grid dimensions must be at least 1x1");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size))
    throw Error(Errc::InvalidGrid, "cell size must be positive");
}

}  // namespace

OccupancyGrid::OccupancyGrid(int width, int height, double cell_size, Occupancy fill)
    : width_(width), height_(height), cell_size_(cell_size) {
  check_dims(width, height, cell_size);
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

OccupancyGrid::OccupancyGrid(int width, int height, double cell_size, std::vector<Occupancy> cells)
    : width_(width), height_(height), cell_size_(cell_size), cells_(std::move(cells)) {
  check_dims(width, height, cell_size);
  if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error(Errc::InvalidGrid, "cell count does not match width x height");
  for (Occupancy c : cells_)
    if (c != Occupancy::Free && c != Occupancy::Blocked)
      throw Error(Errc::InvalidGrid, "cell is neither free nor blocked");
}

void OccupancyGrid::set_cell_size(double cell_size) {
  check_dims(width_, height_, cell_size);
  cell_size_ = cell_size;
}

std::size_t OccupancyGrid::free_count() const noexcept {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), Occupancy::Free));
}

std::string_view field_kind_name(FieldKind kind) noexcept {
  switch (kind) {
    case FieldKind::SpatialConnectivity: return "SPATIAL";
    case FieldKind::VisualConnectivity: return "VISUAL";
    case FieldKind::VisualMeanDepth: return "VISUAL_DEPTH";
    case FieldKind::Sdf: return "SDF";
  }
  return "SPATIAL";
}

FieldKind parse_field_kind(std::string_view name) {
  std::string up(name);
  for (char& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (up == "SPATIAL" || up == "SPATIAL_CONNECTIVITY" || up == "CON") return FieldKind::SpatialConnectivity;
  if (up == "VISUAL" || up == "VISUAL_CONNECTIVITY" || up == "VGA") return FieldKind::VisualConnectivity;
  if (up == "VISUAL_DEPTH" || up == "DEPTH" || up == "VISUAL_MEAN_DEPTH") return FieldKind::VisualMeanDepth;
  if (up == "SDF") return FieldKind::Sdf;
  throw Error(Errc::InvalidParams, "unknown analysis kind '" + std::string(name) + "'");
}

AnalysisField::AnalysisField(const OccupancyGrid& grid, FieldKind k)
    : width(grid.width()),
      height(grid.height()),
      kind(k),
      values(grid.size(), 0.0),
      defined(grid.size(), 0) {
  for (CellIndex i = 0; i < grid.size(); ++i) defined[i] = grid.is_free(i) ? 1 : 0;
}

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

std::vector<std::size_t> label_components(const OccupancyGrid& grid, std::vector<int>& labels) {
  labels.assign(grid.size(), -1);
  std::vector<std::size_t> sizes;
  std::vector<CellIndex> stack;
  for (CellIndex start = 0; start < grid.size(); ++start) {
    if (!grid.is_free(start) || labels[start] >= 0) continue;
    const int label = static_cast<int>(sizes.size());
    std::size_t count = 0;
    labels[start] = label;
    stack.push_back(start);
    while (!stack.empty()) {
      CellIndex cur = stack.back();
      stack.pop_back();
      ++count;
      for_each_walkable_neighbor(grid, grid.cell(cur), [&](Cell n, bool) {
        CellIndex ni = grid.index(n);
        if (labels[ni] < 0) {
          labels[ni] = label;
          stack.push_back(ni);
        }
      });
    }
    sizes.push_back(count);
  }
  return sizes;
}

OccupancyGrid largest_component(const OccupancyGrid& grid) {
  std::vector<int> labels;
  auto sizes = label_components(grid, labels);
  if (sizes.empty()) throw Error(Errc::NoFreeCells, "grid has no free cells");
  // max_element returns the first maximum, i.e. the lowest label = smallest row-major index.
  const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  OccupancyGrid out = grid;
  for (CellIndex i = 0; i < grid.size(); ++i)
    if (labels[i] >= 0 && labels[i] != keep) out.set(i, Occupancy::Blocked);
  return out;
}

}  // namespace viscon
