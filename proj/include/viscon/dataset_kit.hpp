#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viscon/plan_grid.hpp"
#include "viscon/visual_connectivity.hpp"

namespace viscon {

enum class RemapDirection { Direct, Inverted };

// Spatial distance and visual depth are inverted so that bright means well connected.
RemapDirection default_direction(FieldKind kind) noexcept;

// Per-image min-max remap of defined free cells onto 0..255, rounding half away
// from zero; a flat field maps to 255; blocked cells are 0.
GrayImage remap_to_gray(const AnalysisField& field, const OccupancyGrid& grid, RemapDirection direction);

enum class Split { Train, Val, Test };
std::string_view split_name(Split split) noexcept;

struct SplitSpec {
  std::array<double, 3> ratios{0.7, 0.2, 0.1};
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitSizes {
  std::size_t train = 0, val = 0, test = 0;
};
SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

// Assignment for each id, in input order. The ids are shuffled with a
// permutation seeded by spec.seed; the first floor(r0 N) go to TRAIN, the next
// floor(r1 N) to VAL, the rest to TEST.
std::vector<Split> split_dataset(std::span<const std::string> ids, const SplitSpec& spec);

struct DatasetRecord {
  std::string id;
  GrayImage input_image;
  GrayImage target_image;
  FieldKind analysis = FieldKind::SpatialConnectivity;
  Split split = Split::Train;
};

GrayImage flip_image(const GrayImage& image, bool horizontal, bool vertical);
DatasetRecord flip_pair(const DatasetRecord& record, bool horizontal, bool vertical);

struct DatasetEntry {
  std::string id;
  std::string input_path;   // relative to the dataset directory
  std::string target_path;  // relative to the dataset directory
  FieldKind analysis;
  Split split;
};

struct BuildOptions {
  std::filesystem::path plans_dir;
  std::vector<FieldKind> analyses{FieldKind::SpatialConnectivity, FieldKind::VisualConnectivity};
  SplitSpec split;
  std::filesystem::path out_dir;
  bool run_farm = true;  // compute missing fields with the local farm
  unsigned workers = 0;  // 0 = all cores
  double cell_size = 1.0;
  VisibilityBackend visibility = VisibilityBackend::Shadowcast;
};

// Expects plans as <plans_dir>/*.pgm with fields at <plans_dir>/fields/<stem>.<kind>.f32.
// Writes <out_dir>/<split>/<id>.input.pgm, .target.pgm and <out_dir>/manifest.jsonl.
std::vector<DatasetEntry> build_dataset(const BuildOptions& options);

std::string field_file_name(std::string_view plan_stem, FieldKind kind);  // "<stem>.<kind>.f32"
std::string dataset_manifest_jsonl(std::span<const DatasetEntry> entries);

}  // namespace viscon
