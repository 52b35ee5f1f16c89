#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "json.hpp"
#include "viscon/dataset_kit.hpp"
#include "viscon/farm/local.hpp"
#include "viscon/kernels.hpp"
#include "viscon/parallel.hpp"
#include "viscon/rng.hpp"

namespace viscon {

namespace fs = std::filesystem;

RemapDirection default_direction(FieldKind kind) noexcept {
  switch (kind) {
    case FieldKind::SpatialConnectivity:
    case FieldKind::VisualMeanDepth:
      return RemapDirection::Inverted;
    case FieldKind::VisualConnectivity:
    case FieldKind::Sdf:
      return RemapDirection::Direct;
  }
  return RemapDirection::Direct;
}

GrayImage remap_to_gray(const AnalysisField& field, const OccupancyGrid& grid, RemapDirection direction) {
  if (field.width != grid.width() || field.height != grid.height() || field.values.size() != grid.size())
    throw Error(Errc::DimensionMismatch, "field and grid dimensions differ");
  std::vector<std::uint8_t> mask(grid.size());
  for (CellIndex i = 0; i < grid.size(); ++i) mask[i] = (field.defined[i] && grid.is_free(i)) ? 1 : 0;

  const auto& k = kernels::active();
  const kernels::MinMax mm = k.minmax_masked(field.values.data(), mask.data(), mask.size());
  if (mm.count == 0) throw Error(Errc::EmptyField, "field has no defined values");

  GrayImage img(grid.width(), grid.height());
  if (mm.max == mm.min) {
    for (std::size_t i = 0; i < mask.size(); ++i) img.pixels[i] = mask[i] ? 255 : 0;
  } else {
    k.remap_gray(field.values.data(), mask.data(), mask.size(), mm.min, mm.max,
                 direction == RemapDirection::Inverted, img.pixels.data());
  }
  return img;
}

std::string_view split_name(Split split) noexcept {
  switch (split) {
    case Split::Train: return "TRAIN";
    case Split::Val: return "VAL";
    case Split::Test: return "TEST";
  }
  return "TRAIN";
}

void SplitSpec::validate() const {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(Errc::InvalidParams, "split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(Errc::InvalidParams, "split ratios must sum to 1");
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  // The epsilon keeps exact products (0.7 * 10 = 7) from flooring to one less.
  auto part = [n](double r) { return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9)); };
  SplitSizes s;
  s.train = std::min(n, part(spec.ratios[0]));
  s.val = std::min(n - s.train, part(spec.ratios[1]));
  s.test = n - s.train - s.val;
  return s;
}

std::vector<Split> split_dataset(std::span<const std::string> ids, const SplitSpec& spec) {
  if (ids.empty()) throw Error(Errc::InvalidParams, "no ids to split");
  std::set<std::string_view> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second) throw Error(Errc::DuplicateIds, "duplicate id '" + id + "'");

  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(spec.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);

  const SplitSizes sizes = split_sizes(ids.size(), spec);
  std::vector<Split> out(ids.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    out[order[pos]] = pos < sizes.train ? Split::Train : pos < sizes.train + sizes.val ? Split::Val : Split::Test;
  return out;
}

GrayImage flip_image(const GrayImage& image, bool horizontal, bool vertical) {
  GrayImage out(image.width, image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      out.at(horizontal ? image.width - 1 - x : x, vertical ? image.height - 1 - y : y) = image.at(x, y);
  return out;
}

DatasetRecord flip_pair(const DatasetRecord& record, bool horizontal, bool vertical) {
  DatasetRecord out = record;
  out.input_image = flip_image(record.input_image, horizontal, vertical);
  out.target_image = flip_image(record.target_image, horizontal, vertical);
  if (horizontal || vertical) out.id += std::string("+flip_") + (horizontal ? "h" : "") + (vertical ? "v" : "");
  return out;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string split_dir(Split s) { return lower(split_name(s)); }

}  // namespace

std::string field_file_name(std::string_view plan_stem, FieldKind kind) {
  return std::string(plan_stem) + "." + lower(field_kind_name(kind)) + ".f32";
}

std::string dataset_manifest_jsonl(std::span<const DatasetEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["input_path"] = e.input_path;
    j["target_path"] = e.target_path;
    j["analysis"] = std::string(field_kind_name(e.analysis));
    j["split"] = std::string(split_name(e.split));
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<DatasetEntry> build_dataset(const BuildOptions& options) {
  options.split.validate();
  if (options.analyses.empty()) throw Error(Errc::InvalidParams, "no analyses requested");
  std::error_code ec;
  if (!fs::is_directory(options.plans_dir, ec))
    throw Error(Errc::IoFailure, "plans directory " + options.plans_dir.string() + " does not exist");

  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(options.plans_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") stems.push_back(entry.path().stem().string());
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) throw Error(Errc::IoFailure, "no .pgm plans in " + options.plans_dir.string());

  const fs::path fields_dir = options.plans_dir / "fields";
  farm::TaskManifest missing;
  missing.base_dir = fs::absolute(options.plans_dir);
  for (const auto& stem : stems) {
    for (FieldKind kind : options.analyses) {
      const std::string rel = "fields/" + field_file_name(stem, kind);
      if (fs::is_regular_file(options.plans_dir / rel)) continue;
      if (!options.run_farm)
        throw Error(Errc::MissingAnalysis, "plan '" + stem + "' has no " + std::string(field_kind_name(kind)) +
                                               " field (" + rel + ")");
      farm::Task t;
      t.id = stem + "." + lower(field_kind_name(kind));
      t.input_path = stem + ".pgm";
      t.analysis = kind;
      t.cell_size = options.cell_size;
      t.output_path = rel;
      if (kind == FieldKind::VisualConnectivity || kind == FieldKind::VisualMeanDepth)
        t.extra["visibility"] = std::string(visibility_backend_name(options.visibility));
      missing.tasks.push_back(std::move(t));
    }
  }
  if (!missing.tasks.empty()) {
    // Finished fields are the resume state; no manifest is kept, so reruns leave
    // byte-identical trees.
    fs::create_directories(fields_dir);
    farm::run_local(missing, {resolve_threads(options.workers), std::nullopt});
    for (const auto& t : missing.tasks)
      if (t.status != farm::TaskStatus::Done)
        throw Error(Errc::MissingAnalysis, "analysis task '" + t.id + "' failed: " + t.message);
  }

  const std::vector<Split> plan_split = split_dataset(stems, options.split);
  for (Split s : {Split::Train, Split::Val, Split::Test}) fs::create_directories(options.out_dir / split_dir(s));

  std::vector<DatasetEntry> entries;
  for (std::size_t p = 0; p < stems.size(); ++p) {
    const std::string& stem = stems[p];
    OccupancyGrid plan = load_occupancy(options.plans_dir / (stem + ".pgm"), options.cell_size);
    OccupancyGrid pruned = largest_component(plan);
    const GrayImage input = to_image(pruned);
    for (FieldKind kind : options.analyses) {
      DatasetEntry e;
      e.id = stem + "." + lower(field_kind_name(kind));
      e.analysis = kind;
      e.split = plan_split[p];
      e.input_path = split_dir(e.split) + "/" + e.id + ".input.pgm";
      e.target_path = split_dir(e.split) + "/" + e.id + ".target.pgm";
      GrayImage target;
      try {
        AnalysisField field = load_field_f32(fields_dir / field_file_name(stem, kind), kind);
        target = remap_to_gray(field, pruned, default_direction(kind));
      } catch (const Error& err) {
        throw Error(err.code(), "record '" + e.id + "': " + err.what());
      }
      save_gray(input, options.out_dir / e.input_path);
      save_gray(target, options.out_dir / e.target_path);
      entries.push_back(std::move(e));
    }
  }
  const std::string text = dataset_manifest_jsonl(entries);
  write_file_atomic(options.out_dir / "manifest.jsonl",
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return entries;
}

}  // namespace viscon
