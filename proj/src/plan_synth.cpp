#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "viscon/parallel.hpp"
#include "viscon/plan_synth.hpp"
#include "viscon/rng.hpp"

namespace viscon {

namespace fs = std::filesystem;

PlanStyle parse_plan_style(std::string_view name) {
  if (name == "corridors" || name == "CORRIDORS") return PlanStyle::Corridors;
  if (name == "open" || name == "open_plan" || name == "OPEN_PLAN") return PlanStyle::OpenPlan;
  throw Error(Errc::InvalidParams, "unknown plan style '" + std::string(name) + "'");
}

std::string_view plan_style_name(PlanStyle style) noexcept {
  return style == PlanStyle::Corridors ? "corridors" : "open";
}

void PlanSynthParams::validate() const {
  auto fail = [](const std::string& why) { throw Error(Errc::InvalidParams, why); };
  if (width < 16 || height < 16) fail("plan dimensions must be at least 16x16");
  if (room_count.min < 1 || room_count.min > room_count.max) fail("room count range is empty");
  if (corridor_width.min < 1 || corridor_width.min > corridor_width.max) fail("corridor width range is empty");
  if (!(furniture_density >= 0.0 && furniture_density <= 0.4)) fail("furniture density must lie in [0, 0.4]");
  if (door_width < 1) fail("door width must be at least 1");
  if (wall_thickness < 1) fail("wall thickness must be at least 1");
  if (retry_budget < 1) fail("retry budget must be at least 1");
}

namespace {

struct Rect {
  int x0, y0, x1, y1;  // half-open
  int area() const { return (x1 - x0) * (y1 - y0); }
};

// Blocks rectangles only while every free cell stays reachable from every other.
class Canvas {
 public:
  Canvas(int w, int h) : grid_(w, h, 1.0, Occupancy::Free), free_(grid_.size()) {}

  OccupancyGrid& grid() { return grid_; }

  void fill(const Rect& r, Occupancy v) {
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x) {
        const CellIndex i = grid_.index({x, y});
        if (grid_.at(i) != v) free_ += v == Occupancy::Free ? 1 : -1;
        grid_.set(i, v);
      }
  }

  bool all_free(const Rect& r) const {
    if (r.x0 < 0 || r.y0 < 0 || r.x1 > grid_.width() || r.y1 > grid_.height()) return false;
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x)
        if (!grid_.is_free(Cell{x, y})) return false;
    return true;
  }

  // Blocks `r` (which must be entirely free) unless that splits the free region around it.
  bool try_block(const Rect& r) {
    if (!all_free(r)) return false;
    fill(r, Occupancy::Blocked);
    if (free_ == 0 || ring_is_one_run(r) || ring_reconnects(r)) return true;
    fill(r, Occupancy::Free);
    return false;
  }

  std::ptrdiff_t free_cells() const { return free_; }

 private:
  // Free cells on the ring around `r` forming one cyclic run stay linked along
  // the ring, so blocking `r` cannot split the free space.
  bool ring_is_one_run(const Rect& r) const {
    std::vector<Cell> ring;
    for (int x = r.x0 - 1; x <= r.x1; ++x) ring.push_back({x, r.y0 - 1});
    for (int y = r.y0; y <= r.y1; ++y) ring.push_back({r.x1, y});
    for (int x = r.x1 - 1; x >= r.x0 - 1; --x) ring.push_back({x, r.y1});
    for (int y = r.y1 - 1; y >= r.y0; --y) ring.push_back({r.x0 - 1, y});
    int runs = 0;
    for (std::size_t i = 0; i < ring.size(); ++i)
      if (grid_.is_free(ring[i]) && !grid_.is_free(ring[(i + ring.size() - 1) % ring.size()])) ++runs;
    return runs <= 1;
  }

  // Flood from one free ring cell; true when every free ring cell is reached.
  bool ring_reconnects(const Rect& r) {
    std::vector<CellIndex> targets;
    for (int y = r.y0 - 1; y <= r.y1; ++y)
      for (int x = r.x0 - 1; x <= r.x1; ++x)
        if ((y == r.y0 - 1 || y == r.y1 || x == r.x0 - 1 || x == r.x1) && grid_.is_free(Cell{x, y}))
          targets.push_back(grid_.index({x, y}));
    if (targets.empty()) return true;
    seen_.assign(grid_.size(), 0);
    stack_.clear();
    seen_[targets.front()] = 1;
    stack_.push_back(targets.front());
    std::size_t found = 0;
    for (CellIndex t : targets) found += t == targets.front();
    const int w = grid_.width();
    while (!stack_.empty()) {
      const CellIndex c = stack_.back();
      stack_.pop_back();
      const Cell p = grid_.cell(c);
      const Cell nbrs[4] = {{p.x + 1, p.y}, {p.x - 1, p.y}, {p.x, p.y + 1}, {p.x, p.y - 1}};
      for (const Cell& n : nbrs) {
        if (!grid_.is_free(n)) continue;
        const CellIndex ni = static_cast<CellIndex>(n.y) * w + n.x;
        if (seen_[ni]) continue;
        seen_[ni] = 1;
        stack_.push_back(ni);
        if (std::find(targets.begin(), targets.end(), ni) != targets.end() && ++found == targets.size()) return true;
      }
    }
    return found == targets.size();
  }

  OccupancyGrid grid_;
  std::ptrdiff_t free_;
  std::vector<std::uint8_t> seen_;
  std::vector<CellIndex> stack_;
};

void block_perimeter(Canvas& canvas, int t) {
  const int w = canvas.grid().width(), h = canvas.grid().height();
  canvas.fill({0, 0, w, t}, Occupancy::Blocked);
  canvas.fill({0, h - t, w, h}, Occupancy::Blocked);
  canvas.fill({0, 0, t, h}, Occupancy::Blocked);
  canvas.fill({w - t, 0, w, h}, Occupancy::Blocked);
}

// Scatters desk-sized blocks inside `regions` until `target` cells are blocked.
std::ptrdiff_t furnish(Canvas& canvas, const std::vector<Rect>& regions, std::ptrdiff_t target, Rng& rng) {
  std::ptrdiff_t placed = 0;
  if (regions.empty()) return 0;
  std::ptrdiff_t total_area = 0;
  for (const Rect& r : regions) total_area += r.area();
  const std::ptrdiff_t max_attempts = 60 * target + 200;
  for (std::ptrdiff_t attempt = 0; attempt < max_attempts && placed < target; ++attempt) {
    // Pick a region weighted by area.
    std::ptrdiff_t pick = rng.uniform_int(0, total_area - 1);
    const Rect* region = &regions.front();
    for (const Rect& r : regions) {
      if (pick < r.area()) {
        region = &r;
        break;
      }
      pick -= r.area();
    }
    int w = static_cast<int>(rng.uniform_int(1, 4));
    int h = static_cast<int>(rng.uniform_int(1, 3));
    if (rng.coin()) std::swap(w, h);
    const std::ptrdiff_t remaining = target - placed;
    if (w * h > remaining) {
      w = static_cast<int>(std::min<std::ptrdiff_t>(w, remaining));
      h = static_cast<int>(std::max<std::ptrdiff_t>(1, std::min<std::ptrdiff_t>(h, remaining / w)));
    }
    if (w > region->x1 - region->x0 || h > region->y1 - region->y0) continue;
    const int x = static_cast<int>(rng.uniform_int(region->x0, region->x1 - w));
    const int y = static_cast<int>(rng.uniform_int(region->y0, region->y1 - h));
    const Rect r{x, y, x + w, y + h};
    if (canvas.try_block(r)) placed += r.area();
  }
  return placed;
}

constexpr int kMinRoomWidth = 3;
constexpr int kMinRoomDepth = 3;

// Compartmentalised plan: a corridor spine along the long axis (optionally
// crossed by a second corridor), each side partitioned into rooms by a
// recursive binary split, every room opened onto the spine by a door.
std::optional<OccupancyGrid> corridors_attempt(const PlanSynthParams& p, Rng& rng) {
  const int t = p.wall_thickness;
  Canvas canvas(p.width, p.height);
  block_perimeter(canvas, t);
  const int iw = p.width - 2 * t, ih = p.height - 2 * t;
  const bool horizontal = iw > ih ? true : iw < ih ? false : rng.coin();
  const int length = horizontal ? iw : ih;
  const int depth = horizontal ? ih : iw;
  // (u along the spine, v across it) -> grid rectangle
  auto uv = [&](int u0, int v0, int u1, int v1) -> Rect {
    return horizontal ? Rect{t + u0, t + v0, t + u1, t + v1} : Rect{t + v0, t + u0, t + v1, t + u1};
  };

  const int rooms_wanted = static_cast<int>(rng.uniform_int(p.room_count.min, p.room_count.max));
  const int cw = static_cast<int>(rng.uniform_int(p.corridor_width.min, p.corridor_width.max));
  const int v_lo = t + kMinRoomDepth, v_hi = depth - cw - t - kMinRoomDepth;
  if (v_lo > v_hi) return std::nullopt;
  const int quarter = (v_hi - v_lo) / 4;
  const int v0 = static_cast<int>(rng.uniform_int(v_lo + quarter, v_hi - quarter));

  struct Segment {
    int u0, u1;
  };
  std::vector<Segment> segments{{0, length}};
  std::optional<std::pair<int, int>> cross;  // u range of the cross corridor
  if (rooms_wanted >= 6 && rng.coin()) {
    const int cw2 = static_cast<int>(rng.uniform_int(p.corridor_width.min, p.corridor_width.max));
    const int margin = std::max(length / 4, 2 * kMinRoomWidth + 2 * t);
    if (margin <= length - cw2 - margin) {
      const int u0 = static_cast<int>(rng.uniform_int(margin, length - cw2 - margin));
      cross = {u0, u0 + cw2};
      segments = {{0, u0 - t}, {u0 + cw2 + t, length}};
    }
  }

  // Walls between the spine and the room bands.
  canvas.fill(uv(0, v0 - t, length, v0), Occupancy::Blocked);
  canvas.fill(uv(0, v0 + cw, length, v0 + cw + t), Occupancy::Blocked);
  if (cross) {
    canvas.fill(uv(cross->first - t, 0, cross->first, depth), Occupancy::Blocked);
    canvas.fill(uv(cross->second, 0, cross->second + t, depth), Occupancy::Blocked);
    canvas.fill(uv(cross->first, 0, cross->second, depth), Occupancy::Free);
    canvas.fill(uv(cross->first - t, v0, cross->second + t, v0 + cw), Occupancy::Free);  // spine runs through
  }

  struct Block {
    int u0, u1, v0, v1;       // room band
    int door_v0, door_v1;     // wall rows to carve for doors
    int rooms = 1;
  };
  std::vector<Block> blocks;
  for (const Segment& s : segments) {
    blocks.push_back({s.u0, s.u1, 0, v0 - t, v0 - t, v0});
    blocks.push_back({s.u0, s.u1, v0 + cw + t, depth, v0 + cw, v0 + cw + t});
  }
  for (Block& b : blocks) {
    const int cap = (b.u1 - b.u0 + t) / (kMinRoomWidth + t);
    if (cap < 1) return std::nullopt;
  }
  int remaining = rooms_wanted - static_cast<int>(blocks.size());
  while (remaining > 0) {
    Block* best = nullptr;
    double best_len = -1.0;
    for (Block& b : blocks) {
      const int cap = (b.u1 - b.u0 + t) / (kMinRoomWidth + t);
      if (b.rooms >= cap) continue;
      const double len = double(b.u1 - b.u0) / (b.rooms + 1);
      if (len > best_len) {
        best_len = len;
        best = &b;
      }
    }
    if (best == nullptr) break;
    ++best->rooms;
    --remaining;
  }
  int total_rooms = 0;
  for (const Block& b : blocks) total_rooms += b.rooms;
  if (total_rooms < p.room_count.min) return std::nullopt;

  std::vector<Rect> room_rects;
  // Recursive binary partition of [u0, u1) into `k` rooms separated by walls.
  auto partition = [&](auto&& self, const Block& b, int u0, int u1, int k) -> void {
    if (k == 1) {
      const int dw = std::min(p.door_width, u1 - u0);
      const int du = static_cast<int>(rng.uniform_int(u0, u1 - dw));
      canvas.fill(uv(du, b.door_v0, du + dw, b.door_v1), Occupancy::Free);
      room_rects.push_back(uv(u0, b.v0, u1, b.v1));
      return;
    }
    const int kl = k / 2, kr = k - kl;
    const int min_left = kl * kMinRoomWidth + (kl - 1) * t;
    const int min_right = kr * kMinRoomWidth + (kr - 1) * t;
    const int lo = u0 + min_left, hi = u1 - min_right - t;
    // Bias the wall towards the proportional split point.
    const int ideal = u0 + static_cast<int>(std::lround(double(u1 - u0 - t) * kl / k));
    const int jitter = std::max(1, (hi - lo) / 3);
    const int s = std::clamp(static_cast<int>(rng.uniform_int(ideal - jitter, ideal + jitter)), lo, hi);
    canvas.fill(uv(s, b.v0, s + t, b.v1), Occupancy::Blocked);
    self(self, b, u0, s, kl);
    self(self, b, s + t, u1, kr);
  };
  for (const Block& b : blocks) partition(partition, b, b.u0, b.u1, b.rooms);

  if (p.furniture_density > 0.0) {
    std::ptrdiff_t room_area = 0;
    for (const Rect& r : room_rects) room_area += r.area();
    const auto target = static_cast<std::ptrdiff_t>(std::llround(p.furniture_density * double(room_area)));
    furnish(canvas, room_rects, target, rng);
  }
  return canvas.grid();
}

// Open plan: perimeter, a few partial partitions from the outer walls, and
// scattered furniture, together filling the requested share of the interior.
std::optional<OccupancyGrid> open_plan_attempt(const PlanSynthParams& p, Rng& rng) {
  const int t = p.wall_thickness;
  Canvas canvas(p.width, p.height);
  block_perimeter(canvas, t);
  const Rect interior{t, t, p.width - t, p.height - t};
  const std::ptrdiff_t area = interior.area();
  const auto target = static_cast<std::ptrdiff_t>(std::llround(p.furniture_density * double(area)));
  std::ptrdiff_t placed = 0;

  if (p.furniture_density >= 0.05) {
    const int partitions = static_cast<int>(rng.uniform_int(0, 3));
    for (int i = 0; i < partitions; ++i) {
      const int side = static_cast<int>(rng.uniform_int(0, 3));
      const bool vertical = side < 2;  // 0: from top, 1: from bottom, 2: from left, 3: from right
      const int span = vertical ? interior.y1 - interior.y0 : interior.x1 - interior.x0;
      const int along = vertical ? interior.x1 - interior.x0 : interior.y1 - interior.y0;
      const int len = static_cast<int>(rng.uniform_int(span / 5, span / 2));
      if (along - 4 - t < 4) continue;
      const int pos = static_cast<int>(rng.uniform_int(4, along - 4 - t));
      Rect r{};
      switch (side) {
        case 0: r = {interior.x0 + pos, interior.y0, interior.x0 + pos + t, interior.y0 + len}; break;
        case 1: r = {interior.x0 + pos, interior.y1 - len, interior.x0 + pos + t, interior.y1}; break;
        case 2: r = {interior.x0, interior.y0 + pos, interior.x0 + len, interior.y0 + pos + t}; break;
        default: r = {interior.x1 - len, interior.y0 + pos, interior.x1, interior.y0 + pos + t}; break;
      }
      if (placed + r.area() > target) continue;
      if (canvas.try_block(r)) placed += r.area();
    }
  }
  placed += furnish(canvas, {interior}, target - placed, rng);
  if (target - placed > area / 100) return std::nullopt;
  return canvas.grid();
}

}  // namespace

OccupancyGrid generate_plan(const PlanSynthParams& params) {
  params.validate();
  if (params.style == PlanStyle::Corridors && params.room_count.max < 2)
    throw Error(Errc::InfeasibleParams, "corridor plans need at least two rooms");
  for (int attempt = 0; attempt < params.retry_budget; ++attempt) {
    Rng rng(attempt == 0 ? params.seed : mix_seed(params.seed, static_cast<std::uint64_t>(attempt)));
    auto plan = params.style == PlanStyle::Corridors ? corridors_attempt(params, rng) : open_plan_attempt(params, rng);
    if (!plan) continue;
    if (plan->free_count() == 0) continue;
    OccupancyGrid pruned = largest_component(*plan);
    if (double(pruned.free_count()) < 0.40 * double(pruned.size())) continue;
    return pruned;
  }
  throw Error(Errc::InfeasibleParams, "no valid plan after " + std::to_string(params.retry_budget) + " attempts");
}

std::string plan_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "plan_%05zu.pgm", index);
  return buf;
}

farm::TaskManifest generate_batch(const PlanSynthParams& params, std::size_t count, const fs::path& out_dir,
                                  const BatchOptions& options) {
  params.validate();
  farm::TaskManifest manifest;
  if (count == 0) return manifest;
  try {
    fs::create_directories(out_dir);
  } catch (const fs::filesystem_error& e) {
    throw Error(Errc::IoFailure, e.what());
  }
  manifest.base_dir = fs::absolute(out_dir);

  std::vector<std::string> failures(count);
  parallel_chunks(count, options.threads, 1, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      PlanSynthParams p = params;
      p.seed = params.seed + i;
      try {
        save_occupancy(generate_plan(p), out_dir / plan_file_name(i));
      } catch (const Error& e) {
        if (e.code() != Errc::InfeasibleParams) throw;
        failures[i] = e.what();
      }
    }
  });

  for (std::size_t i = 0; i < count; ++i) {
    const std::string file = plan_file_name(i);
    const std::string stem = file.substr(0, file.size() - 4);
    for (FieldKind kind : options.analyses) {
      farm::Task t;
      std::string kind_name(field_kind_name(kind));
      for (char& ch : kind_name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      t.id = stem + "." + kind_name;
      t.input_path = file;
      t.analysis = kind;
      t.cell_size = options.cell_size;
      t.output_path = "fields/" + stem + "." + kind_name + ".f32";
      if (!failures[i].empty()) {
        t.status = farm::TaskStatus::Failed;
        t.message = failures[i];
      }
      manifest.tasks.push_back(std::move(t));
    }
  }
  manifest.save(out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace viscon
