#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <system_error>

#include "viscon/plan_grid.hpp"

namespace viscon {
namespace fs = std::filesystem;

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::IoFailure, "read failed for " + path.string());
  return bytes;
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(Errc::IoFailure, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::IoFailure, "cannot rename onto " + path.string());
  }
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number() {
    skip_space_and_comments();
    long v = 0;
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > std::numeric_limits<int>::max()) throw Error(Errc::MalformedImage, "dimension too large");
      ++pos_;
    }
    if (pos_ == start) throw Error(Errc::MalformedImage, "expected a number in PGM header");
    return v;
  }

  std::size_t pos_ = 0;

 private:
  const std::vector<std::uint8_t>& bytes_;
};

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
  return bytes;
}

}  // namespace

GrayImage load_gray(const fs::path& path) {
  auto bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw Error(Errc::MalformedImage, path.string() + ": not a binary PGM (P5)");
  HeaderReader r(bytes);
  r.pos_ = 2;
  const long w = r.number();
  const long h = r.number();
  const long maxval = r.number();
  if (w < 1 || h < 1) throw Error(Errc::MalformedImage, path.string() + ": bad dimensions");
  if (maxval != 255) throw Error(Errc::MalformedImage, path.string() + ": maxval must be 255");
  if (r.pos_ >= bytes.size() || !std::isspace(bytes[r.pos_]))
    throw Error(Errc::MalformedImage, path.string() + ": missing header terminator");
  ++r.pos_;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - r.pos_ < n) throw Error(Errc::MalformedImage, path.string() + ": truncated pixel data");
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  std::memcpy(img.pixels.data(), bytes.data() + r.pos_, n);
  return img;
}

void save_gray(const GrayImage& image, const fs::path& path) {
  write_file_atomic(path, encode_pgm(image));
}

GrayImage to_image(const OccupancyGrid& grid) {
  GrayImage img(grid.width(), grid.height());
  for (CellIndex i = 0; i < grid.size(); ++i) img.pixels[i] = grid.is_free(i) ? 255 : 0;
  return img;
}

OccupancyGrid from_image(const GrayImage& image, double cell_size) {
  std::vector<Occupancy> cells(image.pixels.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    cells[i] = image.pixels[i] < kFreeThreshold ? Occupancy::Blocked : Occupancy::Free;
  return OccupancyGrid(image.width, image.height, cell_size, std::move(cells));
}

OccupancyGrid load_occupancy(const fs::path& path, double cell_size) {
  return from_image(load_gray(path), cell_size);
}

void save_occupancy(const OccupancyGrid& grid, const fs::path& path) {
  save_gray(to_image(grid), path);
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

}  // namespace

void save_field_f32(const AnalysisField& field, const fs::path& path) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * field.size());
  put_u32(out, static_cast<std::uint32_t>(field.width));
  put_u32(out, static_cast<std::uint32_t>(field.height));
  for (std::size_t i = 0; i < field.size(); ++i) {
    float v = field.defined[i] ? static_cast<float>(field.values[i]) : std::numeric_limits<float>::quiet_NaN();
    put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  write_file_atomic(path, out);
}

AnalysisField load_field_f32(const fs::path& path, FieldKind kind) {
  auto bytes = read_file(path);
  if (bytes.size() < 8) throw Error(Errc::MalformedImage, path.string() + ": truncated field header");
  const std::uint32_t w = get_u32(bytes.data());
  const std::uint32_t h = get_u32(bytes.data() + 4);
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16))
    throw Error(Errc::MalformedImage, path.string() + ": bad field dimensions");
  const std::size_t n = std::size_t(w) * h;
  if (bytes.size() != 8 + 4 * n) throw Error(Errc::MalformedImage, path.string() + ": field size mismatch");
  AnalysisField f;
  f.width = static_cast<int>(w);
  f.height = static_cast<int>(h);
  f.kind = kind;
  f.values.resize(n);
  f.defined.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    float v = std::bit_cast<float>(get_u32(bytes.data() + 8 + 4 * i));
    f.defined[i] = std::isnan(v) ? 0 : 1;
    f.values[i] = std::isnan(v) ? 0.0 : static_cast<double>(v);
  }
  return f;
}

}  // namespace viscon
