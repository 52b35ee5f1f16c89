#include <algorithm>
#include <bit>
#include <cmath>

#include "viscon/kernels.hpp"

namespace viscon::kernels {
namespace {

void sweep_down(const std::int32_t* prev, const std::uint8_t* blocked, std::int32_t* out,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = blocked[i] ? 0 : std::min(prev[i] + 1, kSweepInf);
}

void sweep_up_min(const std::int32_t* next, std::int32_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::min(out[i], next[i] + 1);
}

MinMax minmax_masked(const double* values, const std::uint8_t* mask, std::size_t n) {
  MinMax r;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    if (r.count == 0) {
      r.min = r.max = values[i];
    } else {
      r.min = std::min(r.min, values[i]);
      r.max = std::max(r.max, values[i]);
    }
    ++r.count;
  }
  return r;
}

// x >= 0 always here; trunc + exact fractional compare gives half-away rounding
// without the x + 0.5 double-rounding hazard.
inline std::uint8_t round_gray(double x) {
  double t = std::trunc(x);
  double g = (x - t >= 0.5) ? t + 1.0 : t;
  return static_cast<std::uint8_t>(std::clamp(g, 0.0, 255.0));
}

void remap_gray(const double* values, const std::uint8_t* mask, std::size_t n, double lo,
                double hi, bool inverted, std::uint8_t* out) {
  const double span = hi - lo;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) {
      out[i] = 0;
      continue;
    }
    double num = inverted ? hi - values[i] : values[i] - lo;
    out[i] = round_gray(255.0 * num / span);
  }
}

void bitset_or(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
  for (std::size_t i = 0; i < words; ++i) dst[i] |= src[i];
}

std::size_t bitset_advance(std::uint64_t* next, std::uint64_t* visited, std::size_t words) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < words; ++i) {
    std::uint64_t fresh = next[i] & ~visited[i];
    next[i] = fresh;
    visited[i] |= fresh;
    count += static_cast<std::size_t>(std::popcount(fresh));
  }
  return count;
}

std::size_t popcount(const std::uint64_t* words, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += static_cast<std::size_t>(std::popcount(words[i]));
  return count;
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{
    Isa::Scalar, "scalar", sweep_down, sweep_up_min, minmax_masked, remap_gray, bitset_or, bitset_advance, popcount,
};
}  // namespace detail

}  // namespace viscon::kernels
