#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference and, where the
// CPU supports it, an AVX2 variant that must produce bit-identical results.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace viscon::kernels {

enum class Isa { Scalar, Avx2 };

inline constexpr std::int32_t kSweepInf = 1 << 28;

struct MinMax {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;  // number of defined entries
};

struct KernelTable {
  Isa isa;
  std::string_view name;

  // out[i] = blocked[i] ? 0 : min(prev[i] + 1, kSweepInf)
  void (*sweep_down)(const std::int32_t* prev, const std::uint8_t* blocked, std::int32_t* out,
                     std::size_t n);
  // out[i] = min(out[i], next[i] + 1)
  void (*sweep_up_min)(const std::int32_t* next, std::int32_t* out, std::size_t n);

  MinMax (*minmax_masked)(const double* values, const std::uint8_t* mask, std::size_t n);
  // Linear remap of defined values onto 0..255 (rounded half away from zero);
  // undefined entries become 0. Requires hi > lo.
  void (*remap_gray)(const double* values, const std::uint8_t* mask, std::size_t n, double lo,
                     double hi, bool inverted, std::uint8_t* out);

  // dst |= src
  void (*bitset_or)(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
  // next &= ~visited; visited |= next; returns popcount(next)
  std::size_t (*bitset_advance)(std::uint64_t* next, std::uint64_t* visited, std::size_t words);
  std::size_t (*popcount)(const std::uint64_t* words, std::size_t n);
};

bool isa_available(Isa isa) noexcept;
const KernelTable& kernel_table(Isa isa);  // throws if unavailable

// Active table: best available unless overridden with select_isa.
const KernelTable& active();
void select_isa(std::optional<Isa> isa);  // nullopt restores auto-detection

std::optional<Isa> parse_isa(std::string_view name);  // "scalar", "avx2", "auto" -> nullopt

namespace detail {
extern const KernelTable kScalarTable;
const KernelTable* avx2_table() noexcept;  // nullptr when not compiled in
}  // namespace detail

}  // namespace viscon::kernels
