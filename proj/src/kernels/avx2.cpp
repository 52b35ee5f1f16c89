#include "viscon/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace viscon::kernels {
namespace {

void sweep_down(const std::int32_t* prev, const std::uint8_t* blocked, std::int32_t* out,
                std::size_t n) {
  const __m256i one = _mm256_set1_epi32(1);
  const __m256i inf = _mm256_set1_epi32(kSweepInf);
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i p = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(prev + i));
    __m128i b8 = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(blocked + i));
    __m256i b = _mm256_cvtepu8_epi32(b8);
    __m256i is_blocked = _mm256_cmpgt_epi32(b, zero);
    __m256i d = _mm256_min_epi32(_mm256_add_epi32(p, one), inf);
    d = _mm256_andnot_si256(is_blocked, d);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), d);
  }
  for (; i < n; ++i) out[i] = blocked[i] ? 0 : std::min(prev[i] + 1, kSweepInf);
}

void sweep_up_min(const std::int32_t* next, std::int32_t* out, std::size_t n) {
  const __m256i one = _mm256_set1_epi32(1);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i nx = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(next + i));
    __m256i o = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(out + i));
    o = _mm256_min_epi32(o, _mm256_add_epi32(nx, one));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), o);
  }
  for (; i < n; ++i) out[i] = std::min(out[i], next[i] + 1);
}

inline __m256d mask_from_bytes(const std::uint8_t* mask) {
  std::int32_t m32;
  __builtin_memcpy(&m32, mask, 4);
  __m256i m64 = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(m32));
  return _mm256_castsi256_pd(_mm256_cmpgt_epi64(m64, _mm256_setzero_si256()));
}

MinMax minmax_masked(const double* values, const std::uint8_t* mask, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  __m256d vmin = _mm256_set1_pd(inf);
  __m256d vmax = _mm256_set1_pd(-inf);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = mask_from_bytes(mask + i);
    __m256d v = _mm256_loadu_pd(values + i);
    vmin = _mm256_min_pd(vmin, _mm256_blendv_pd(_mm256_set1_pd(inf), v, m));
    vmax = _mm256_max_pd(vmax, _mm256_blendv_pd(_mm256_set1_pd(-inf), v, m));
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(m))));
  }
  alignas(32) double lo[4];
  alignas(32) double hi[4];
  _mm256_store_pd(lo, vmin);
  _mm256_store_pd(hi, vmax);
  double mn = std::min(std::min(lo[0], lo[1]), std::min(lo[2], lo[3]));
  double mx = std::max(std::max(hi[0], hi[1]), std::max(hi[2], hi[3]));
  for (; i < n; ++i) {
    if (!mask[i]) continue;
    mn = std::min(mn, values[i]);
    mx = std::max(mx, values[i]);
    ++count;
  }
  if (count == 0) return {};
  return {mn, mx, count};
}

inline std::uint8_t round_gray(double x) {
  double t = std::trunc(x);
  double g = (x - t >= 0.5) ? t + 1.0 : t;
  return static_cast<std::uint8_t>(std::clamp(g, 0.0, 255.0));
}

void remap_gray(const double* values, const std::uint8_t* mask, std::size_t n, double lo,
                double hi, bool inverted, std::uint8_t* out) {
  const double span = hi - lo;
  const __m256d vspan = _mm256_set1_pd(span);
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  const __m256d k255 = _mm256_set1_pd(255.0);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(values + i);
    __m256d num = inverted ? _mm256_sub_pd(vhi, v) : _mm256_sub_pd(v, vlo);
    __m256d x = _mm256_div_pd(_mm256_mul_pd(k255, num), vspan);
    __m256d t = _mm256_round_pd(x, _MM_FROUND_TO_ZERO | _MM_FROUND_NO_EXC);
    __m256d up = _mm256_cmp_pd(_mm256_sub_pd(x, t), half, _CMP_GE_OQ);
    __m256d g = _mm256_add_pd(t, _mm256_and_pd(up, one));
    g = _mm256_min_pd(_mm256_max_pd(g, zero), k255);
    g = _mm256_and_pd(g, mask_from_bytes(mask + i));
    __m128i g32 = _mm256_cvttpd_epi32(g);
    __m128i g16 = _mm_packus_epi32(g32, g32);
    __m128i g8 = _mm_packus_epi16(g16, g16);
    std::int32_t packed = _mm_cvtsi128_si32(g8);
    __builtin_memcpy(out + i, &packed, 4);
  }
  for (; i < n; ++i) {
    if (!mask[i]) {
      out[i] = 0;
      continue;
    }
    double num = inverted ? hi - values[i] : values[i] - lo;
    out[i] = round_gray(255.0 * num / span);
  }
}

void bitset_or(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
  std::size_t i = 0;
  for (; i + 4 <= words; i += 4) {
    __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_or_si256(d, s));
  }
  for (; i < words; ++i) dst[i] |= src[i];
}

// Nibble-lookup popcount, summed per 64-bit lane.
inline __m256i popcount_lanes(__m256i v) {
  const __m256i lookup =
      _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1,
                       2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i lo = _mm256_and_si256(v, low_mask);
  __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
  return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

inline std::size_t hsum_u64(__m256i acc) {
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  return static_cast<std::size_t>(lanes[0] + lanes[1] + lanes[2] + lanes[3]);
}

std::size_t bitset_advance(std::uint64_t* next, std::uint64_t* visited, std::size_t words) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= words; i += 4) {
    __m256i nx = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(next + i));
    __m256i vis = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(visited + i));
    __m256i fresh = _mm256_andnot_si256(vis, nx);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(next + i), fresh);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(visited + i), _mm256_or_si256(vis, fresh));
    acc = _mm256_add_epi64(acc, popcount_lanes(fresh));
  }
  std::size_t count = hsum_u64(acc);
  for (; i < words; ++i) {
    std::uint64_t fresh = next[i] & ~visited[i];
    next[i] = fresh;
    visited[i] |= fresh;
    count += static_cast<std::size_t>(std::popcount(fresh));
  }
  return count;
}

std::size_t popcount(const std::uint64_t* words, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_epi64(
        acc, popcount_lanes(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(words + i))));
  std::size_t count = hsum_u64(acc);
  for (; i < n; ++i) count += static_cast<std::size_t>(std::popcount(words[i]));
  return count;
}

const KernelTable kAvx2Table{
    Isa::Avx2, "avx2", sweep_down, sweep_up_min, minmax_masked, remap_gray, bitset_or, bitset_advance, popcount,
};

}  // namespace

namespace detail {
const KernelTable* avx2_table() noexcept { return &kAvx2Table; }
}  // namespace detail

}  // namespace viscon::kernels

#else

namespace viscon::kernels::detail {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace viscon::kernels::detail

#endif
