#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "viscon/kernels.hpp"

using namespace viscon::kernels;

namespace {

std::vector<const KernelTable*> tables() {
  std::vector<const KernelTable*> out{&kernel_table(Isa::Scalar)};
  if (isa_available(Isa::Avx2)) out.push_back(&kernel_table(Isa::Avx2));
  return out;
}

const std::size_t kLengths[] = {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 31, 33, 64, 100, 257};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("dispatch and ISA names") {
  CHECK(isa_available(Isa::Scalar));
  CHECK(parse_isa("scalar") == Isa::Scalar);
  CHECK(parse_isa("avx2") == Isa::Avx2);
  CHECK_FALSE(parse_isa("auto").has_value());
  CHECK_THROWS(parse_isa("sse9"));
  select_isa(Isa::Scalar);
  CHECK(active().isa == Isa::Scalar);
  select_isa(std::nullopt);
  CHECK(active().isa == (isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar));
  MESSAGE("active kernels: " << active().name);
}

TEST_CASE("column sweeps agree across ISAs") {
  std::mt19937_64 rng(1);
  for (std::size_t n : kLengths) {
    std::vector<std::int32_t> prev(n), next(n);
    std::vector<std::uint8_t> blocked(n);
    for (std::size_t i = 0; i < n; ++i) {
      prev[i] = rng() % 3 == 0 ? kSweepInf : static_cast<std::int32_t>(rng() % 50);
      next[i] = static_cast<std::int32_t>(rng() % 60);
      blocked[i] = rng() % 4 == 0;
    }
    std::vector<std::int32_t> ref_down(n), ref_up;
    kernel_table(Isa::Scalar).sweep_down(prev.data(), blocked.data(), ref_down.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(ref_down[i] == (blocked[i] ? 0 : std::min(prev[i] + 1, kSweepInf)));
    ref_up = ref_down;
    kernel_table(Isa::Scalar).sweep_up_min(next.data(), ref_up.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(ref_up[i] == std::min(ref_down[i], next[i] + 1));
    for (const auto* t : tables()) {
      std::vector<std::int32_t> down(n);
      t->sweep_down(prev.data(), blocked.data(), down.data(), n);
      CHECK(down == ref_down);
      t->sweep_up_min(next.data(), down.data(), n);
      CHECK(down == ref_up);
    }
  }
}

TEST_CASE("masked min/max and gray remap agree bit for bit") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> val(-50.0, 400.0);
  for (std::size_t n : kLengths) {
    std::vector<double> v(n);
    std::vector<std::uint8_t> mask(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = val(rng);
      mask[i] = rng() % 5 != 0;
    }
    // Values landing exactly on .5 after scaling exercise the rounding rule.
    if (n > 2) {
      v[0] = 0.0;
      v[1] = 255.0;
      v[2] = 127.5;
      mask[0] = mask[1] = mask[2] = 1;
    }
    const auto ref = kernel_table(Isa::Scalar).minmax_masked(v.data(), mask.data(), n);
    std::size_t count = 0;
    for (auto m : mask) count += m;
    CHECK(ref.count == count);
    for (const auto* t : tables()) {
      const auto mm = t->minmax_masked(v.data(), mask.data(), n);
      CHECK(mm.count == ref.count);
      if (count) {
        CHECK(std::memcmp(&mm.min, &ref.min, sizeof(double)) == 0);
        CHECK(std::memcmp(&mm.max, &ref.max, sizeof(double)) == 0);
      }
    }
    for (bool inverted : {false, true}) {
      std::vector<std::uint8_t> expect(n);
      kernel_table(Isa::Scalar).remap_gray(v.data(), mask.data(), n, 0.0, 255.0, inverted, expect.data());
      for (std::size_t i = 0; i < n; ++i)
        if (!mask[i]) CHECK(expect[i] == 0);
      if (n > 2) {
        CHECK(expect[0] == (inverted ? 255 : 0));
        CHECK(expect[2] == 128);
      }
      for (const auto* t : tables()) {
        std::vector<std::uint8_t> got(n);
        t->remap_gray(v.data(), mask.data(), n, 0.0, 255.0, inverted, got.data());
        CHECK(got == expect);
        t->remap_gray(v.data(), mask.data(), n, -13.25, 97.0, inverted, got.data());
        std::vector<std::uint8_t> e2(n);
        kernel_table(Isa::Scalar).remap_gray(v.data(), mask.data(), n, -13.25, 97.0, inverted, e2.data());
        CHECK(got == e2);
      }
    }
  }
}

TEST_CASE("bitset kernels agree across ISAs") {
  std::mt19937_64 rng(3);
  for (std::size_t n : kLengths) {
    std::vector<std::uint64_t> a(n), b(n);
    for (auto& w : a) w = rng();
    for (auto& w : b) w = rng() & rng();
    std::size_t ref_pop = 0;
    for (auto w : a) ref_pop += static_cast<std::size_t>(__builtin_popcountll(w));
    for (const auto* t : tables()) {
      CHECK(t->popcount(a.data(), n) == ref_pop);

      auto dst = a;
      t->bitset_or(dst.data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(dst[i] == (a[i] | b[i]));

      auto next = a, visited = b;
      const std::size_t added = t->bitset_advance(next.data(), visited.data(), n);
      std::size_t expect_added = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t fresh = a[i] & ~b[i];
        CHECK(next[i] == fresh);
        CHECK(visited[i] == (a[i] | b[i]));
        expect_added += static_cast<std::size_t>(__builtin_popcountll(fresh));
      }
      CHECK(added == expect_added);
    }
  }
}

}  // TEST_SUITE
