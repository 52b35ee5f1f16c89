#include <atomic>
#include <stdexcept>
#include <string>

#include "viscon/kernels.hpp"

namespace viscon::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
  return false;
#endif
}

const KernelTable* best_table() noexcept {
  if (detail::avx2_table() != nullptr && cpu_has_avx2()) return detail::avx2_table();
  return &detail::kScalarTable;
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
      return detail::avx2_table() != nullptr && cpu_has_avx2();
  }
  return false;
}

const KernelTable& kernel_table(Isa isa) {
  if (!isa_available(isa)) throw std::runtime_error("kernel ISA not available on this CPU");
  return isa == Isa::Avx2 ? *detail::avx2_table() : detail::kScalarTable;
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = best_table();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void select_isa(std::optional<Isa> isa) {
  g_active.store(isa ? &kernel_table(*isa) : best_table(), std::memory_order_release);
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  if (name == "auto") return std::nullopt;
  throw std::invalid_argument("unknown kernel ISA '" + std::string(name) + "'");
}

}  // namespace viscon::kernels
