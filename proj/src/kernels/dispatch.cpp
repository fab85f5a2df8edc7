#include <atomic>
#include <cstdlib>
#include <string>

#include "mixsearch/error.hpp"
#include "mixsearch/kernels.hpp"
#include "variants.hpp"

namespace mixsearch::kernels {

namespace {

constexpr KernelTable kScalar{Isa::Scalar,      "scalar",         scalar::dot,     scalar::dot_rows,
                              scalar::accumulate, scalar::blend, scalar::subtract};
#if defined(MIXSEARCH_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2,       "avx2",         avx2::dot,     avx2::dot_rows,
                            avx2::accumulate, avx2::blend, avx2::subtract};
#endif
#if defined(MIXSEARCH_HAVE_NEON)
constexpr KernelTable kNeon{Isa::Neon,       "neon",         neon::dot,     neon::dot_rows,
                            neon::accumulate, neon::blend, neon::subtract};
#endif

const KernelTable& detect() {
#if defined(MIXSEARCH_HAVE_NEON)
  return kNeon;
#else
  if (supported(Isa::Avx2)) return table(Isa::Avx2);
  return kScalar;
#endif
}

Isa parse_isa(std::string_view name, bool& is_auto) {
  is_auto = false;
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  if (name == "neon") return Isa::Neon;
  if (name == "auto" || name.empty()) {
    is_auto = true;
    return Isa::Scalar;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

const KernelTable* initial() {
  if (const char* env = std::getenv("MIXSEARCH_KERNEL")) {
    bool is_auto = false;
    const Isa isa = parse_isa(env, is_auto);
    if (!is_auto) return &table(isa);
  }
  return &detect();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{initial()};
  return ptr;
}

}  // namespace

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(MIXSEARCH_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(MIXSEARCH_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    throw Error(ErrorCode::InvalidArgument, "kernel '" + std::string(isa_name(isa)) + "' not supported here");
  }
  switch (isa) {
#if defined(MIXSEARCH_HAVE_AVX2)
    case Isa::Avx2: return kAvx2;
#endif
#if defined(MIXSEARCH_HAVE_NEON)
    case Isa::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_release); }

void select(std::string_view name) {
  bool is_auto = false;
  const Isa isa = parse_isa(name, is_auto);
  current().store(is_auto ? &detect() : &table(isa), std::memory_order_release);
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace mixsearch::kernels
