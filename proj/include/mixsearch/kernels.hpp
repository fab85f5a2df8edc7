#pragma once

// Data-parallel inner loops used by calibration, fusion and search.
//
// Every ISA variant reproduces the scalar reference bit for bit:
//  - dot: float inputs are widened to double, so each product is exact and a
//    fused multiply-add rounds exactly like a separate add. Products are
//    accumulated into 8 interleaved lanes (element i goes to lane i % 8 for the
//    8-aligned prefix), lanes are reduced as
//    ((l0+l4)+(l1+l5)) + ((l2+l6)+(l3+l7)), then the tail is added in order.
//  - accumulate / blend / subtract are elementwise, computed in double with
//    separate multiply and add, rounded once to float on store.
// The library is built with -ffp-contract=off so the compiler cannot fuse the
// elementwise multiply-adds differently per variant.

#include <cstddef>
#include <string_view>

namespace mixsearch::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  std::string_view name;
  double (*dot)(const float* a, const float* b, std::size_t n);
  // out[r] = dot(query, rows + r * dim) for r in [0, n_rows).
  void (*dot_rows)(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                   double* out);
  // acc[j] += x[j]
  void (*accumulate)(double* acc, const float* x, std::size_t n);
  // out[j] = wa * a[j] + wb * b[j]
  void (*blend)(float* out, const float* a, const float* b, double wa, double wb, std::size_t n);
  // out[j] = a[j] - b[j]
  void (*subtract)(float* out, const float* a, const float* b, std::size_t n);
};

bool supported(Isa isa) noexcept;
// Throws Error(InvalidArgument) when the ISA is not available on this CPU.
const KernelTable& table(Isa isa);
// Best supported ISA, unless MIXSEARCH_KERNEL names one ("scalar", "avx2",
// "neon", "auto") or select() was called.
const KernelTable& active();
void select(Isa isa);
// Accepts the names above; "auto" restores detection.
void select(std::string_view name);
std::string_view isa_name(Isa isa) noexcept;

}  // namespace mixsearch::kernels
