#pragma once

// Per-ISA entry points. Only declarations here: the AVX2 translation unit is
// compiled with -mavx2 and must not instantiate anything shared with others.

#include <cstddef>

namespace mixsearch::kernels {

namespace scalar {
double dot(const float* a, const float* b, std::size_t n);
void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out);
void accumulate(double* acc, const float* x, std::size_t n);
void blend(float* out, const float* a, const float* b, double wa, double wb, std::size_t n);
void subtract(float* out, const float* a, const float* b, std::size_t n);
}  // namespace scalar

#if defined(MIXSEARCH_HAVE_AVX2)
namespace avx2 {
double dot(const float* a, const float* b, std::size_t n);
void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out);
void accumulate(double* acc, const float* x, std::size_t n);
void blend(float* out, const float* a, const float* b, double wa, double wb, std::size_t n);
void subtract(float* out, const float* a, const float* b, std::size_t n);
}  // namespace avx2
#endif

#if defined(MIXSEARCH_HAVE_NEON)
namespace neon {
double dot(const float* a, const float* b, std::size_t n);
void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out);
void accumulate(double* acc, const float* x, std::size_t n);
void blend(float* out, const float* a, const float* b, double wa, double wb, std::size_t n);
void subtract(float* out, const float* a, const float* b, std::size_t n);
}  // namespace neon
#endif

}  // namespace mixsearch::kernels
