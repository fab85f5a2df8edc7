// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "variants.hpp"

namespace mixsearch::kernels::avx2 {

namespace {

inline __m256d widen_lo(__m256 v) { return _mm256_cvtps_pd(_mm256_castps256_ps128(v)); }
inline __m256d widen_hi(__m256 v) { return _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)); }

// ((l0+l4)+(l1+l5)) + ((l2+l6)+(l3+l7)) with lo = l0..l3, hi = l4..l7.
inline double reduce(__m256d lo, __m256d hi) {
  const __m256d t = _mm256_add_pd(lo, hi);
  const __m128d t01 = _mm256_castpd256_pd128(t);
  const __m128d t23 = _mm256_extractf128_pd(t, 1);
  const double s01 = _mm_cvtsd_f64(t01) + _mm_cvtsd_f64(_mm_unpackhi_pd(t01, t01));
  const double s23 = _mm_cvtsd_f64(t23) + _mm_cvtsd_f64(_mm_unpackhi_pd(t23, t23));
  return s01 + s23;
}

}  // namespace

double dot(const float* a, const float* b, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 va = _mm256_loadu_ps(a + i);
    const __m256 vb = _mm256_loadu_ps(b + i);
    lo = _mm256_fmadd_pd(widen_lo(va), widen_lo(vb), lo);
    hi = _mm256_fmadd_pd(widen_hi(va), widen_hi(vb), hi);
  }
  double sum = reduce(lo, hi);
  for (; i < n; ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out) {
  std::size_t r = 0;
  // Two rows per pass share the widened query registers.
  for (; r + 2 <= n_rows; r += 2) {
    const float* r0 = rows + r * dim;
    const float* r1 = r0 + dim;
    __m256d lo0 = _mm256_setzero_pd(), hi0 = _mm256_setzero_pd();
    __m256d lo1 = _mm256_setzero_pd(), hi1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= dim; i += 8) {
      const __m256 vq = _mm256_loadu_ps(query + i);
      const __m256d qlo = widen_lo(vq);
      const __m256d qhi = widen_hi(vq);
      const __m256 v0 = _mm256_loadu_ps(r0 + i);
      const __m256 v1 = _mm256_loadu_ps(r1 + i);
      lo0 = _mm256_fmadd_pd(qlo, widen_lo(v0), lo0);
      hi0 = _mm256_fmadd_pd(qhi, widen_hi(v0), hi0);
      lo1 = _mm256_fmadd_pd(qlo, widen_lo(v1), lo1);
      hi1 = _mm256_fmadd_pd(qhi, widen_hi(v1), hi1);
    }
    double s0 = reduce(lo0, hi0);
    double s1 = reduce(lo1, hi1);
    for (std::size_t j = i; j < dim; ++j) {
      const double q = static_cast<double>(query[j]);
      s0 += q * static_cast<double>(r0[j]);
      s1 += q * static_cast<double>(r1[j]);
    }
    out[r] = s0;
    out[r + 1] = s1;
  }
  for (; r < n_rows; ++r) out[r] = dot(query, rows + r * dim, dim);
}

void accumulate(double* acc, const float* x, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d sum = _mm256_add_pd(_mm256_loadu_pd(acc + j), _mm256_cvtps_pd(_mm_loadu_ps(x + j)));
    _mm256_storeu_pd(acc + j, sum);
  }
  for (; j < n; ++j) acc[j] += static_cast<double>(x[j]);
}

void blend(float* out, const float* a, const float* b, double wa, double wb, std::size_t n) {
  const __m256d va = _mm256_set1_pd(wa);
  const __m256d vb = _mm256_set1_pd(wb);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d ta = _mm256_mul_pd(va, _mm256_cvtps_pd(_mm_loadu_ps(a + j)));
    const __m256d tb = _mm256_mul_pd(vb, _mm256_cvtps_pd(_mm_loadu_ps(b + j)));
    _mm_storeu_ps(out + j, _mm256_cvtpd_ps(_mm256_add_pd(ta, tb)));
  }
  for (; j < n; ++j) {
    const double ta = wa * static_cast<double>(a[j]);
    const double tb = wb * static_cast<double>(b[j]);
    out[j] = static_cast<float>(ta + tb);
  }
}

void subtract(float* out, const float* a, const float* b, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + j)), _mm256_cvtps_pd(_mm_loadu_ps(b + j)));
    _mm_storeu_ps(out + j, _mm256_cvtpd_ps(d));
  }
  for (; j < n; ++j) {
    out[j] = static_cast<float>(static_cast<double>(a[j]) - static_cast<double>(b[j]));
  }
}

}  // namespace mixsearch::kernels::avx2
