// AArch64 only; NEON (with float64x2) is part of the base ISA there.

#include <arm_neon.h>

#include "variants.hpp"

namespace mixsearch::kernels::neon {

namespace {

// acc0 = (l0,l1), acc1 = (l2,l3), acc2 = (l4,l5), acc3 = (l6,l7).
inline double reduce(float64x2_t acc0, float64x2_t acc1, float64x2_t acc2, float64x2_t acc3) {
  const float64x2_t t01 = vaddq_f64(acc0, acc2);  // (l0+l4, l1+l5)
  const float64x2_t t23 = vaddq_f64(acc1, acc3);  // (l2+l6, l3+l7)
  const double s01 = vgetq_lane_f64(t01, 0) + vgetq_lane_f64(t01, 1);
  const double s23 = vgetq_lane_f64(t23, 0) + vgetq_lane_f64(t23, 1);
  return s01 + s23;
}

}  // namespace

double dot(const float* a, const float* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
  float64x2_t acc2 = vdupq_n_f64(0.0), acc3 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const float32x4_t a0 = vld1q_f32(a + i), a1 = vld1q_f32(a + i + 4);
    const float32x4_t b0 = vld1q_f32(b + i), b1 = vld1q_f32(b + i + 4);
    acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(a0)), vcvt_f64_f32(vget_low_f32(b0)));
    acc1 = vfmaq_f64(acc1, vcvt_high_f64_f32(a0), vcvt_high_f64_f32(b0));
    acc2 = vfmaq_f64(acc2, vcvt_f64_f32(vget_low_f32(a1)), vcvt_f64_f32(vget_low_f32(b1)));
    acc3 = vfmaq_f64(acc3, vcvt_high_f64_f32(a1), vcvt_high_f64_f32(b1));
  }
  double sum = reduce(acc0, acc1, acc2, acc3);
  for (; i < n; ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot(query, rows + r * dim, dim);
}

void accumulate(double* acc, const float* x, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const float32x4_t v = vld1q_f32(x + j);
    vst1q_f64(acc + j, vaddq_f64(vld1q_f64(acc + j), vcvt_f64_f32(vget_low_f32(v))));
    vst1q_f64(acc + j + 2, vaddq_f64(vld1q_f64(acc + j + 2), vcvt_high_f64_f32(v)));
  }
  for (; j < n; ++j) acc[j] += static_cast<double>(x[j]);
}

void blend(float* out, const float* a, const float* b, double wa, double wb, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(wa);
  const float64x2_t vb = vdupq_n_f64(wb);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const float32x4_t x = vld1q_f32(a + j);
    const float32x4_t y = vld1q_f32(b + j);
    const float64x2_t lo = vaddq_f64(vmulq_f64(va, vcvt_f64_f32(vget_low_f32(x))),
                                     vmulq_f64(vb, vcvt_f64_f32(vget_low_f32(y))));
    const float64x2_t hi =
        vaddq_f64(vmulq_f64(va, vcvt_high_f64_f32(x)), vmulq_f64(vb, vcvt_high_f64_f32(y)));
    vst1q_f32(out + j, vcvt_high_f32_f64(vcvt_f32_f64(lo), hi));
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
    const float32x4_t x = vld1q_f32(a + j);
    const float32x4_t y = vld1q_f32(b + j);
    const float64x2_t lo = vsubq_f64(vcvt_f64_f32(vget_low_f32(x)), vcvt_f64_f32(vget_low_f32(y)));
    const float64x2_t hi = vsubq_f64(vcvt_high_f64_f32(x), vcvt_high_f64_f32(y));
    vst1q_f32(out + j, vcvt_high_f32_f64(vcvt_f32_f64(lo), hi));
  }
  for (; j < n; ++j) {
    out[j] = static_cast<float>(static_cast<double>(a[j]) - static_cast<double>(b[j]));
  }
}

}  // namespace mixsearch::kernels::neon
