#include "variants.hpp"

namespace mixsearch::kernels::scalar {

double dot(const float* a, const float* b, std::size_t n) {
  double lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) {
      lane[l] += static_cast<double>(a[i + l]) * static_cast<double>(b[i + l]);
    }
  }
  double sum = ((lane[0] + lane[4]) + (lane[1] + lane[5])) + ((lane[2] + lane[6]) + (lane[3] + lane[7]));
  for (; i < n; ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot(query, rows + r * dim, dim);
}

void accumulate(double* acc, const float* x, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) acc[j] += static_cast<double>(x[j]);
}

void blend(float* out, const float* a, const float* b, double wa, double wb, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double ta = wa * static_cast<double>(a[j]);
    const double tb = wb * static_cast<double>(b[j]);
    out[j] = static_cast<float>(ta + tb);
  }
}

void subtract(float* out, const float* a, const float* b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = static_cast<float>(static_cast<double>(a[j]) - static_cast<double>(b[j]));
  }
}

}  // namespace mixsearch::kernels::scalar
