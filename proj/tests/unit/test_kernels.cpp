#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <cmath>
#include <vector>

#include "mixsearch/kernels.hpp"
#include "mixsearch/random.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mixsearch;
using kernels::Isa;

namespace {

std::vector<const kernels::KernelTable*> accelerated() {
  std::vector<const kernels::KernelTable*> out;
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (kernels::supported(isa)) out.push_back(&kernels::table(isa));
  }
  return out;
}

std::vector<float> scaled_gaussian(Rng& rng, std::size_t n, double scale) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(scale * rng.gaussian());
  return v;
}

const std::size_t kDims[] = {0, 1, 2, 3, 7, 8, 9, 15, 16, 17, 31, 32, 33, 63, 64, 65, 127, 128, 129, 300, 768, 1023};

}  // namespace

TEST(Kernels, ScalarAlwaysSupported) {
  EXPECT_TRUE(kernels::supported(Isa::Scalar));
  EXPECT_EQ(kernels::table(Isa::Scalar).name, "scalar");
}

TEST(Kernels, UnsupportedIsaThrows) {
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (!kernels::supported(isa)) EXPECT_ERROR_CODE(kernels::table(isa), ErrorCode::InvalidArgument);
  }
  EXPECT_ERROR_CODE(kernels::select(std::string_view("sse9")), ErrorCode::InvalidArgument);
}

TEST(Kernels, SelectSwitchesActiveTable) {
  kernels::select(Isa::Scalar);
  EXPECT_EQ(kernels::active().isa, Isa::Scalar);
  kernels::select(std::string_view("auto"));
  EXPECT_TRUE(kernels::supported(kernels::active().isa));
}

TEST(Kernels, ScalarDotMatchesLongDoubleOracle) {
  Rng rng(7);
  const auto& s = kernels::table(Isa::Scalar);
  for (std::size_t n : kDims) {
    const auto a = scaled_gaussian(rng, n, 1.0);
    const auto b = scaled_gaussian(rng, n, 1.0);
    long double ref = 0.0L;
    for (std::size_t i = 0; i < n; ++i) ref += static_cast<long double>(a[i]) * b[i];
    EXPECT_NEAR(s.dot(a.data(), b.data(), n), static_cast<double>(ref), 1e-12 * (1.0 + std::sqrt(double(n)))) << n;
  }
}

TEST(Kernels, DotIsExactOnCoarseInputs) {
  Rng rng(8);
  for (std::size_t n : kDims) {
    const auto a = oracle::coarse_vector(rng, n);
    const auto b = oracle::coarse_vector(rng, n);
    double ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref += static_cast<double>(a[i]) * b[i];
    EXPECT_EQ(kernels::table(Isa::Scalar).dot(a.data(), b.data(), n), ref);
  }
}

// Each accelerated table must reproduce the scalar reference bit for bit.
TEST(Kernels, AcceleratedVariantsAreBitExact) {
  const auto& ref = kernels::table(Isa::Scalar);
  const auto variants = accelerated();
  if (variants.empty()) GTEST_SKIP() << "no accelerated kernel on this CPU";
  Rng rng(9);
  for (const auto* v : variants) {
    for (std::size_t n : kDims) {
      for (double scale : {1e-30, 1.0, 1e20}) {
        const auto a = scaled_gaussian(rng, n, scale);
        const auto b = scaled_gaussian(rng, n, scale);
        EXPECT_EQ(std::bit_cast<std::uint64_t>(v->dot(a.data(), b.data(), n)),
                  std::bit_cast<std::uint64_t>(ref.dot(a.data(), b.data(), n)))
            << v->name << " n=" << n;

        std::vector<double> acc_ref(n, 0.25), acc_v(n, 0.25);
        ref.accumulate(acc_ref.data(), a.data(), n);
        v->accumulate(acc_v.data(), a.data(), n);
        EXPECT_EQ(acc_ref, acc_v) << v->name << " accumulate n=" << n;

        std::vector<float> out_ref(n), out_v(n);
        ref.blend(out_ref.data(), a.data(), b.data(), 0.3, 0.7, n);
        v->blend(out_v.data(), a.data(), b.data(), 0.3, 0.7, n);
        EXPECT_EQ(0, std::memcmp(out_ref.data(), out_v.data(), n * sizeof(float))) << v->name << " blend n=" << n;

        ref.subtract(out_ref.data(), a.data(), b.data(), n);
        v->subtract(out_v.data(), a.data(), b.data(), n);
        EXPECT_EQ(0, std::memcmp(out_ref.data(), out_v.data(), n * sizeof(float))) << v->name << " subtract n=" << n;
      }
    }
  }
}

TEST(Kernels, DotRowsMatchesPerRowDot) {
  Rng rng(10);
  std::vector<const kernels::KernelTable*> all{&kernels::table(Isa::Scalar)};
  for (const auto* v : accelerated()) all.push_back(v);
  for (const auto* t : all) {
    for (std::size_t dim : {1u, 5u, 8u, 13u, 64u, 100u}) {
      for (std::size_t rows : {1u, 2u, 3u, 7u}) {
        const auto q = scaled_gaussian(rng, dim, 1.0);
        const auto m = scaled_gaussian(rng, dim * rows, 1.0);
        std::vector<double> out(rows);
        t->dot_rows(q.data(), m.data(), rows, dim, out.data());
        for (std::size_t r = 0; r < rows; ++r) {
          EXPECT_EQ(std::bit_cast<std::uint64_t>(out[r]),
                    std::bit_cast<std::uint64_t>(kernels::table(Isa::Scalar).dot(q.data(), m.data() + r * dim, dim)))
              << t->name << " dim=" << dim << " row=" << r;
        }
      }
    }
  }
}

TEST(Kernels, ElementwiseMatchesDefinition) {
  const auto& s = kernels::table(Isa::Scalar);
  const std::vector<float> a{1.0f, -2.0f, 0.5f}, b{3.0f, 4.0f, -0.5f};
  std::vector<float> out(3);
  s.blend(out.data(), a.data(), b.data(), 0.25, 0.75, 3);
  EXPECT_FLOAT_EQ(out[0], 2.5f);
  EXPECT_FLOAT_EQ(out[1], 2.5f);
  EXPECT_FLOAT_EQ(out[2], -0.25f);
  s.subtract(out.data(), a.data(), b.data(), 3);
  EXPECT_EQ(out, (std::vector<float>{-2.0f, -6.0f, 1.0f}));
  std::vector<double> acc{1.0, 1.0, 1.0};
  s.accumulate(acc.data(), a.data(), 3);
  EXPECT_EQ(acc, (std::vector<double>{2.0, -1.0, 1.5}));
}
