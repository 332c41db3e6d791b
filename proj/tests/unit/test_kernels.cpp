#include <doctest.h>

#include <bit>
#include <cstdint>
#include <vector>

#include "aeg/error.hpp"
#include "aeg/kernels.hpp"
#include "oracles.hpp"

using namespace aeg;
using namespace aeg::simd;

namespace {

std::vector<Isa> available() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (simd::isa_available(isa)) out.push_back(isa);
  }
  return out;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace

TEST_CASE("scalar kernels match long-double references") {
  Rng rng(11);
  const KernelTable& k = simd::kernels_for(Isa::Scalar);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 1001u}) {
    const auto a = oracle::random_vector(rng, n);
    const auto b = oracle::random_vector(rng, n);
    CHECK(k.dot(a.data(), b.data(), n) == doctest::Approx(oracle::naive_dot(a, b)).epsilon(1e-12));
    long double abs_sum = 0.0L;
    for (double v : a) abs_sum += std::fabs(v);
    CHECK(k.asum(a.data(), n) == doctest::Approx(static_cast<double>(abs_sum)).epsilon(1e-12));
  }
}

TEST_CASE("reduction order is the documented 4-lane schedule") {
  // 1e16 + 1 - 1e16 depends on association; lanes are (l0 + l1) + (l2 + l3).
  const std::vector<double> a{1e16, 1.0, -1e16, 1.0, 1.0};
  const std::vector<double> ones(5, 1.0);
  const double lanes[4] = {1e16 + 1.0, 1.0, -1e16, 1.0};
  const double expect = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (Isa isa : available()) {
    CAPTURE(simd::isa_name(isa));
    CHECK(same_bits(simd::kernels_for(isa).dot(a.data(), ones.data(), a.size()), expect));
  }
}

TEST_CASE("every available variant is bit-identical to scalar") {
  Rng rng(12);
  const KernelTable& ref = simd::kernels_for(Isa::Scalar);
  for (Isa isa : available()) {
    CAPTURE(simd::isa_name(isa));
    const KernelTable& k = simd::kernels_for(isa);
    for (std::size_t n = 0; n < 70; ++n) {
      for (std::size_t offset : {0u, 1u, 3u}) {
        auto a = oracle::random_vector(rng, n + offset, 3.0);
        auto b = oracle::random_vector(rng, n + offset, 0.5);
        const double* pa = a.data() + offset;
        const double* pb = b.data() + offset;
        REQUIRE(same_bits(k.dot(pa, pb, n), ref.dot(pa, pb, n)));
        REQUIRE(same_bits(k.asum(pa, n), ref.asum(pa, n)));

        std::vector<double> y1(b.begin() + static_cast<std::ptrdiff_t>(offset), b.end());
        std::vector<double> y2 = y1;
        k.axpy(-0.375, pa, y1.data(), n);
        ref.axpy(-0.375, pa, y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(same_bits(y1[i], y2[i]));
      }
    }
    for (std::size_t rows : {1u, 3u, 6u}) {
      for (std::size_t cols : {1u, 5u, 21u}) {
        const auto m = oracle::random_vector(rng, rows * cols);
        const auto x = oracle::random_vector(rng, cols);
        std::vector<double> y1(rows), y2(rows);
        k.gemv(m.data(), rows, cols, x.data(), y1.data());
        ref.gemv(m.data(), rows, cols, x.data(), y2.data());
        for (std::size_t r = 0; r < rows; ++r) REQUIRE(same_bits(y1[r], y2[r]));
      }
    }
  }
}

TEST_CASE("gemv rows are dot products") {
  const std::vector<double> m{1, 2, 3, 4, 5, 6};
  const std::vector<double> x{1, 0, -1};
  std::vector<double> y(2);
  simd::gemv(m, 2, 3, x, y);
  CHECK(y[0] == -2.0);
  CHECK(y[1] == -2.0);
}

TEST_CASE("unavailable variants are reported, not silently substituted") {
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (!simd::isa_available(isa)) CHECK_THROWS_AS(simd::kernels_for(isa), Unsupported);
  }
  CHECK(simd::isa_available(Isa::Scalar));
  CHECK(simd::isa_available(simd::active_kernels().isa));
}
