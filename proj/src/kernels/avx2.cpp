// Compiled with -mavx2 (no -mfma). Keep this TU free of standard library
// headers so no AVX2-encoded inline function can leak into other TUs.

#include "aeg/kernel_table.hpp"

#if defined(AEG_HAVE_AVX2)
#include <immintrin.h>

namespace aeg::simd::detail {
namespace {

// Finishes a 4-lane reduction: the tail element i goes to lane i % 4, as in
// the scalar reference. b == nullptr means sum of absolute values.
inline double combine_lanes(__m256d acc, const double* a, const double* b, std::size_t i,
                            std::size_t n) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t k = 0; i < n; ++i, ++k) {
    const double v = b ? a[i] * b[i] : (a[i] < 0.0 ? -a[i] : a[i]);
    lane[k] += v;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, prod);
  }
  return combine_lanes(acc, a, b, i, n);
}

double asum_avx2(const double* a, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(a + i)));
  return combine_lanes(acc, a, nullptr, i, n);
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

constexpr KernelTable kAvx2{Isa::Avx2, dot_avx2, asum_avx2, axpy_avx2, gemv_avx2};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2; }

}  // namespace aeg::simd::detail

#else

namespace aeg::simd::detail {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace aeg::simd::detail

#endif
