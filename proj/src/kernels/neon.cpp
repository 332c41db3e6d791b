#include "aeg/kernel_table.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace aeg::simd::detail {
namespace {

// Lanes 0,1 live in `lo`, lanes 2,3 in `hi`, matching the scalar schedule.
inline double finish(float64x2_t lo, float64x2_t hi, const double* a, const double* b,
                     std::size_t i, std::size_t n) {
  double lane[4] = {vgetq_lane_f64(lo, 0), vgetq_lane_f64(lo, 1), vgetq_lane_f64(hi, 0),
                    vgetq_lane_f64(hi, 1)};
  for (std::size_t k = 0; i < n; ++i, ++k) lane[k] += b ? a[i] * b[i] : (a[i] < 0.0 ? -a[i] : a[i]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  return finish(lo, hi, a, b, i, n);
}

double asum_neon(const double* a, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vabsq_f64(vld1q_f64(a + i)));
    hi = vaddq_f64(hi, vabsq_f64(vld1q_f64(a + i + 2)));
  }
  return finish(lo, hi, a, nullptr, i, n);
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_neon(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_neon(a + r * cols, x, cols);
}

constexpr KernelTable kNeon{Isa::Neon, dot_neon, asum_neon, axpy_neon, gemv_neon};

}  // namespace

const KernelTable* neon_table() noexcept { return &kNeon; }

}  // namespace aeg::simd::detail

#else

namespace aeg::simd::detail {
const KernelTable* neon_table() noexcept { return nullptr; }
}  // namespace aeg::simd::detail

#endif
