#pragma once

// Plain function-pointer table shared by every kernel variant. Only <cstddef>
// is included so the ISA-specific translation units stay free of library code.

#include <cstddef>

namespace aeg::simd {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// sum_i |a[i]|
  double (*asum)(const double* a, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y[r] = dot(A[r, :], x) for a row-major rows x cols matrix
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
};

namespace detail {
const KernelTable& scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;  // nullptr when not compiled in
const KernelTable* neon_table() noexcept;
}  // namespace detail

}  // namespace aeg::simd
