#pragma once

// Dense double-precision kernels behind every loss and gradient evaluation.
//
// Each kernel has a scalar reference and, where the target supports it, an
// AVX2 (x86-64) or NEON (aarch64) variant. The variant is chosen once at
// runtime from the CPU features, or forced with AEG_SIMD=scalar|avx2|neon.
//
// Reductions follow a fixed 4-lane schedule: element i accumulates into lane
// i % 4 and the lanes combine as (l0 + l1) + (l2 + l3). No fused multiply-add
// is used. Under that contract every variant returns bit-identical results,
// so outputs do not depend on the machine the experiment ran on.

#include <cstddef>
#include <span>
#include <string_view>

#include "aeg/kernel_table.hpp"

namespace aeg::simd {

std::string_view isa_name(Isa isa) noexcept;

bool isa_available(Isa isa) noexcept;

/// Kernel table for a specific variant. Throws Unsupported if unavailable here.
const KernelTable& kernels_for(Isa isa);

/// The table selected for this process.
const KernelTable& active_kernels() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_kernels().dot(a.data(), b.data(), a.size());
}

inline double asum(std::span<const double> a) {
  return active_kernels().asum(a.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_kernels().axpy(alpha, x.data(), y.data(), x.size());
}

inline void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> y) {
  active_kernels().gemv(a.data(), rows, cols, x.data(), y.data());
}

}  // namespace aeg::simd
