#include <cstdlib>
#include <string>

#include "aeg/error.hpp"
#include "aeg/kernels.hpp"

namespace aeg::simd {
namespace {

const KernelTable* lookup(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return &detail::scalar_table();
    case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
      if (!__builtin_cpu_supports("avx2")) return nullptr;
#endif
      return detail::avx2_table();
    case Isa::Neon:
      return detail::neon_table();
  }
  return nullptr;
}

const KernelTable& select() noexcept {
  if (const char* forced = std::getenv("AEG_SIMD")) {
    const std::string name(forced);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (name == isa_name(isa)) {
        if (const KernelTable* t = lookup(isa)) return *t;
      }
    }
  }
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (const KernelTable* t = lookup(isa)) return *t;
  }
  return detail::scalar_table();
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept { return lookup(isa) != nullptr; }

const KernelTable& kernels_for(Isa isa) {
  if (const KernelTable* t = lookup(isa)) return *t;
  throw Unsupported("kernel variant '" + std::string(isa_name(isa)) + "' is not available on this CPU");
}

const KernelTable& active_kernels() noexcept {
  static const KernelTable& table = select();
  return table;
}

}  // namespace aeg::simd
