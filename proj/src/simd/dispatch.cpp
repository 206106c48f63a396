#include <cstdlib>
#include <string>

#include "lab/simd/kernels.hpp"

namespace lab::simd {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_kernels() { return detail::kScalarTable; }

const KernelTable* kernels_for(Isa isa) {
  switch (isa) {
    case Isa::scalar: return &detail::kScalarTable;
    case Isa::avx2:
#if defined(LAB_HAVE_AVX2_KERNELS)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &detail::kAvx2Table;
#endif
      return nullptr;
    case Isa::neon:
#if defined(LAB_HAVE_NEON_KERNELS)
      return &detail::kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

namespace {

const KernelTable& select() {
  if (const char* forced = std::getenv("LAB_SIMD")) {
    const std::string name(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
      if (name == to_string(isa))
        if (const KernelTable* t = kernels_for(isa)) return *t;
  }
  for (Isa isa : {Isa::avx2, Isa::neon})
    if (const KernelTable* t = kernels_for(isa)) return *t;
  return detail::kScalarTable;
}

}  // namespace

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace lab::simd
