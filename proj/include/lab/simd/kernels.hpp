#pragma once
// Data-parallel inner loops used by the solvers and distance fields.
//
// Every kernel has a scalar reference implementation; vector variants are
// compiled into separate translation units and chosen once at startup from
// the CPU feature set. LAB_SIMD=scalar|avx2|neon forces a specific table.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace lab::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

/// Structure-of-arrays view of axis-aligned boxes [lo, hi] in R^dim.
/// Points are boxes with lo == hi.
struct BoxSoA {
  const double* lo[3];
  const double* hi[3];
  std::size_t count;
  int dim;
};

struct KernelTable {
  Isa isa;
  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y = x + b * y
  void (*xpby)(const double* x, double b, double* y, std::size_t n);
  /// y = A x for a CSR matrix with 32-bit column indices.
  void (*csr_spmv)(std::size_t rows, const std::int64_t* row_ptr, const std::int32_t* col,
                   const double* val, const double* x, double* y);
  /// min over boxes of the squared Euclidean distance from q to the box.
  double (*min_sq_dist_boxes)(const BoxSoA& boxes, const double* q);
};

/// Table selected for this process (CPU detection, overridable by LAB_SIMD).
const KernelTable& kernels();

/// Reference table; always available.
const KernelTable& scalar_kernels();

/// Table for a given ISA, or nullptr when not compiled in or unsupported by the CPU.
const KernelTable* kernels_for(Isa isa);

namespace detail {
extern const KernelTable kScalarTable;
#if defined(LAB_HAVE_AVX2_KERNELS)
extern const KernelTable kAvx2Table;
#endif
#if defined(LAB_HAVE_NEON_KERNELS)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace lab::simd
