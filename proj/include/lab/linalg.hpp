#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace lab {

/// Compressed sparse row matrix; columns sorted within each row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
  /// y = A x through the dispatched SpMV kernel.
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  /// Entry lookup by binary search; zero when not stored.
  double at(std::size_t r, std::size_t c) const;
  std::vector<double> diagonal() const;
  /// Entrywise exact symmetry check.
  bool is_symmetric() const;
  /// Rows/cols restricted to `keep` (in the given order).
  CsrMatrix submatrix(std::span<const std::size_t> keep_rows, std::span<const std::size_t> keep_cols) const;
};

/// Accumulates (row, col, value) contributions. Duplicates are summed in
/// insertion order, so identical contribution sequences give identical sums.
class TripletBuilder {
 public:
  TripletBuilder(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}
  void add(std::size_t r, std::size_t c, double v) { entries_.push_back({r, c, v}); }
  /// Adds v at (a, b) and (b, a) (once on the diagonal when a == b).
  void add_symmetric(std::size_t a, std::size_t b, double v) {
    add(a, b, v);
    if (a != b) add(b, a, v);
  }
  CsrMatrix build() const;

 private:
  struct Entry {
    std::size_t r, c;
    double v;
  };
  std::size_t rows_, cols_;
  std::vector<Entry> entries_;
};

/// Writes "row col value" per line, row-major sorted, %.17g values.
void write_coordinate_text(const CsrMatrix& a, std::ostream& out);

double dot(std::span<const double> x, std::span<const double> y);

struct CgOptions {
  double relative_tolerance = 1e-8;
  std::size_t max_iterations = 0;  // 0: 10 * n + 100
  bool jacobi_preconditioner = true;
  bool throw_on_failure = true;
};

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Preconditioned conjugate gradients for SPD A; x holds the initial guess.
/// Convergence: ||b - A x||_2 <= tol * ||b||_2. Throws SolverError on failure
/// unless options.throw_on_failure is false.
CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                            const CgOptions& options = {});

}  // namespace lab
