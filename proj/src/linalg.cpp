#include "lab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "lab/error.hpp"
#include "lab/simd/kernels.hpp"

namespace lab {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  require(x.size() == cols && y.size() == rows, ErrorCode::invalid_argument, "spmv: size mismatch");
  simd::kernels().csr_spmv(rows, row_ptr.data(), col.data(), val.data(), x.data(), y.data());
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows);
  multiply(x, y);
  return y;
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto first = col.begin() + row_ptr[r];
  const auto last = col.begin() + row_ptr[r + 1];
  const auto it = std::lower_bound(first, last, static_cast<std::int32_t>(c));
  if (it == last || *it != static_cast<std::int32_t>(c)) return 0.0;
  return val[static_cast<std::size_t>(it - col.begin())];
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(std::min(rows, cols), 0.0);
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = at(r, r);
  return d;
}

bool CsrMatrix::is_symmetric() const {
  if (rows != cols) return false;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      if (at(static_cast<std::size_t>(col[k]), r) != val[k]) return false;
  return true;
}

CsrMatrix CsrMatrix::submatrix(std::span<const std::size_t> keep_rows,
                               std::span<const std::size_t> keep_cols) const {
  std::vector<std::int64_t> remap(cols, -1);
  for (std::size_t j = 0; j < keep_cols.size(); ++j) remap[keep_cols[j]] = static_cast<std::int64_t>(j);
  CsrMatrix out;
  out.rows = keep_rows.size();
  out.cols = keep_cols.size();
  out.row_ptr.assign(1, 0);
  for (std::size_t r : keep_rows) {
    std::vector<std::pair<std::int32_t, double>> row;
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      if (remap[col[k]] >= 0) row.emplace_back(static_cast<std::int32_t>(remap[col[k]]), val[k]);
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [c, v] : row) {
      out.col.push_back(c);
      out.val.push_back(v);
    }
    out.row_ptr.push_back(static_cast<std::int64_t>(out.val.size()));
  }
  return out;
}

CsrMatrix TripletBuilder::build() const {
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Entry& ea = entries_[a];
    const Entry& eb = entries_[b];
    return ea.r != eb.r ? ea.r < eb.r : ea.c < eb.c;
  });
  CsrMatrix m;
  m.rows = rows_;
  m.cols = cols_;
  m.row_ptr.assign(rows_ + 1, 0);
  std::size_t i = 0;
  while (i < order.size()) {
    const Entry& e = entries_[order[i]];
    require(e.r < rows_ && e.c < cols_, ErrorCode::invalid_argument, "triplet out of range");
    double sum = 0.0;
    std::size_t j = i;
    for (; j < order.size() && entries_[order[j]].r == e.r && entries_[order[j]].c == e.c; ++j)
      sum += entries_[order[j]].v;
    m.col.push_back(static_cast<std::int32_t>(e.c));
    m.val.push_back(sum);
    m.row_ptr[e.r + 1] += 1;
    i = j;
  }
  for (std::size_t r = 0; r < rows_; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

void write_coordinate_text(const CsrMatrix& a, std::ostream& out) {
  char buf[96];
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::int64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%zu %d %.17g\n", r, a.col[k], a.val[k]);
      out << buf;
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::invalid_argument, "dot: size mismatch");
  return simd::kernels().dot(x.data(), y.data(), x.size());
}

CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                            const CgOptions& options) {
  const std::size_t n = a.rows;
  require(a.cols == n && b.size() == n && x.size() == n, ErrorCode::invalid_argument,
          "cg: size mismatch");
  const auto& k = simd::kernels();
  const std::size_t max_it = options.max_iterations ? options.max_iterations : 10 * n + 100;

  CgResult result;
  const double b_norm = std::sqrt(k.dot(b.data(), b.data(), n));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }

  std::vector<double> inv_diag(n, 1.0);
  if (options.jacobi_preconditioner) {
    const auto d = a.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
      require(d[i] > 0.0, ErrorCode::solver, "cg: non-positive diagonal");
      inv_diag[i] = 1.0 / d[i];
    }
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  a.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  double r_norm = std::sqrt(k.dot(r.data(), r.data(), n));
  result.relative_residual = r_norm / b_norm;
  if (result.relative_residual <= options.relative_tolerance) {
    result.converged = true;
    return result;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = k.dot(r.data(), z.data(), n);

  for (std::size_t it = 1; it <= max_it; ++it) {
    a.multiply(p, q);
    const double pq = k.dot(p.data(), q.data(), n);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    k.axpy(alpha, p.data(), x.data(), n);
    k.axpy(-alpha, q.data(), r.data(), n);
    r_norm = std::sqrt(k.dot(r.data(), r.data(), n));
    result.iterations = it;
    result.relative_residual = r_norm / b_norm;
    if (result.relative_residual <= options.relative_tolerance) {
      result.converged = true;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = k.dot(r.data(), z.data(), n);
    k.xpby(z.data(), rz_next / rz, p.data(), n);
    rz = rz_next;
  }
  if (options.throw_on_failure)
    throw SolverError("cg did not converge (relative residual " +
                          std::to_string(result.relative_residual) + ")",
                      result.relative_residual);
  return result;
}

}  // namespace lab
