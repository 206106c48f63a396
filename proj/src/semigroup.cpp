#include "lab/semigroup.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "lab/error.hpp"
#include "lab/expm.hpp"
#include "lab/linalg.hpp"

namespace lab {

Generator::Generator(FormMatrices fm) : fm_(std::move(fm)) {}

std::vector<double> Generator::apply(std::span<const double> psi) const {
  std::vector<double> out = fm_.stiffness.multiply(psi);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= fm_.mass[i];
  return out;
}

double Generator::inner(std::span<const double> a, std::span<const double> b) const {
  require(a.size() == fm_.n && b.size() == fm_.n, ErrorCode::invalid_argument, "inner product size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < fm_.n; ++i) s += fm_.mass[i] * a[i] * b[i];
  return s;
}

Eigen::MatrixXd Generator::dense() const {
  require(fm_.n <= kDenseCellLimit, ErrorCode::size_limit,
          "dense generator limited to " + std::to_string(kDenseCellLimit) + " cells");
  const auto n = static_cast<Eigen::Index>(fm_.n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const CsrMatrix& k = fm_.stiffness;
  for (std::size_t r = 0; r < k.rows; ++r)
    for (std::int64_t j = k.row_ptr[r]; j < k.row_ptr[r + 1]; ++j)
      a(static_cast<Eigen::Index>(r), k.col[j]) = k.val[j] / fm_.mass[r];
  return a;
}

std::string to_string(Scheme s) { return s == Scheme::backward_euler ? "backward-euler" : "matrix-exponential"; }

Scheme scheme_from_string(const std::string& name) {
  if (name == "backward-euler") return Scheme::backward_euler;
  if (name == "matrix-exponential") return Scheme::matrix_exponential;
  fail(ErrorCode::schema, "unknown scheme '" + name + "'");
}

namespace {

double weighted_sum(const std::vector<double>& mass, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += mass[i] * u[i];
  return s;
}

Eigen::SparseMatrix<double> implicit_matrix(const FormMatrices& fm, double tau) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(fm.stiffness.nnz() + fm.n);
  for (std::size_t r = 0; r < fm.n; ++r) {
    trips.emplace_back(static_cast<int>(r), static_cast<int>(r), fm.mass[r]);
    for (std::int64_t k = fm.stiffness.row_ptr[r]; k < fm.stiffness.row_ptr[r + 1]; ++k)
      trips.emplace_back(static_cast<int>(r), fm.stiffness.col[k], tau * fm.stiffness.val[k]);
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(fm.n), static_cast<Eigen::Index>(fm.n));
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

CsrMatrix implicit_csr(const FormMatrices& fm, double tau) {
  CsrMatrix a = fm.stiffness;
  for (double& v : a.val) v *= tau;
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::int64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
      if (static_cast<std::size_t>(a.col[k]) == r) a.val[k] += fm.mass[r];
  return a;
}

}  // namespace

Trajectory evolve(const Generator& gen, std::span<const double> u0, double t_end, std::size_t steps, Scheme scheme,
                  const EvolveOptions& options) {
  const FormMatrices& fm = gen.form();
  require(u0.size() == fm.n, ErrorCode::invalid_argument, "initial datum length does not match the generator");
  require(steps >= 1, ErrorCode::invalid_argument, "need at least one step");
  require(t_end > 0.0, ErrorCode::invalid_argument, "t_end must be positive");
  const std::size_t stride = std::max<std::size_t>(options.record_every, 1);

  Trajectory traj;
  traj.scheme = scheme;
  traj.step = t_end / static_cast<double>(steps);
  std::vector<double> u(u0.begin(), u0.end());
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(u);
    traj.masses.push_back(weighted_sum(fm.mass, u));
  };
  record(0.0);

  std::function<void()> advance;
  Eigen::MatrixXd propagator;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  CsrMatrix implicit;
  std::vector<double> rhs(fm.n);

  if (scheme == Scheme::matrix_exponential) {
    propagator = expm(-traj.step * gen.dense());
    advance = [&] {
      const Eigen::Map<const Eigen::VectorXd> x(u.data(), static_cast<Eigen::Index>(u.size()));
      const Eigen::VectorXd y = propagator * x;
      std::copy(y.data(), y.data() + y.size(), u.begin());
    };
  } else if (options.solver == StepSolver::sparse_cholesky) {
    ldlt.compute(implicit_matrix(fm, traj.step));
    require(ldlt.info() == Eigen::Success, ErrorCode::solver, "sparse factorization of M + tau K failed");
    advance = [&] {
      for (std::size_t i = 0; i < fm.n; ++i) rhs[i] = fm.mass[i] * u[i];
      const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(fm.n));
      const Eigen::VectorXd x = ldlt.solve(b);
      require(ldlt.info() == Eigen::Success, ErrorCode::solver, "sparse solve failed");
      std::copy(x.data(), x.data() + x.size(), u.begin());
    };
  } else {
    implicit = implicit_csr(fm, traj.step);
    advance = [&] {
      for (std::size_t i = 0; i < fm.n; ++i) rhs[i] = fm.mass[i] * u[i];
      conjugate_gradient(implicit, rhs, u, {.relative_tolerance = options.cg_tolerance, .max_iterations = options.cg_max_iterations});
    };
  }

  for (std::size_t k = 1; k <= steps; ++k) {
    advance();
    if (k % stride == 0 || k == steps) record(static_cast<double>(k) * traj.step);
  }
  return traj;
}

std::vector<double> mass_defect(const Trajectory& traj) {
  require(!traj.states.empty(), ErrorCode::invalid_argument, "empty trajectory");
  for (double v : traj.states.front())
    require(v == 1.0, ErrorCode::invalid_argument, "mass defect requires the initial datum 1");
  std::vector<double> d;
  for (double m : traj.masses) d.push_back(1.0 - m / traj.masses.front());
  return d;
}

SubmarkovReport check_submarkov(const Trajectory& traj, bool diagonal_coefficients, double tolerance) {
  SubmarkovReport r;
  r.asserted = diagonal_coefficients && traj.scheme == Scheme::backward_euler;
  r.min_value = std::numeric_limits<double>::infinity();
  r.max_value = -std::numeric_limits<double>::infinity();
  for (const auto& s : traj.states)
    for (double v : s) {
      r.min_value = std::min(r.min_value, v);
      r.max_value = std::max(r.max_value, v);
      if (v < -tolerance || v > 1.0 + tolerance) ++r.violations;
    }
  r.passed = !r.asserted || r.violations == 0;
  return r;
}

DominationReport check_domination(const Generator& gen_free, const Generator& gen_dirichlet, std::span<const double> u0,
                                  double t_end, std::size_t steps, double tolerance, const EvolveOptions& options) {
  require(gen_free.mode() == BoundaryMode::free && gen_dirichlet.mode() == BoundaryMode::dirichlet,
          ErrorCode::invalid_argument, "domination compares a free and a dirichlet generator");
  require(gen_free.size() == gen_dirichlet.size(), ErrorCode::invalid_argument, "generators differ in size");
  for (double v : u0) require(v >= 0.0, ErrorCode::invalid_argument, "domination needs a nonnegative datum");

  DominationReport r;
  r.free_run = evolve(gen_free, u0, t_end, steps, Scheme::backward_euler, options);
  r.dirichlet_run = evolve(gen_dirichlet, u0, t_end, steps, Scheme::backward_euler, options);
  r.min_margin = std::numeric_limits<double>::infinity();
  r.max_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < r.free_run.states.size(); ++k)
    for (std::size_t i = 0; i < gen_free.size(); ++i) {
      const double m = r.free_run.states[k][i] - r.dirichlet_run.states[k][i];
      r.min_margin = std::min(r.min_margin, m);
      r.max_margin = std::max(r.max_margin, m);
      if (m < -tolerance) ++r.violations;
    }
  r.passed = r.violations == 0;
  return r;
}

DaviesGaffneyReport davies_gaffney_check(const Generator& gen, const DomainGrid& grid, std::span<const std::size_t> x,
                                         std::span<const std::size_t> y, std::span<const double> t_list, double c_sup,
                                         double tolerance) {
  require(!x.empty() && !y.empty(), ErrorCode::invalid_argument, "X and Y must be nonempty");
  require(c_sup > 0.0, ErrorCode::invalid_argument, "C_sup must be positive");
  std::vector<char> in_x(gen.size(), 0);
  for (std::size_t c : x) in_x[c] = 1;
  for (std::size_t c : y) require(!in_x[c], ErrorCode::invalid_argument, "X and Y overlap");

  double gap2 = std::numeric_limits<double>::infinity();
  for (std::size_t a : x)
    for (std::size_t b : y) {
      const Point pa = grid.center(a), pb = grid.center(b);
      gap2 = std::min(gap2, squared_norm({pa[0] - pb[0], pa[1] - pb[1], pa[2] - pb[2]}));
    }
  DaviesGaffneyReport rep;
  rep.gap = std::sqrt(gap2);
  rep.c_sup = c_sup;
  rep.tolerance = tolerance;
  require(rep.gap >= 2.0 * grid.h() * (1.0 - 1e-12), ErrorCode::invalid_argument, "X and Y closer than 2h");

  const double vol = grid.cell_volume();
  const double norm_x = std::sqrt(vol * static_cast<double>(x.size()));
  const double norm_y = std::sqrt(vol * static_cast<double>(y.size()));
  const Eigen::MatrixXd a = gen.dense();
  for (double t : t_list) {
    require(t > 0.0, ErrorCode::invalid_argument, "times must be positive");
    const Eigen::MatrixXd s = expm(-t * a);
    double pairing = 0.0;
    for (std::size_t i : x) {
      double row = 0.0;
      for (std::size_t j : y) row += s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      pairing += vol * row;
    }
    DaviesGaffneyRow row;
    row.t = t;
    row.pairing = pairing;
    row.bound = std::exp(-gap2 / (4.0 * c_sup * t)) * norm_x * norm_y;
    row.ok = pairing <= row.bound * (1.0 + tolerance);
    rep.passed = rep.passed && row.ok;
    rep.rows.push_back(row);
  }
  return rep;
}

std::string to_string(Irreducibility v) { return v == Irreducibility::irreducible ? "irreducible" : "reducible"; }

std::vector<std::vector<std::size_t>> coupling_components(const FormMatrices& fm) {
  const CsrMatrix& k = fm.stiffness;
  std::vector<int> label(fm.n, -1);
  std::vector<std::vector<std::size_t>> comps;
  std::deque<std::size_t> queue;
  for (std::size_t seed = 0; seed < fm.n; ++seed) {
    if (label[seed] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    label[seed] = id;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t r = queue.front();
      queue.pop_front();
      comps.back().push_back(r);
      for (std::int64_t j = k.row_ptr[r]; j < k.row_ptr[r + 1]; ++j) {
        const auto c = static_cast<std::size_t>(k.col[j]);
        if (c != r && k.val[j] != 0.0 && label[c] < 0) {
          label[c] = id;
          queue.push_back(c);
        }
      }
    }
    std::sort(comps.back().begin(), comps.back().end());
  }
  return comps;
}

IrreducibilityReport irreducibility_check(const Generator& gen, const DomainGrid& grid, double t, double threshold,
                                          std::size_t seed_cell, Scheme scheme, std::size_t steps) {
  require(t > 0.0, ErrorCode::invalid_argument, "t must be positive");
  require(seed_cell < gen.size(), ErrorCode::invalid_argument, "seed cell out of range");
  IrreducibilityReport rep;
  rep.threshold = threshold;
  rep.seed_cell = seed_cell;

  std::vector<double> u0(gen.size(), 0.0);
  u0[seed_cell] = 1.0;
  const Trajectory traj = evolve(gen, u0, t, steps, scheme, {.record_every = steps});
  rep.state = traj.states.back();
  const auto [lo, hi] = std::minmax_element(rep.state.begin(), rep.state.end());
  rep.min_ratio = *hi > 0.0 ? *lo / *hi : 0.0;
  rep.verdict = rep.min_ratio > threshold ? Irreducibility::irreducible : Irreducibility::reducible;

  rep.geometric_components = connected_components(grid).size();
  const auto coupling = coupling_components(gen.form());
  rep.coupling_components = coupling.size();
  for (const auto& comp : coupling) {
    if (std::binary_search(comp.begin(), comp.end(), seed_cell)) continue;
    for (std::size_t c : comp) rep.mass_outside_seed_component += gen.form().mass[c] * std::abs(rep.state[c]);
  }
  rep.consistent = (rep.verdict == Irreducibility::irreducible) == (rep.coupling_components == 1);
  return rep;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "time,mass,min,max\n";
  char buf[160];
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto [lo, hi] = std::minmax_element(traj.states[k].begin(), traj.states[k].end());
    std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e,%.12e\n", traj.times[k], traj.masses[k], *lo, *hi);
    out << buf;
  }
}

std::vector<std::string> write_state_dump(const Trajectory& traj, const DomainGrid& grid, const std::string& stem) {
  const std::string bin_path = stem + ".bin";
  const std::string json_path = stem + ".json";
  std::ofstream bin(bin_path, std::ios::binary);
  require(bin.good(), ErrorCode::invalid_argument, "cannot open " + bin_path);
  for (const auto& s : traj.states)
    for (double v : s) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      unsigned char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
      bin.write(reinterpret_cast<const char*>(bytes), 8);
    }

  nlohmann::ordered_json side;
  side["format"] = "float64-le";
  side["layout"] = "row-major [time][cell]";
  side["dim"] = grid.dim();
  side["h"] = grid.h();
  nlohmann::json bbox = nlohmann::json::array();
  nlohmann::json shape = nlohmann::json::array();
  for (int k = 0; k < grid.dim(); ++k) {
    bbox.push_back({grid.axis(k).lo, grid.axis(k).hi});
    shape.push_back(grid.shape()[k]);
  }
  side["bbox"] = bbox;
  side["shape"] = shape;
  side["cells"] = grid.inside_count();
  std::vector<std::size_t> lattice(grid.inside_count());
  for (std::size_t c = 0; c < lattice.size(); ++c) lattice[c] = grid.lattice_index(c);
  side["lattice_index"] = lattice;
  side["times"] = traj.times;
  side["scheme"] = to_string(traj.scheme);
  std::ofstream js(json_path);
  js << side.dump(2) << "\n";
  return {bin_path, json_path};
}

}  // namespace lab
