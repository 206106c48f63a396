#include "lab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "lab/capacity.hpp"
#include "lab/error.hpp"
#include "lab/oned.hpp"
#include "lab/parallel.hpp"
#include "lab/parametrix.hpp"
#include "lab/semigroup.hpp"

namespace fs = std::filesystem;

namespace lab {

double fourier_dirichlet_mass(double c, double t, double length) {
  double s = 0.0;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int k = 1; k < 20001; k += 2) {
    const double kk = static_cast<double>(k) * k;
    s += 8.0 / (kk * pi2) * std::exp(-c * kk * pi2 * t / (length * length));
  }
  return s;
}

int exit_code(const RunReport& report) { return report.passed() ? 0 : 1; }

int exit_code(ErrorCode code) { return code == ErrorCode::solver ? 3 : 2; }

namespace {

std::string tag(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string r(double v) { return format_real(v); }

class Artifacts {
 public:
  Artifacts(fs::path dir, RunReport& report) : dir_(std::move(dir)), report_(report) {}

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    require(out.good(), ErrorCode::invalid_argument, "cannot write " + (dir_ / name).string());
    out << content;
    report_.artifacts.push_back(name);
  }
  fs::path path(const std::string& name) const { return dir_ / name; }
  void record(const std::string& name) { report_.artifacts.push_back(name); }

 private:
  fs::path dir_;
  RunReport& report_;
};

struct Level {
  Json grid_json;
  DomainGrid grid;
};

std::vector<Level> parse_levels(const Node& fixture) {
  const Node grid_node = fixture.child("grid");
  std::vector<double> hs;
  if (fixture.has("levels")) {
    hs = fixture.numbers("levels");
    if (hs.empty()) schema_error(fixture.path() + ".levels", "need at least one level");
  }
  std::vector<Level> levels;
  if (hs.empty()) {
    levels.push_back({grid_node.raw(), parse_grid(grid_node)});
    return levels;
  }
  for (double h : hs) {
    Json g = grid_node.raw();
    g["h"] = h;
    DomainGrid grid = parse_grid(Node(g, grid_node.path()));
    levels.push_back({std::move(g), std::move(grid)});
  }
  return levels;
}

struct InitialDatum {
  std::string label;
  std::string kind;
  Box box;
  Point at{};
  double value = 1.0;
  bool unit_value = true;
};

InitialDatum parse_initial(const Node& n, int dim) {
  InitialDatum d;
  d.kind = n.string("kind");
  d.label = n.string("label", d.kind);
  if (d.kind == "indicator") {
    d.box = parse_box(n.child("box"), dim);
  } else if (d.kind == "point") {
    d.at = as_point(n.raw("at"), dim, n.path() + ".at");
    d.unit_value = !n.has("value");
    d.value = n.number("value", 1.0);
  } else if (d.kind != "ones" && d.kind != "zero") {
    schema_error(n.path() + ".kind", "unknown initial datum '" + d.kind + "'");
  }
  n.finish();
  return d;
}

std::vector<double> materialize(const InitialDatum& d, const DomainGrid& grid) {
  std::vector<double> u(grid.inside_count(), 0.0);
  if (d.kind == "ones") std::fill(u.begin(), u.end(), 1.0);
  if (d.kind == "indicator")
    for (std::size_t c : cells_in_box(grid, d.box)) u[c] = 1.0;
  if (d.kind == "point") u[grid.nearest_cell(d.at)] = d.unit_value ? 1.0 / grid.cell_volume() : d.value;
  return u;
}

bool in_unit_interval(const std::vector<double>& u) {
  return std::all_of(u.begin(), u.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

EvolveOptions parse_solver(const Node& f) {
  EvolveOptions opt;
  const std::string s = f.string("solver", "sparse-cholesky");
  if (s == "sparse-cholesky") opt.solver = StepSolver::sparse_cholesky;
  else if (s == "conjugate-gradient") opt.solver = StepSolver::conjugate_gradient;
  else schema_error(f.path() + ".solver", "unknown solver '" + s + "'");
  opt.cg_tolerance = f.number("cg_tolerance", opt.cg_tolerance);
  const auto max_it = f.integer("cg_max_iterations", 0);
  if (max_it < 0) schema_error(f.path() + ".cg_max_iterations", "must be >= 0");
  opt.cg_max_iterations = static_cast<std::size_t>(max_it);
  return opt;
}

std::size_t positive_count(const Node& f, const std::string& key, std::int64_t fallback) {
  const auto v = f.integer(key, fallback);
  if (v < 1) schema_error(f.path() + "." + key, "must be >= 1");
  return static_cast<std::size_t>(v);
}

double positive(const Node& f, const std::string& key, double fallback) {
  const double v = f.number(key, fallback);
  if (!(v > 0.0)) schema_error(f.path() + "." + key, "must be positive");
  return v;
}

double positive(const Node& f, const std::string& key) {
  const double v = f.number(key);
  if (!(v > 0.0)) schema_error(f.path() + "." + key, "must be positive");
  return v;
}

// ---------------------------------------------------------------- classify-1d

void run_classify_1d(const ExperimentConfig& cfg, RunReport& rep, Artifacts& art, int workers) {
  const Node f(cfg.fixture, "fixture");
  const bool explicit_parts = f.has("lattice") || f.has("cutoff") || f.has("gamma_sup");

  std::optional<std::pair<std::vector<double>, std::vector<double>>> lattice;
  if (!explicit_parts) lattice.emplace(default_lattice_deltas(), default_lattice_ps());
  if (auto l = f.optional_child("lattice")) {
    lattice.emplace(l->numbers("deltas", default_lattice_deltas()), l->numbers("ps", default_lattice_ps()));
    l->finish();
  }
  struct CutoffPart {
    std::vector<double> deltas, ns;
    double h, tolerance;
  };
  std::optional<CutoffPart> cutoff;
  if (auto c = f.optional_child("cutoff")) {
    cutoff = CutoffPart{c->numbers("deltas", {1.0}), c->numbers("n", {10.0, 100.0}), positive(*c, "h", 1.0 / 4096.0),
                        positive(*c, "tolerance", 0.05)};
    c->finish();
  }
  struct GammaPart {
    std::vector<double> deltas, ns;
    double tolerance, bounded_ratio;
  };
  std::optional<GammaPart> gamma;
  if (auto g = f.optional_child("gamma_sup")) {
    gamma = GammaPart{g->numbers("deltas", {1.0, 1.5, 2.0}), g->numbers("n", {10.0, 100.0, 1000.0}),
                      positive(*g, "tolerance", 0.1), positive(*g, "bounded_ratio", 2.0)};
    if (gamma->ns.size() < 2) schema_error(g->path() + ".n", "need at least two n values");
    g->finish();
  }
  f.finish();

  if (lattice) {
    auto& [deltas, ps] = *lattice;
    for (double d : deltas)
      if (d < 1.0) fail(ErrorCode::regime, "lattice delta " + tag(d) + " < 1");
    for (double p : ps)
      if (p < 1.0 || !std::isfinite(p)) fail(ErrorCode::regime, "lattice p must lie in [1, infinity)");
    const auto rows = classify_lattice(deltas, ps, workers);
    std::ostringstream csv;
    write_lattice_csv(rows, csv);
    art.write("classify_1d.csv", csv.str());
    std::size_t agree = 0;
    Json table = Json::array();
    for (const auto& row : rows) {
      agree += row.agree;
      table.push_back({{"delta", row.delta},
                       {"p", row.p},
                       {"q", row.q},
                       {"W_in_Lq", to_string(row.w_in_lq)},
                       {"tail_exponent", row.tail_exponent},
                       {"lq_norm", row.lq_norm},
                       {"lp_unique", row.lp_unique},
                       {"threshold_rule", to_string(row.threshold_rule)},
                       {"agree", row.agree},
                       {"riemannian_distance_to_boundary", row.riemannian_distance_to_boundary}});
    }
    rep.results["lattice"] = table;
    rep.add("lattice_agreement", static_cast<double>(agree), static_cast<double>(rows.size()), "==",
            agree == rows.size());
    for (const auto& row : rows)
      if (row.p == 2.0 && (row.delta == 1.6 || row.delta == 1.4)) {
        const bool want = row.delta > 1.5;
        rep.add(std::string(want ? "unique" : "not_unique") + "_delta" + tag(row.delta) + "_p2", row.lp_unique ? 1 : 0,
                want ? 1 : 0, "==", row.lp_unique == want);
      }
  }

  if (cutoff) {
    std::vector<std::pair<double, double>> jobs;
    for (double d : cutoff->deltas)
      for (double n : cutoff->ns) jobs.emplace_back(d, n);
    std::vector<CutoffEnergies> out(jobs.size());
    parallel_for(jobs.size(), workers,
                 [&](std::size_t i) { out[i] = cutoff_energies(jobs[i].first, jobs[i].second, cutoff->h); });
    std::ostringstream csv;
    csv << "delta,n,h,closed_form,discrete,relative_gap,gamma_inf,gamma_inf_discrete\n";
    Json arr = Json::array();
    for (const auto& e : out) {
      csv << r(e.delta) << ',' << r(e.n) << ',' << r(cutoff->h) << ',' << r(e.closed_form) << ',' << r(e.discrete)
          << ',' << r(e.relative_gap) << ',' << r(e.gamma_inf) << ',' << r(e.gamma_inf_discrete) << '\n';
      arr.push_back({{"delta", e.delta}, {"n", e.n}, {"closed_form", e.closed_form}, {"discrete", e.discrete}});
      rep.at_most("cutoff_energy_delta" + tag(e.delta) + "_n" + tag(e.n), e.relative_gap, cutoff->tolerance);
    }
    art.write("cutoff_energy.csv", csv.str());
    rep.results["cutoff"] = arr;
  }

  if (gamma) {
    std::ostringstream csv;
    csv << "delta,n,gamma_inf\n";
    Json arr = Json::array();
    for (double d : gamma->deltas) {
      std::vector<double> g;
      for (double n : gamma->ns) {
        g.push_back(gamma_sup(d, n));
        csv << r(d) << ',' << r(n) << ',' << r(g.back()) << '\n';
      }
      const double slope = loglog_slope(gamma->ns, g);
      arr.push_back({{"delta", d}, {"slope", slope}, {"expected", 2.0 - d}});
      rep.add("gamma_sup_slope_delta" + tag(d), slope, 2.0 - d, "within " + tag(gamma->tolerance),
              std::abs(slope - (2.0 - d)) <= gamma->tolerance);
      if (d >= 2.0) {
        const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
        rep.at_most("gamma_sup_bounded_delta" + tag(d), *hi / *lo, gamma->bounded_ratio);
      }
    }
    art.write("gamma_sup.csv", csv.str());
    rep.results["gamma_sup"] = arr;
  }
}

// ---------------------------------------------------------------- capacity

void run_capacity(const ExperimentConfig& cfg, RunReport& rep, Artifacts& art, int workers) {
  const Node f(cfg.fixture, "fixture");
  const auto levels = parse_levels(f);
  const int dim = levels.front().grid.dim();
  std::vector<CoefficientField> fields;
  std::vector<TargetSet> targets;
  for (const auto& lv : levels) {
    fields.push_back(parse_field(f.child("field"), dim, &lv.grid));
    targets.push_back(parse_target(f.child("target"), dim, &lv.grid));
  }
  const double shell_factor = positive(f, "shell_factor", 2.0);
  const std::optional<double> shell_radius =
      f.has("shell_radius") ? std::optional<double>(positive(f, "shell_radius")) : std::nullopt;
  const bool has_d_a = f.has("target_dimension");
  const double d_a_value = has_d_a ? f.number("target_dimension") : 0.0;
  const double cg_tol = positive(f, "cg_tolerance", 1e-10);

  struct Sweep {
    std::vector<double> ns;
    double outer;
    std::optional<TargetSet> b;
  };
  std::optional<Sweep> sweep;
  if (auto s = f.optional_child("sweep")) {
    sweep = Sweep{s->numbers("n"), positive(*s, "outer_radius", 1.0), std::nullopt};
    if (s->has("target")) sweep->b = parse_target(s->child("target"), dim, &levels.back().grid);
    if (sweep->ns.size() < 2) schema_error(s->path() + ".n", "need at least two n values");
    for (std::size_t i = 0; i < sweep->ns.size(); ++i)
      if (sweep->ns[i] <= 1.0 || (i && sweep->ns[i] <= sweep->ns[i - 1]))
        schema_error(s->path() + ".n", "n values must be > 1 and increasing");
    s->finish();
  }
  struct Expect {
    std::optional<double> value, rel_tol, below, above, r2;
    std::optional<std::string> verdict;
  } ex;
  if (auto e = f.optional_child("expect")) {
    if (e->has("value")) ex.value = e->number("value");
    if (e->has("value_oracle")) {
      const std::string o = e->string("value_oracle");
      if (o != "tanh1") schema_error(e->path() + ".value_oracle", "unknown oracle '" + o + "'");
      ex.value = std::tanh(1.0);
    }
    ex.rel_tol = e->number("rel_tol", 0.02);
    if (e->has("below")) ex.below = e->number("below");
    if (e->has("above")) ex.above = e->number("above");
    if (e->has("fit_r2_min")) ex.r2 = e->number("fit_r2_min");
    if (e->has("verdict")) ex.verdict = e->string("verdict");
    e->finish();
  }
  f.finish();
  if (has_d_a) {
    rep.results["markov_verdict"] =
        to_string(classify_markov_unique(dim, d_a_value, fields.front().degeneracy() ? fields.front().degeneracy()->gamma : 0.0));
  }
  if (ex.verdict) {
    if (!has_d_a) schema_error("fixture.expect.verdict", "needs fixture.target_dimension");
    const std::string got = rep.results["markov_verdict"].get<std::string>();
    rep.add("markov_verdict", got == *ex.verdict ? 1 : 0, 1, "==", got == *ex.verdict);
  }

  std::vector<CapacityEstimate> est(levels.size());
  std::vector<FormMatrices> forms(levels.size());
  parallel_for(levels.size(), workers, [&](std::size_t i) {
    forms[i] = assemble(levels[i].grid, fields[i], BoundaryMode::free);
    const double shell = shell_radius ? *shell_radius : shell_factor * levels[i].grid.h();
    est[i] = estimate_capacity(forms[i], levels[i].grid, targets[i], shell, {.relative_tolerance = cg_tol});
  });

  const double gamma = fields.front().degeneracy() ? fields.front().degeneracy()->gamma : 0.0;
  const std::string da_text = has_d_a ? r(d_a_value) : "";
  std::ostringstream csv;
  csv << "gamma,dA,dim,h,shell_radius,n,energy,l2sq,capacity_value\n";
  Json arr = Json::array();
  for (const auto& e : est) {
    csv << r(gamma) << ',' << da_text << ',' << dim << ',' << r(e.grid_h) << ',' << r(e.shell_radius) << ",,,,"
        << r(e.value) << '\n';
    arr.push_back({{"h", e.grid_h},
                   {"shell_radius", e.shell_radius},
                   {"value", e.value},
                   {"cg_iterations", e.cg_iterations},
                   {"residual", e.residual},
                   {"min", e.min_value},
                   {"max", e.max_value}});
  }
  rep.results["levels"] = arr;

  const CapacityEstimate& finest = est.back();
  if (sweep) {
    const TargetSet& b = sweep->b ? *sweep->b : targets.back();
    const auto pts = log_cutoff_energy_sweep(fields.back(), levels.back().grid, b, sweep->ns, sweep->outer);
    const InverseLogFit fit = fit_inverse_log(pts);
    Json sw = Json::array();
    for (const auto& p : pts) {
      csv << r(gamma) << ',' << da_text << ',' << dim << ',' << r(finest.grid_h) << ',' << r(finest.shell_radius) << ','
          << r(p.n) << ',' << r(p.energy) << ',' << r(p.l2sq) << ',' << r(finest.value) << '\n';
      sw.push_back({{"n", p.n}, {"energy", p.energy}, {"l2sq", p.l2sq}});
    }
    rep.results["sweep"] = sw;
    rep.results["fit"] = {{"a", fit.linear.slope},
                          {"b", fit.linear.intercept},
                          {"r_squared", fit.linear.r_squared},
                          {"decay_exponent", fit.decay_exponent}};
    if (ex.r2) rep.at_least("cutoff_fit_r_squared", fit.linear.r_squared, *ex.r2);
    bool decreasing = true;
    for (std::size_t i = 1; i < pts.size(); ++i) decreasing = decreasing && pts[i].energy <= pts[i - 1].energy;
    rep.add("cutoff_energy_decreasing", decreasing ? 1 : 0, 1, "==", decreasing);
  }
  art.write("capacity.csv", csv.str());

  if (fields.front().is_diagonal()) {
    double worst = 0.0;
    for (const auto& e : est) worst = std::max({worst, -e.min_value, e.max_value - 1.0});
    rep.at_most("minimizer_in_unit_interval", worst, 1e-9);
  }
  if (ex.value) {
    for (const auto& e : est)
      rep.at_most("capacity_oracle_h" + tag(e.grid_h), std::abs(e.value - *ex.value) / *ex.value, *ex.rel_tol);
  }
  if (ex.below) rep.at_most("capacity_below", finest.value, *ex.below);
  if (ex.above) rep.at_least("capacity_above", finest.value, *ex.above);
}

// ---------------------------------------------------------------- evolve

Scheme parse_scheme(const Node& f, Scheme fallback) {
  if (!f.has("scheme")) return fallback;
  return scheme_from_string(f.string("scheme"));
}

void run_evolve(const ExperimentConfig& cfg, RunReport& rep, Artifacts& art, int workers) {
  const Node f(cfg.fixture, "fixture");
  const auto levels = parse_levels(f);
  const int dim = levels.front().grid.dim();
  std::vector<CoefficientField> fields;
  for (const auto& lv : levels) fields.push_back(parse_field(f.child("field"), dim, &lv.grid));
  const BoundaryMode mode = boundary_mode_from_string(f.string("mode", "dirichlet"));
  const InitialDatum u0 = f.has("u0") ? parse_initial(f.child("u0"), dim) : InitialDatum{"ones", "ones", {}, {}, 1.0, true};
  const double t_end = positive(f, "t_end");
  const std::size_t steps = positive_count(f, "steps", 100);
  const Scheme scheme = parse_scheme(f, Scheme::backward_euler);
  EvolveOptions opt = parse_solver(f);
  opt.record_every = positive_count(f, "record_every", 1);
  const bool dump = f.boolean("dump", false);
  struct Expect {
    std::optional<double> mass, defect_below;
    double rel_tol = 0.02, trend_tol = 1e-9;
    bool trend = false, conserved = false;
  } ex;
  if (auto e = f.optional_child("expect")) {
    if (e->has("mass")) ex.mass = e->number("mass");
    if (e->has("mass_oracle")) {
      const std::string o = e->string("mass_oracle");
      if (o != "fourier-dirichlet") schema_error(e->path() + ".mass_oracle", "unknown oracle '" + o + "'");
      const CoefficientField& fld = fields.back();
      const DomainGrid& g = levels.back().grid;
      if (dim != 1 || fld.lipschitz_bound() != 0.0)
        schema_error(e->path() + ".mass_oracle", "fourier-dirichlet needs a constant 1-D field");
      ex.mass = fourier_dirichlet_mass(fld(g.center(0))(0, 0), t_end, g.axis(0).hi - g.axis(0).lo);
    }
    ex.rel_tol = e->number("rel_tol", ex.rel_tol);
    if (e->has("defect_below")) ex.defect_below = e->number("defect_below");
    ex.trend = e->boolean("defect_nonincreasing", false);
    ex.trend_tol = e->number("trend_tolerance", ex.trend_tol);
    ex.conserved = e->boolean("conserved", false);
    e->finish();
  }
  f.finish();

  std::vector<Trajectory> runs(levels.size());
  parallel_for(levels.size(), workers, [&](std::size_t i) {
    const Generator gen(assemble(levels[i].grid, fields[i], mode));
    runs[i] = evolve(gen, materialize(u0, levels[i].grid), t_end, steps, scheme, opt);
  });

  const Trajectory& fine = runs.back();
  std::ostringstream traj_csv;
  write_trajectory_csv(fine, traj_csv);
  art.write("trajectory.csv", traj_csv.str());
  if (dump) {
    write_state_dump(fine, levels.back().grid, art.path("states").string());
    art.record("states.bin");
    art.record("states.json");
  }

  const bool ones = u0.kind == "ones";
  std::vector<double> defects;
  std::ostringstream dcsv;
  dcsv << "h,steps,mass,defect\n";
  Json arr = Json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const double mass = runs[i].masses.back();
    const double defect = ones ? mass_defect(runs[i]).back() : 1.0 - mass / runs[i].masses.front();
    defects.push_back(defect);
    dcsv << r(levels[i].grid.h()) << ',' << steps << ',' << r(mass) << ',' << r(defect) << '\n';
    arr.push_back({{"h", levels[i].grid.h()}, {"mass", mass}, {"defect", defect}});
  }
  art.write("defect.csv", dcsv.str());
  rep.results["levels"] = arr;
  rep.results["scheme"] = to_string(scheme);
  rep.results["mode"] = to_string(mode);

  const auto u0_fine = materialize(u0, levels.back().grid);
  if (in_unit_interval(u0_fine) && fields.back().is_diagonal() && scheme == Scheme::backward_euler) {
    std::size_t violations = 0;
    for (const auto& t : runs) violations += check_submarkov(t, true).violations;
    rep.add("submarkov", static_cast<double>(violations), 0, "==", violations == 0);
  }
  if (ex.mass) {
    const double m = fine.masses.back() / fine.masses.front();
    rep.results["mass_oracle"] = *ex.mass;
    rep.at_most("mass_oracle", std::abs(m - *ex.mass) / *ex.mass, ex.rel_tol);
  }
  if (ex.defect_below) rep.at_most("defect_below", defects.back(), *ex.defect_below);
  if (ex.trend) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < defects.size(); ++i) worst = std::max(worst, defects[i] - defects[i - 1]);
    if (defects.size() < 2) worst = 0.0;
    rep.at_most("defect_nonincreasing", worst, ex.trend_tol);
  }
  if (ex.conserved) rep.at_most("mass_conserved", std::abs(defects.back()), 1e-12);
}

// ---------------------------------------------------------------- domination

void run_domination(const ExperimentConfig& cfg, RunReport& rep, Artifacts& art, int workers) {
  const Node f(cfg.fixture, "fixture");
  const DomainGrid grid = parse_grid(f.child("grid"));
  const CoefficientField field = parse_field(f.child("field"), grid.dim(), &grid);
  std::vector<InitialDatum> data;
  for (const Node& n : f.array("initial_data")) data.push_back(parse_initial(n, grid.dim()));
  if (data.empty()) schema_error("fixture.initial_data", "need at least one initial datum");
  const double t_end = positive(f, "t_end");
  const std::size_t steps = positive_count(f, "steps", 100);
  const double tol = positive(f, "tolerance", 1e-10);
  const EvolveOptions opt = parse_solver(f);
  f.finish();

  const Generator gen_free(assemble(grid, field, BoundaryMode::free));
  const Generator gen_dir(assemble(grid, field, BoundaryMode::dirichlet));
  std::vector<DominationReport> reports(data.size());
  parallel_for(data.size(), workers, [&](std::size_t i) {
    const auto u0 = materialize(data[i], grid);
    reports[i] = check_domination(gen_free, gen_dir, u0, t_end, steps, tol, opt);
  });

  std::ostringstream csv;
  csv << "label,time,min_margin,max_margin,free_mass,dirichlet_mass\n";
  Json arr = Json::array();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& d = reports[i];
    for (std::size_t k = 0; k < d.free_run.times.size(); ++k) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t c = 0; c < grid.inside_count(); ++c) {
        const double m = d.free_run.states[k][c] - d.dirichlet_run.states[k][c];
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      csv << data[i].label << ',' << r(d.free_run.times[k]) << ',' << r(lo) << ',' << r(hi) << ','
          << r(d.free_run.masses[k]) << ',' << r(d.dirichlet_run.masses[k]) << '\n';
    }
    arr.push_back({{"label", data[i].label}, {"min_margin", d.min_margin}, {"violations", d.violations}});
    rep.at_least("domination_" + data[i].label, d.min_margin, -tol);
    const auto u0 = materialize(data[i], grid);
    if (in_unit_interval(u0) && field.is_diagonal()) {
      const std::size_t v = check_submarkov(d.free_run, true).violations + check_submarkov(d.dirichlet_run, true).violations;
      rep.add("submarkov_" + data[i].label, static_cast<double>(v), 0, "==", v == 0);
    }
  }
  art.write("domination.csv", csv.str());
  rep.results["runs"] = arr;
}

// ---------------------------------------------------------------- dg-check

void run_dg_check(const ExperimentConfig& cfg, RunReport& rep, Artifacts& art, int) {
  const Node f(cfg.fixture, "fixture");
  const DomainGrid grid = parse_grid(f.child("grid"));
  const CoefficientField field = parse_field(f.child("field"), grid.dim(), &grid);
  const BoundaryMode mode = boundary_mode_from_string(f.string("mode", "dirichlet"));
  const Box bx = parse_box(f.child("X"), grid.dim());
  const Box by = parse_box(f.child("Y"), grid.dim());
  const auto t_list = f.numbers("t", {0.01, 0.05});
  const double tol = positive(f, "tolerance", 0.05);
  const bool expect_violation = f.boolean("expect_violation", false);
  std::optional<double> c_sup;
  if (f.has("c_sup") && !(f.raw("c_sup").is_string() && f.raw("c_sup") == "auto")) c_sup = positive(f, "c_sup");
  else if (f.has("c_sup")) f.raw("c_sup");
  f.finish();
  for (double t : t_list)
    if (!(t > 0.0)) schema_error("fixture.t", "times must be positive");

  if (!c_sup) {
    double m = 0.0;
    const FaceTable faces = sample_on_faces(field, grid, mode == BoundaryMode::dirichlet);
    for (const auto& fc : faces.interior()) m = std::max(m, fc.value.max_eigenvalue());
    for (const auto& fc : faces.boundary()) m = std::max(m, fc.value.max_eigenvalue());
    for (std::size_t c = 0; c < grid.inside_count(); ++c) m = std::max(m, field(grid.center(c)).max_eigenvalue());
    c_sup = m;
  }
  const auto x = cells_in_box(grid, bx);
  const auto y = cells_in_box(grid, by);
  const Generator gen(assemble(grid, field, mode));
  const auto dg = davies_gaffney_check(gen, grid, x, y, t_list, *c_sup, tol);

  std::ostringstream csv;
  csv << "t,pairing,bound,ratio,ok\n";
  double worst = 0.0;
  Json arr = Json::array();
  for (const auto& row : dg.rows) {
    const double ratio = row.bound > 0.0 ? row.pairing / row.bound : std::numeric_limits<double>::infinity();
    worst = std::max(worst, ratio);
    csv << r(row.t) << ',' << r(row.pairing) << ',' << r(row.bound) << ',' << r(ratio) << ','
        << (row.ok ? "true" : "false") << '\n';
    arr.push_back({{"t", row.t}, {"pairing", row.pairing}, {"bound", row.bound}, {"ok", row.ok}});
  }
  art.write("dg.csv", csv.str());
  rep.results["rows"] = arr;
  rep.results["gap"] = dg.gap;
  rep.results["c_sup"] = dg.c_sup;
  if (expect_violation) rep.add("davies_gaffney_violated", worst, 1.0 + tol, ">", worst > 1.0 + tol);
  else rep.at_most("davies_gaffney", worst, 1.0 + tol);
}

// ---------------------------------------------------------------- irreducibility

void run_irreducibility(const ExperimentConfig& cfg, RunReport& rep, Artifacts& art, int) {
  const Node f(cfg.fixture, "fixture");
  const DomainGrid grid = parse_grid(f.child("grid"));
  const int dim = grid.dim();
  const CoefficientField field = parse_field(f.child("field"), dim, &grid);
  const BoundaryMode mode = boundary_mode_from_string(f.string("mode", "free"));
  const double t = positive(f, "t", 0.1);
  const double threshold = positive(f, "threshold", 1e-13);
  const Point seed = as_point(f.raw("seed_point"), dim, "fixture.seed_point");
  const Scheme scheme = parse_scheme(f, Scheme::matrix_exponential);
  const std::size_t steps = positive_count(f, "steps", 1);
  std::optional<std::string> expect;
  if (f.has("expect")) {
    expect = f.string("expect");
    if (*expect != "irreducible" && *expect != "reducible") schema_error("fixture.expect", "irreducible or reducible");
  }
  struct Interface {
    int axis;
    double at;
    double tolerance;
  };
  std::optional<Interface> iface;
  if (auto i = f.optional_child("interface")) {
    const auto axis = i->integer("axis", 0);
    if (axis < 0 || axis >= dim) schema_error(i->path() + ".axis", "axis out of range");
    iface = Interface{static_cast<int>(axis), i->number("at"), positive(*i, "leak_tolerance", 1e-8)};
    i->finish();
  }
  f.finish();

  const Generator gen(assemble(grid, field, mode));
  const std::size_t seed_cell = grid.nearest_cell(seed);
  const auto rep_irr = irreducibility_check(gen, grid, t, threshold, seed_cell, scheme, steps);

  std::ostringstream csv;
  for (int k = 0; k < dim; ++k) csv << "x" << k << ',';
  csv << "value\n";
  for (std::size_t c = 0; c < grid.inside_count(); ++c) {
    const Point p = grid.center(c);
    for (int k = 0; k < dim; ++k) csv << r(p[k]) << ',';
    csv << r(rep_irr.state[c]) << '\n';
  }
  art.write("irreducibility.csv", csv.str());
  rep.results["verdict"] = to_string(rep_irr.verdict);
  rep.results["min_ratio"] = rep_irr.min_ratio;
  rep.results["geometric_components"] = rep_irr.geometric_components;
  rep.results["coupling_components"] = rep_irr.coupling_components;
  rep.results["mass_outside_seed_component"] = rep_irr.mass_outside_seed_component;

  rep.add("coupling_consistent", rep_irr.consistent ? 1 : 0, 1, "==", rep_irr.consistent);
  if (expect) {
    const bool ok = to_string(rep_irr.verdict) == *expect;
    rep.add("verdict_" + *expect, ok ? 1 : 0, 1, "==", ok);
    if (*expect == "irreducible") rep.add("min_ratio", rep_irr.min_ratio, threshold, ">", rep_irr.min_ratio > threshold);
    else rep.add("cross_mass_zero", rep_irr.mass_outside_seed_component, 0.0, "==", rep_irr.mass_outside_seed_component == 0.0);
  }
  if (iface) {
    const double seed_side = grid.center(seed_cell)[iface->axis] - iface->at;
    double leak = 0.0, total = 0.0;
    for (std::size_t c = 0; c < grid.inside_count(); ++c) {
      const double m = gen.form().mass[c] * std::abs(rep_irr.state[c]);
      total += m;
      if ((grid.center(c)[iface->axis] - iface->at) * seed_side < 0.0) leak += m;
    }
    const double initial = gen.form().mass[seed_cell];
    rep.results["interface_leak"] = leak / initial;
    rep.results["retained_mass"] = total / initial;
    rep.at_most("interface_leak", leak / initial, iface->tolerance);
  }
}

// ---------------------------------------------------------------- minkowski

void run_minkowski(const ExperimentConfig& cfg, RunReport& rep, Artifacts& art, int workers) {
  const Node f(cfg.fixture, "fixture");
  const auto dim_raw = f.integer("dim");
  if (dim_raw < 1 || dim_raw > 3) schema_error("fixture.dim", "dim must be 1, 2 or 3");
  const int dim = static_cast<int>(dim_raw);
  const TargetSet b = parse_target(f.child("target"), dim, nullptr);
  std::vector<double> scales;
  if (f.has("scales")) scales = f.numbers("scales");
  else {
    const auto first = f.integer("first_power", 4), last = f.integer("last_power", 10);
    if (first < 0 || last < first || last > 30) schema_error("fixture", "bad dyadic scale range");
    scales = dyadic_scales(static_cast<int>(first), static_cast<int>(last));
  }
  const auto refinement = f.integer("refinement", 4);
  if (refinement < 4 || refinement > 64) schema_error("fixture.refinement", "refinement must lie in [4, 64]");
  std::optional<double> expect;
  double tol = 0.05;
  if (auto e = f.optional_child("expect")) {
    if (e->has("dimension")) expect = e->number("dimension");
    if (e->has("dimension_oracle")) {
      const std::string o = e->string("dimension_oracle");
      if (o != "cantor") schema_error(e->path() + ".dimension_oracle", "unknown oracle '" + o + "'");
      expect = std::log(2.0) / std::log(3.0);
    }
    tol = positive(*e, "tolerance", tol);
    e->finish();
  }
  f.finish();

  const DimensionFit fit = minkowski_dimension(b, dim, scales, static_cast<int>(refinement), workers);
  std::ostringstream csv;
  csv << "delta,volume\n";
  for (std::size_t i = 0; i < fit.scales_used.size(); ++i) csv << r(fit.scales_used[i]) << ',' << r(fit.volumes[i]) << '\n';
  art.write("minkowski.csv", csv.str());
  rep.results["estimate"] = fit.estimate;
  rep.results["raw_estimate"] = fit.raw_estimate;
  rep.results["slope_stderr"] = fit.slope_stderr;
  rep.results["r_squared"] = fit.r_squared;
  if (expect) rep.add("dimension", fit.estimate, *expect, "within " + tag(tol), std::abs(fit.estimate - *expect) <= tol);
}

// ---------------------------------------------------------------- parametrix

Coefficient1D parse_coefficient_1d(const Node& n) {
  const std::string kind = n.string("kind");
  Coefficient1D c;
  if (kind == "constant") c = Coefficient1D::constant(positive(n, "value"));
  else if (kind == "sine") c = Coefficient1D::sine(n.number("a"), n.number("b"));
  else schema_error(n.path() + ".kind", "unknown 1-D coefficient '" + kind + "'");
  n.finish();
  return c;
}

void run_parametrix(const ExperimentConfig& cfg, RunReport& rep, Artifacts& art, int workers) {
  const Node f(cfg.fixture, "fixture");
  const Coefficient1D coef = f.has("coefficient") ? parse_coefficient_1d(f.child("coefficient")) : Coefficient1D::sine(2.0, 1.0);
  ParametrixOptions popt;
  if (f.has("window")) {
    const auto w = f.numbers("window");
    if (w.size() != 2 || !(w[1] > w[0])) schema_error("fixture.window", "expected [lo, hi]");
    popt.window_lo = w[0];
    popt.window_hi = w[1];
  }
  double phi_center = 0.0, phi_width = 0.5;
  if (auto p = f.optional_child("phi")) {
    phi_center = p->number("center", 0.0);
    phi_width = positive(*p, "width", 0.5);
    p->finish();
  }
  const auto phi_fn = [=](double x) { return std::exp(-0.5 * (x - phi_center) * (x - phi_center) / (phi_width * phi_width)); };

  struct MassCase {
    SymMatrix c;
    double t;
  };
  std::vector<MassCase> mass_cases;
  double mass_tol = 1e-6;
  if (auto km = f.optional_child("kernel_mass")) {
    for (const Node& n : km->array("cases")) {
      const Json& cj = n.raw("c");
      const int d = cj.is_array() ? static_cast<int>(cj.size()) : 1;
      if (d < 1 || d > 3) schema_error(n.path() + ".c", "matrix dimension must be 1 to 3");
      mass_cases.push_back({as_matrix(cj, d, n.path() + ".c"), positive(n, "t", 1.0)});
      n.finish();
    }
    mass_tol = positive(*km, "tolerance", mass_tol);
    km->finish();
  }
  struct ResolventCase {
    double c = 1.0, kappa = 1.0, tol = 1e-6;
    std::vector<double> xs{0.0, 0.5, 1.0};
  };
  std::optional<ResolventCase> res_case;
  if (auto rc = f.optional_child("resolvent")) {
    res_case = ResolventCase{positive(*rc, "c", 1.0), positive(*rc, "kappa", 1.0), positive(*rc, "tolerance", 1e-6),
                             rc->numbers("x", {0.0, 0.5, 1.0})};
    rc->finish();
  }
  struct NormCase {
    std::vector<double> kappas;
    double lo = -0.6, hi = -0.4;
    int trials = 3, iterations = 20;
  };
  std::optional<NormCase> norm_case;
  if (auto nc = f.optional_child("q_norm")) {
    norm_case = NormCase{nc->numbers("kappas", {10.0, 100.0, 1000.0, 10000.0})};
    const auto range = nc->numbers("slope_range", {-0.6, -0.4});
    if (range.size() != 2 || range[0] > range[1]) schema_error(nc->path() + ".slope_range", "expected [lo, hi]");
    norm_case->lo = range[0];
    norm_case->hi = range[1];
    norm_case->trials = static_cast<int>(positive_count(*nc, "trials", 3));
    norm_case->iterations = static_cast<int>(positive_count(*nc, "iterations", 20));
    if (norm_case->kappas.size() < 2) schema_error(nc->path() + ".kappas", "need at least two kappas");
    for (double k : norm_case->kappas)
      if (k < 1.0) schema_error(nc->path() + ".kappas", "kappa must be >= 1");
    nc->finish();
  }
  struct NeumannCase {
    double kappa = 1000.0, tol = 0.05;
    int terms = 4;
  };
  std::optional<NeumannCase> neu_case;
  if (auto nc = f.optional_child("neumann")) {
    neu_case = NeumannCase{positive(*nc, "kappa", 1000.0), positive(*nc, "tolerance", 0.05),
                           static_cast<int>(positive_count(*nc, "series_terms", 4))};
    nc->finish();
  }
  struct ExactCase {
    double c = 1.0, kappa = 10.0, tol = 1e-4, ah = 0.02;
  };
  std::optional<ExactCase> exact_case;
  if (auto ec = f.optional_child("constant_exactness")) {
    exact_case = ExactCase{positive(*ec, "c", 1.0), positive(*ec, "kappa", 10.0), positive(*ec, "tolerance", 1e-4),
                           positive(*ec, "decay_times_pitch", 0.02)};
    ec->finish();
  }
  struct FirstOrderCase {
    double kappa = 10.0, tol = 0.5;
  };
  std::optional<FirstOrderCase> first_case;
  if (auto fc = f.optional_child("first_order")) {
    first_case = FirstOrderCase{positive(*fc, "kappa", 10.0), positive(*fc, "tolerance", 0.5)};
    fc->finish();
  }
  f.finish();

  for (std::size_t i = 0; i < mass_cases.size(); ++i) {
    const KernelMass km = frozen_kernel_mass(mass_cases[i].c, mass_cases[i].t);
    rep.results["kernel_mass"].push_back({{"mass", km.mass}, {"pitch", km.pitch}, {"points", km.points}});
    rep.at_most("kernel_mass_" + std::to_string(i), std::abs(km.mass - 1.0), mass_tol);
  }
  if (res_case) {
    const SymMatrix c = SymMatrix::scalar(1, res_case->c);
    double worst = 0.0;
    for (double x : res_case->xs) {
      const Point p{x, 0.0, 0.0};
      const double closed = std::exp(-std::abs(x) * std::sqrt(res_case->kappa / res_case->c)) /
                            (2.0 * std::sqrt(res_case->kappa * res_case->c));
      const double quad = resolvent_kernel_quadrature(c, res_case->kappa, p);
      worst = std::max(worst, std::abs(quad - closed) / closed);
      rep.results["resolvent"].push_back({{"x", x}, {"closed_form", closed}, {"quadrature", quad}});
    }
    rep.at_most("resolvent_kernel_laplace", worst, res_case->tol);
  }
  if (exact_case) {
    ParametrixOptions o = popt;
    o.pitch = exact_case->ah * std::sqrt(exact_case->c / exact_case->kappa);
    const ParametrixOperator op(Coefficient1D::constant(exact_case->c), exact_case->kappa, o);
    const auto phi = op.sample(phi_fn);
    const auto res = apply_parametrix(op, phi);
    rep.results["constant_exactness"] = {{"residual", res.residual}, {"pitch", op.pitch()}};
    rep.at_most("constant_coefficient_exact", res.residual, exact_case->tol);
  }
  if (first_case) {
    const ParametrixOperator op(coef, first_case->kappa, popt);
    const auto res = apply_parametrix(op, op.sample(phi_fn));
    rep.results["first_order"] = {{"residual", res.residual}, {"window_ok", res.window_ok}};
    rep.at_most("parametrix_first_order", res.residual, first_case->tol);
  }
  if (norm_case) {
    const std::size_t m = norm_case->kappas.size();
    std::vector<double> norms(m), residuals(m);
    parallel_for(m, workers, [&](std::size_t i) {
      const ParametrixOperator op(coef, norm_case->kappas[i], popt);
      norms[i] = q_norm_estimate(op, norm_case->trials, norm_case->iterations, cfg.seed).norm;
      residuals[i] = apply_parametrix(op, op.sample(phi_fn)).residual;
    });
    std::ostringstream csv;
    csv << "kappa,q_norm,slope_so_far,residual\n";
    for (std::size_t i = 0; i < m; ++i) {
      const double slope = i == 0 ? std::numeric_limits<double>::quiet_NaN()
                                  : loglog_slope(std::span(norm_case->kappas).first(i + 1), std::span(norms).first(i + 1));
      csv << r(norm_case->kappas[i]) << ',' << r(norms[i]) << ',' << r(slope) << ',' << r(residuals[i]) << '\n';
      rep.results["q_norm"].push_back({{"kappa", norm_case->kappas[i]}, {"norm", norms[i]}});
    }
    art.write("parametrix.csv", csv.str());
    if (std::any_of(norms.begin(), norms.end(), [](double v) { return v <= 0.0; })) {
      rep.add("q_norm_slope", 0.0, norm_case->hi, "in", false);
    } else {
      const double slope = loglog_slope(norm_case->kappas, norms);
      rep.add("q_norm_slope", slope, norm_case->hi,
              "in [" + tag(norm_case->lo) + ", " + tag(norm_case->hi) + "]",
              slope >= norm_case->lo && slope <= norm_case->hi);
    }
    rep.add("q_norm_below_one_at_max_kappa", norms.back(), 1.0, "<", norms.back() < 1.0);
  }
  if (neu_case) {
    const ParametrixOperator op(coef, neu_case->kappa, popt);
    const auto phi = op.sample(phi_fn);
    const NeumannResult nr = neumann_resolvent(op, phi, neu_case->terms, cfg.seed);
    std::ostringstream csv;
    csv << "terms,residual\n";
    for (std::size_t i = 0; i < nr.residuals.size(); ++i) csv << (i + 1) << ',' << r(nr.residuals[i]) << '\n';
    art.write("neumann.csv", csv.str());
    rep.results["neumann"] = {{"q_norm", nr.q_norm}, {"residual", nr.residual}, {"kappa", neu_case->kappa}};
    rep.at_most("neumann_residual", nr.residual, neu_case->tol);
  }
}

using Runner = std::function<void(const ExperimentConfig&, RunReport&, Artifacts&, int)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"classify-1d", run_classify_1d}, {"capacity", run_capacity},         {"evolve", run_evolve},
      {"domination", run_domination},   {"dg-check", run_dg_check},         {"irreducibility", run_irreducibility},
      {"minkowski", run_minkowski},     {"parametrix", run_parametrix}};
  return table;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  const auto it = runners().find(cfg.experiment);
  if (it == runners().end()) schema_error("experiment", "unknown experiment '" + cfg.experiment + "'");
  const int workers = worker_count();
  RunReport rep;
  rep.experiment = cfg.experiment;
  rep.config_echo = cfg.document;
  rep.config_echo.erase("output_dir");
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorCode::invalid_argument, "cannot create output directory " + dir.string());
  Artifacts art(dir, rep);
  const auto start = std::chrono::steady_clock::now();
  it->second(cfg, rep, art, workers);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream(dir / "report.json", std::ios::binary) << to_json(rep);
  std::ofstream(dir / "report.txt", std::ios::binary) << to_text(rep);
  return rep;
}

}  // namespace lab
