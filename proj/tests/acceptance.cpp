#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lab/config.hpp"
#include "lab/error.hpp"
#include "lab/experiments.hpp"
#include "lab/report.hpp"

namespace fs = std::filesystem;
using namespace lab;

namespace {

struct Run {
  std::string experiment;
  std::string config;
};

struct Criterion {
  int id;
  std::string title;
  std::vector<Run> runs;
  std::string check_prefix;  // empty: every check of every run counts
  double budget_seconds;
};

struct Outcome {
  RunReport report;
  double seconds = 0.0;
  std::string error;
};

fs::path g_out;

Outcome execute(const Run& run, const fs::path& dir) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ExperimentConfig cfg =
        load_config(run.experiment, std::string(LAB_CONFIG_DIR) + "/" + run.config + ".json", {}, dir.string());
    o.report = run_experiment(cfg);
  } catch (const Error& e) {
    o.error = std::string(to_string(e.code())) + ": " + e.what();
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) {
      why = rel.string();
      return false;
    }
    ++files;
  }
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b))) {
      why = fs::relative(e.path(), b).string();
      return false;
    }
  why = std::to_string(files) + " files";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  g_out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance-out");
  fs::remove_all(g_out);

  const std::vector<Criterion> criteria{
      {1, "1-D classification lattice", {{"classify-1d", "classify_1d"}}, "", 5},
      {2, "cutoff energy identity", {{"classify-1d", "cutoff_energy"}}, "", 10},
      {3, "carre du champ sup scaling", {{"classify-1d", "gamma_sup"}}, "", 10},
      {4, "capacity oracle tanh(1)", {{"capacity", "capacity_tanh"}}, "", 30},
      {5,
       "capacity decay law and sub-threshold floor",
       {{"capacity", "capacity_point_gamma2"}, {"capacity", "capacity_segment_gamma0"}},
       "",
       120},
      {6,
       "conservation dichotomy",
       {{"evolve", "evolve_fourier"}, {"evolve", "evolve_profile_delta2"}, {"evolve", "evolve_free"}},
       "",
       60},
      {7,
       "domination",
       {{"domination", "domination_constant"},
        {"domination", "domination_sine"},
        {"domination", "domination_point_gamma2"}},
       "domination_",
       30},
      {8,
       "submarkov bounds",
       {{"domination", "domination_constant"},
        {"domination", "domination_sine"},
        {"domination", "domination_point_gamma2"},
        {"evolve", "evolve_fourier"},
        {"evolve", "evolve_profile_delta2"},
        {"evolve", "evolve_free"}},
       "submarkov",
       30},
      {9,
       "off-diagonal gaussian bound",
       {{"dg-check", "dg_constant"},
        {"dg-check", "dg_constant4"},
        {"dg-check", "dg_constant4_wrong_csup"},
        {"dg-check", "dg_profile_delta1"},
        {"dg-check", "dg_sine"}},
       "",
       60},
      {10,
       "irreducibility and invariant halves",
       {{"irreducibility", "irreducible_interval"},
        {"irreducibility", "reducible_two_intervals"},
        {"irreducibility", "irreducible_disk_gamma2"},
        {"irreducibility", "example_half_lines"}},
       "",
       60},
      {11, "parametrix", {{"parametrix", "parametrix"}}, "", 120},
      {12,
       "minkowski dimension",
       {{"minkowski", "minkowski_point"}, {"minkowski", "minkowski_segment"}, {"minkowski", "minkowski_cantor"}},
       "",
       30},
  };

  std::map<std::string, Outcome> cache;
  std::vector<Run> all_runs;
  bool all_passed = true;
  for (const Criterion& c : criteria) {
    bool ok = true;
    double seconds = 0.0;
    std::size_t counted = 0;
    std::string detail;
    for (const Run& run : c.runs) {
      auto it = cache.find(run.config);
      if (it == cache.end()) {
        it = cache.emplace(run.config, execute(run, g_out / "first" / run.config)).first;
        all_runs.push_back(run);
      }
      const Outcome& o = it->second;
      seconds += o.seconds;
      if (!o.error.empty()) {
        ok = false;
        detail += " " + run.config + "(" + o.error + ")";
        continue;
      }
      for (const Check& chk : o.report.checks) {
        if (!c.check_prefix.empty() && chk.name.rfind(c.check_prefix, 0) != 0) continue;
        ++counted;
        if (!chk.passed) {
          ok = false;
          detail += " " + run.config + ":" + chk.name + "=" + format_real(chk.measured);
        }
      }
    }
    if (counted == 0) {
      ok = false;
      detail += " no checks";
    }
    const bool in_time = seconds <= c.budget_seconds;
    if (!in_time) detail += " over budget";
    const bool pass = ok && in_time;
    all_passed = all_passed && pass;
    std::printf("criterion %2d %-44s %s  checks=%zu time=%.2fs budget=%.0fs%s\n", c.id, c.title.c_str(),
                pass ? "PASS" : "FAIL", counted, seconds, c.budget_seconds, detail.c_str());
    std::fflush(stdout);
  }

  {
    bool ok = true;
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t compared = 0;
    for (const Run& run : all_runs) {
      execute(run, g_out / "second" / run.config);
      std::string why;
      if (!same_tree(g_out / "first" / run.config, g_out / "second" / run.config, why)) {
        ok = false;
        detail += " " + run.config + ":" + why;
      }
      ++compared;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all_passed = all_passed && ok;
    std::printf("criterion 13 %-44s %s  runs=%zu time=%.2fs%s\n", "byte-identical reruns", ok ? "PASS" : "FAIL",
                compared, seconds, detail.c_str());
  }
  return all_passed ? 0 : 1;
}
