#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lab/config.hpp"
#include "lab/error.hpp"
#include "lab/experiments.hpp"
#include "lab/report.hpp"

using namespace lab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

Json minkowski_doc(const std::string& out) {
  return Json::parse(R"({"experiment": "minkowski", "seed": 3, "output_dir": ")" + out + R"(",
    "fixture": {"dim": 1, "target": {"kind": "cantor", "level": 6}, "first_power": 3, "last_power": 8,
                "expect": {"dimension_oracle": "cantor", "tolerance": 0.05}}})");
}

}  // namespace

TEST_CASE("overrides by dotted path") {
  Json doc = Json::parse(R"({"fixture": {"grid": {"h": 0.5, "bbox": [[0, 1]]}, "t": [0.1, 0.2]}})");
  apply_override(doc, "fixture.grid.h=0.25");
  apply_override(doc, "fixture.t.1=0.3");
  apply_override(doc, "fixture.mode=free");
  apply_override(doc, "seed=9");
  CHECK(doc["fixture"]["grid"]["h"] == 0.25);
  CHECK(doc["fixture"]["t"][1] == 0.3);
  CHECK(doc["fixture"]["mode"] == "free");
  CHECK(doc["seed"] == 9);
  CHECK(code_of([&] { apply_override(doc, "no-equals-sign"); }) == ErrorCode::schema);
}

TEST_CASE("schema errors") {
  CHECK(code_of([] { make_config("not-an-experiment", Json::object()); }) == ErrorCode::schema);
  CHECK(code_of([] { make_config("minkowski", Json::parse(R"({"fixture": {}, "colour": 1})")); }) == ErrorCode::schema);
  const ExperimentConfig cfg = make_config(
      "minkowski", Json::parse(R"({"fixture": {"dim": 1, "target": {"kind": "cantor", "level": 3}, "typo": 1}})"));
  CHECK(code_of([&] { run_experiment(cfg); }) == ErrorCode::schema);
  CHECK(code_of([] { make_config("capacity", Json::parse(R"({"experiment": "evolve", "fixture": {}})")); }) ==
        ErrorCode::schema);
}

TEST_CASE("exit codes") {
  RunReport ok;
  ok.at_most("a", 1.0, 2.0);
  CHECK(exit_code(ok) == 0);
  RunReport bad = ok;
  bad.at_most("b", 3.0, 2.0);
  CHECK(exit_code(bad) == 1);
  CHECK(exit_code(ErrorCode::schema) == 2);
  CHECK(exit_code(ErrorCode::invalid_argument) == 2);
  CHECK(exit_code(ErrorCode::solver) == 3);
}

TEST_CASE("report formats") {
  RunReport r;
  r.experiment = "demo";
  CHECK(r.passed());
  const Json empty = Json::parse(to_json(r));
  CHECK(empty["checks"].empty());
  CHECK(to_text(r).empty());

  r.at_most("residual", 0.5, 1.0);
  r.at_least("margin", -1.0, 0.0);
  CHECK_FALSE(r.passed());
  CHECK(to_text(r) ==
        "residual measured=5.000000000000e-01 bound=1.000000000000e+00 PASS\n"
        "margin measured=-1.000000000000e+00 bound=0.000000000000e+00 FAIL\n");
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  const std::string text = canonical_json(Json::parse(R"({"b": 1.5, "a": [1, "x"]})"));
  CHECK(text.find("\"a\"") < text.find("\"b\""));
  CHECK(text.find("1.500000000000e+00") != std::string::npos);
  CHECK(to_json(r).find("wall_time") == std::string::npos);
}

TEST_CASE("same config and seed reproduce byte-identical artifacts") {
  const fs::path base = fs::temp_directory_path() / "lab_cli_determinism";
  fs::remove_all(base);
  for (const char* run : {"a", "b"}) {
    const ExperimentConfig cfg = make_config("minkowski", minkowski_doc((base / run).string()));
    const RunReport rep = run_experiment(cfg);
    CHECK(rep.passed());
  }
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    CAPTURE(entry.path().filename().string());
    CHECK(slurp(entry.path()) == slurp(base / "b" / entry.path().filename()));
  }
  CHECK(fs::exists(base / "a" / "report.json"));
  CHECK(fs::exists(base / "a" / "report.txt"));
  CHECK(fs::exists(base / "a" / "minkowski.csv"));
  fs::remove_all(base);
}

TEST_CASE("classification experiment writes the full lattice") {
  const fs::path out = fs::temp_directory_path() / "lab_cli_classify";
  fs::remove_all(out);
  Json doc = {{"output_dir", out.string()}, {"fixture", Json::object()}};
  const RunReport rep = run_experiment(make_config("classify-1d", doc));
  CHECK(rep.passed());
  std::istringstream csv(slurp(out / "classify_1d.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) {
    if (rows >= 0) CHECK(line.substr(line.rfind(',') + 1) == "true");
    ++rows;
  }
  CHECK(rows == 28);
  fs::remove_all(out);
}

TEST_CASE("worker count from the environment") {
  setenv("LAB_WORKERS", "3", 1);
  CHECK(worker_count() == 3);
  setenv("LAB_WORKERS", "0", 1);
  CHECK(code_of([] { worker_count(); }) == ErrorCode::schema);
  unsetenv("LAB_WORKERS");
  CHECK(worker_count() >= 1);
}
