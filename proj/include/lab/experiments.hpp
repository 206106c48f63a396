#pragma once

#include "lab/config.hpp"
#include "lab/error.hpp"
#include "lab/report.hpp"

namespace lab {

/// Runs the configured experiment, writes its CSV/JSON artifacts plus
/// report.json and report.txt into cfg.output_dir, and returns the report.
/// Configuration problems surface as ErrorCode::schema (or the fixture's own
/// error code) before any computation starts.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Mass fraction of the Dirichlet heat flow on (0, length) with constant c and u0 = 1:
/// sum over odd k of 8/(k^2 pi^2) exp(-c k^2 pi^2 t / length^2).
double fourier_dirichlet_mass(double c, double t, double length = 1.0);

/// 0 pass, 1 check failure, 2 config error, 3 solver error.
int exit_code(const RunReport& report);
int exit_code(ErrorCode code);

}  // namespace lab
