#pragma once

#include <string>
#include <vector>

#include "lvgsa/config.hpp"
#include "lvgsa/problem.hpp"
#include "lvgsa/sobol.hpp"

namespace lvgsa {

/// Process exit codes.
enum ExitCode : int { exit_ok = 0, exit_config_error = 2, exit_numerical_failure = 3, exit_partial_failure = 4 };

struct RunOutcome {
  int exit_code = exit_ok;
  /// Paths of every file written, in write order.
  std::vector<std::string> files;
  /// One line per failed analysis.
  std::vector<std::string> errors;
  /// Human-readable summary (also written to disk).
  std::string summary;
  double wall_time_s = 0.0;
};

/// The model under analysis at a given correlation.
CorrelatedModel build_model(const RunConfig& config, double rho);

/// One analysis; throws on numerical failure.
SensitivityReport run_method(const RunConfig& config, Method method, double rho);

/// One report per (method, rho) plus a summary table.
RunOutcome run_analyses(const RunConfig& config);
/// As run_analyses, plus one combined long-format file over all rho values.
/// Uses the default rho grid when the config gives none.
RunOutcome run_sweep(const RunConfig& config);
/// Population simulation export for pbpk_mdz.
RunOutcome run_population(const RunConfig& config);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

std::string indices_csv(const SensitivityReport& report);
std::string convergence_csv(const SensitivityReport& report);
std::string report_json(const SensitivityReport& report, const RunConfig& config, const std::string& stem,
                        const std::vector<std::string>& files, const double* wall_time_s);

/// File stem for a (model, method, rho) analysis, e.g. model1_latent_rho0.70.
std::string report_stem(const std::string& model, Method method, double rho);

}  // namespace lvgsa
