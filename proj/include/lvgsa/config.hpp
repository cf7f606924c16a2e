#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lvgsa/pbpk.hpp"
#include "lvgsa/sobol.hpp"

namespace lvgsa {

enum class Method { sobol_independent, sobol_grouped, kucherenko, latent };

Method parse_method(std::string_view name);
std::string to_string(Method m);

struct PopulationSettings {
  std::size_t subjects = 100;
  std::vector<pbpk::InputMode> modes{pbpk::InputMode::independent};
  std::size_t grid_points = 200;
  /// Resamples for the exposure-widening test; run when both the
  /// independent and correlated modes are requested.
  std::size_t widening_bootstrap = 1000;
};

/// Parsed run configuration. See README for the file grammar.
struct RunConfig {
  std::string model;
  std::vector<Method> methods;
  /// Empty when not given: run then requires it for algebraic models and
  /// sweep falls back to the default grid.
  std::vector<double> rho;
  std::size_t n = 10000;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string output_dir;
  SamplingScheme sampling = SamplingScheme::pseudo_random;
  std::vector<std::size_t> checkpoints;
  bool record_wall_time = false;
  pbpk::AucModelSettings pbpk;
  PopulationSettings population;

  bool is_pbpk() const { return model == "pbpk_mdz"; }
};

/// Parses and validates a JSON configuration. Unknown keys are rejected.
/// Throws ConfigError with a diagnostic naming the offending key.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);

/// Output directory: the configured value, else $LVGSA_OUTPUT_DIR, else "lvgsa_out".
std::string resolve_output_dir(const RunConfig& config);

/// 1, 2, 5, 10, 20, 50, ... sample sizes from 100 up to (excluding) n.
std::vector<std::size_t> default_checkpoints(std::size_t n);

}  // namespace lvgsa
