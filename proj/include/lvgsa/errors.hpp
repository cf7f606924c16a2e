#pragma once

#include <stdexcept>
#include <string>

namespace lvgsa {

/// Invalid run configuration or malformed input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Any failure of a numerical procedure (estimator, integrator).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The model output has zero sample variance, so no index is defined.
class DegenerateOutputError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class OdeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace lvgsa
