#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace lvgsa {

/// dy/dt = rhs(t, y). Must be deterministic and free of side effects.
using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

enum class OdeMethod {
  /// 5-stage, L-stable, stiffly accurate SDIRK of order 4 with an embedded
  /// order-3 error estimate; Jacobian by finite differences.
  sdirk4,
  /// Dormand-Prince 5(4) explicit pair.
  dopri5,
};

OdeMethod parse_ode_method(std::string_view name);

struct OdeProblem {
  std::size_t dimension = 0;
  OdeRhs rhs;
  std::vector<double> y0;
  double t0 = 0.0;
  double t_end = 168.0;
  double rtol = 1e-8;
  double atol = 1e-10;
  OdeMethod method = OdeMethod::sdirk4;
  /// Times at which the solution must be recorded exactly; steps are
  /// shortened to land on them.
  std::vector<double> output_times;
  /// Record every accepted step in addition to output_times.
  bool record_steps = true;
  std::size_t max_steps = 500000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t jacobians = 0;
};

/// Recorded solution. Always contains t0 and t_end; states are stored row
/// by row with `dimension` values per time.
struct Trajectory {
  std::size_t dimension = 0;
  std::vector<double> times;
  std::vector<double> states;
  OdeStats stats;

  std::size_t size() const { return times.size(); }
  std::span<const double> state(std::size_t i) const {
    return {states.data() + i * dimension, dimension};
  }
  std::span<const double> final_state() const { return state(times.size() - 1); }
};

/// Adaptive integration over [t0, t_end]. Throws OdeError on step-size
/// underflow, step-count exhaustion or a non-finite derivative.
Trajectory integrate(const OdeProblem& problem);

struct AucResult {
  /// Solution of the augmented system; the last coordinate is the running
  /// integral of the observable.
  Trajectory trajectory;
  double auc = 0.0;
};

/// Integrates an extra coordinate dA/dt = observe(y) alongside the system so
/// the step-size controller also bounds the error of the integral.
AucResult auc_augmented(const OdeProblem& problem, std::function<double(std::span<const double>)> observe);

}  // namespace lvgsa
