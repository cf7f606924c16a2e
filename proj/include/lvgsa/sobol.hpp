#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lvgsa/problem.hpp"
#include "lvgsa/sampling.hpp"

namespace lvgsa {

using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SamplingScheme { pseudo_random, sobol_sequence };

/// Pick-freeze design: base matrices A and B of independent standard-normal
/// draws, and for every group j the hybrid AB_j = A with group j's columns
/// taken from B.
struct SamplePlan {
  std::size_t k = 0;
  std::size_t n = 0;
  SampleMatrix a;
  SampleMatrix b;
  std::vector<FactorGroup> groups;
  std::vector<SampleMatrix> ab;
};

SamplePlan build_plan(std::size_t k, std::size_t n, std::vector<FactorGroup> groups,
                      RandomStream& stream,
                      SamplingScheme scheme = SamplingScheme::pseudo_random);

struct PlanEvaluations {
  std::vector<double> f_a;
  std::vector<double> f_b;
  std::vector<std::vector<double>> f_ab;
};

PlanEvaluations evaluate_plan(const SamplePlan& plan, const Evaluator& f, unsigned threads = 1);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct FactorIndices {
  std::string name;
  double main = 0.0;
  double total = 0.0;
  std::optional<Interval> main_ci;
  std::optional<Interval> total_ci;
};

/// Running estimates for one factor at a given sample size.
struct ConvergencePoint {
  std::size_t n = 0;
  std::string factor;
  double main = 0.0;
  double total = 0.0;
};

struct ReportMetadata {
  std::string method;
  std::string model;
  std::optional<double> rho;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t bootstrap = 0;
  std::size_t evaluations = 0;
  std::string evaluation_formula;
  std::string sampling = "pseudo_random";
};

struct SensitivityReport {
  std::vector<FactorIndices> factors;
  double output_mean = 0.0;
  double output_variance = 0.0;
  std::vector<ConvergencePoint> convergence;
  ReportMetadata metadata;

  const FactorIndices& at(const std::string& name) const;
};

/// Raw main/total estimates for every group. `rows` selects (with
/// repetition) which plan rows enter the estimate; empty means all rows.
struct IndexPoint {
  std::vector<double> main;
  std::vector<double> total;
  double mean = 0.0;
  double variance = 0.0;
};

IndexPoint compute_indices(const PlanEvaluations& evals, std::span<const std::size_t> rows = {});

/// Main effect: Homma-Saltelli product estimator on outputs centred at the
/// pooled mean; total effect: Jansen. Negative values are kept as-is.
/// Throws DegenerateOutputError when the pooled output variance is zero.
SensitivityReport estimate(const SamplePlan& plan, const PlanEvaluations& evals);

struct BootstrapIntervals {
  std::vector<Interval> main;
  std::vector<Interval> total;
};

/// Percentile intervals (2.5, 97.5) from `resamples` row resamples. Rows of
/// A, B and every AB_j are drawn jointly so pick-freeze pairs stay intact.
BootstrapIntervals bootstrap(const SamplePlan& plan, const PlanEvaluations& evals,
                             std::size_t resamples, RandomStream& stream);

/// Linear-interpolation percentile of an unsorted sample (q in [0, 1]).
double percentile(std::vector<double> values, double q);

struct SobolOptions {
  std::size_t n = 10000;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  SamplingScheme scheme = SamplingScheme::pseudo_random;
  std::string method = "sobol";
};

/// Plan, evaluation, point estimates and (when bootstrap > 0) intervals.
/// Cost: n * (groups + 2) evaluations.
SensitivityReport run_sobol(const GsaProblem& problem, const SobolOptions& options);

/// Grouped analysis of a model's correlated pair.
SensitivityReport estimate_grouped_pair(const CorrelatedModel& model, const SobolOptions& options);

}  // namespace lvgsa
