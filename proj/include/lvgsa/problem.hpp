#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lvgsa {

/// Maps one row of coordinates to a scalar model output. Must be pure.
using Evaluator = std::function<double(std::span<const double>)>;

/// Columns that are pick-frozen together.
struct FactorGroup {
  std::string name;
  std::vector<std::size_t> columns;
};

/// Singleton groups named after each factor.
std::vector<FactorGroup> singleton_groups(const std::vector<std::string>& names);

/// Throws std::invalid_argument unless groups partition {0..k-1}.
void validate_groups(std::size_t k, const std::vector<FactorGroup>& groups);

/// A model over inputs that are each marginally N(0, 1), with one linearly
/// correlated pair. Everything native-unit lives inside `evaluate`.
struct CorrelatedModel {
  std::string name;
  std::vector<std::string> factors;
  Evaluator evaluate;
  std::size_t pair_first = 0;
  std::size_t pair_second = 0;
  double rho = 0.0;
  /// Factor names used by the latent lift for the two unique parts.
  std::string unique_first_name;
  std::string unique_second_name;
  std::string latent_name = "eta";
  std::string group_name;
};

/// Independent standard-normal coordinates plus a pick-freeze partition.
struct GsaProblem {
  std::string model;
  std::vector<std::string> coordinates;
  std::vector<FactorGroup> groups;
  Evaluator evaluate;
};

/// Ignores the correlation: every factor is its own independent coordinate.
GsaProblem independent_problem(const CorrelatedModel& model);

/// The correlated pair is sampled jointly and pick-frozen as one group.
GsaProblem grouped_problem(const CorrelatedModel& model);

/// The pair is replaced by two unique parts and one latent factor. Factor
/// order: non-pair factors keep their slots, the pair slots hold the unique
/// parts, and the latent factor is appended last.
GsaProblem latent_problem(const CorrelatedModel& model);

}  // namespace lvgsa
