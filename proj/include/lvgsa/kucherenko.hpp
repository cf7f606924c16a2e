#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lvgsa/problem.hpp"
#include "lvgsa/sampling.hpp"
#include "lvgsa/sobol.hpp"

namespace lvgsa {

/// Jointly Gaussian standardized inputs with a given correlation matrix.
class GaussianJoint {
 public:
  /// Throws std::invalid_argument if corr is not symmetric with unit
  /// diagonal, or not positive definite.
  explicit GaussianJoint(Eigen::MatrixXd corr);

  std::size_t dimension() const { return static_cast<std::size_t>(corr_.rows()); }
  const Eigen::MatrixXd& correlation() const { return corr_; }
  const Eigen::MatrixXd& cholesky() const { return chol_; }

  /// x = L z for a vector of independent standard normals z.
  void sample(std::span<double> x, RandomStream& stream) const;

 private:
  Eigen::MatrixXd corr_;
  Eigen::MatrixXd chol_;
};

/// Identity correlation with one correlated pair.
GaussianJoint pair_joint(std::size_t k, std::size_t i, std::size_t j, double rho);

struct ConditionalGaussian {
  std::vector<std::size_t> free;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Distribution of the remaining coordinates given x[fixed] = values.
ConditionalGaussian conditional(const GaussianJoint& joint, std::span<const std::size_t> fixed,
                                std::span<const double> values);

/// Precomputed conditioning on a fixed index set, for repeated draws.
class ConditionalSampler {
 public:
  ConditionalSampler(const GaussianJoint& joint, std::vector<std::size_t> fixed);

  /// Reads the fixed coordinates from x and overwrites the free ones with a
  /// conditional draw.
  void resample_free(std::span<double> x, RandomStream& stream) const;

 private:
  std::vector<std::size_t> fixed_;
  std::vector<std::size_t> free_;
  Eigen::MatrixXd regression_;  // free x fixed
  Eigen::MatrixXd chol_;        // of the conditional covariance
};

struct KucherenkoOptions {
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Sample sizes at which running estimates are recorded; n is always added.
  std::vector<std::size_t> checkpoints;
};

/// Dependent-input main and total indices by conditional sampling:
///
///   main_i  = mean[(f(x_i, w) - f0)(f(x_i, w') - f0)] / V
///   total_i = mean[(f(x) - f(x_i', x_~i))^2] / (2 V)
///
/// with w, w' independent draws of X_~i | x_i and x_i' a draw of
/// X_i | x_~i. Cost: n * (3k + 1) evaluations.
SensitivityReport estimate_kucherenko(const Evaluator& f, const GaussianJoint& joint,
                                      const std::vector<std::string>& names,
                                      const KucherenkoOptions& options);

SensitivityReport estimate_kucherenko(const CorrelatedModel& model, const KucherenkoOptions& options);

}  // namespace lvgsa
