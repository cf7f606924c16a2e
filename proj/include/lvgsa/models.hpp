#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lvgsa/latent.hpp"
#include "lvgsa/problem.hpp"

namespace lvgsa {

// Benchmark functions over four standard-normal inputs; X1 and X4 form the
// correlated pair.
//   model1: Y = X1 + X2 + X2*X3
//   model2: Y = X1 + X2 + X1*X3
//   model3: Y = X1 + X2 + X3 + X4
enum class AlgebraicModel { model1, model2, model3 };

AlgebraicModel parse_algebraic_model(std::string_view id);
std::string to_string(AlgebraicModel m);

double eval(AlgebraicModel m, std::span<const double> x);

/// Default rho grid for sweeps.
std::vector<double> default_rho_grid();

/// The model as a CorrelatedModel with corr(X1, X4) = rho. Latent factor
/// names are eps1, eps4 and eta.
CorrelatedModel algebraic_model(AlgebraicModel m, double rho);

/// The model evaluated over the independent coordinates (eps1, X2, X3, eps4, eta).
class LatentLift {
 public:
  LatentLift(AlgebraicModel m, double rho);

  /// eps1 and eps4 already carry variance 1 - |rho|.
  double operator()(std::span<const double> lifted) const;

  const LatentDecomposition& decomposition() const { return d_; }
  static const std::array<const char*, 5>& factor_names();

 private:
  AlgebraicModel model_;
  LatentDecomposition d_;
};

LatentLift latent_lift(AlgebraicModel m, double rho);

}  // namespace lvgsa
