#include "lvgsa/models.hpp"

#include <stdexcept>

#include "lvgsa/errors.hpp"

namespace lvgsa {

AlgebraicModel parse_algebraic_model(std::string_view id) {
  if (id == "model1") return AlgebraicModel::model1;
  if (id == "model2") return AlgebraicModel::model2;
  if (id == "model3") return AlgebraicModel::model3;
  throw ConfigError("unknown algebraic model '" + std::string(id) + "'");
}

std::string to_string(AlgebraicModel m) {
  switch (m) {
    case AlgebraicModel::model1: return "model1";
    case AlgebraicModel::model2: return "model2";
    case AlgebraicModel::model3: return "model3";
  }
  return "unknown";
}

double eval(AlgebraicModel m, std::span<const double> x) {
  if (x.size() != 4) throw std::invalid_argument("algebraic models take exactly four inputs");
  switch (m) {
    case AlgebraicModel::model1: return x[0] + x[1] + x[1] * x[2];
    case AlgebraicModel::model2: return x[0] + x[1] + x[0] * x[2];
    case AlgebraicModel::model3: return x[0] + x[1] + x[2] + x[3];
  }
  return 0.0;
}

std::vector<double> default_rho_grid() { return {-0.9, -0.7, -0.5, -0.3, 0.0, 0.3, 0.5, 0.7, 0.9}; }

CorrelatedModel algebraic_model(AlgebraicModel m, double rho) {
  CorrelatedModel c;
  c.name = to_string(m);
  c.factors = {"X1", "X2", "X3", "X4"};
  c.evaluate = [m](std::span<const double> x) { return eval(m, x); };
  c.pair_first = 0;
  c.pair_second = 3;
  c.rho = rho;
  c.unique_first_name = "eps1";
  c.unique_second_name = "eps4";
  c.latent_name = "eta";
  c.group_name = "X1+X4";
  return c;
}

LatentLift::LatentLift(AlgebraicModel m, double rho) : model_(m), d_(decompose(rho)) {}

double LatentLift::operator()(std::span<const double> lifted) const {
  if (lifted.size() != 5) throw std::invalid_argument("lifted model takes (eps1, X2, X3, eps4, eta)");
  const auto [x1, x4] = reconstruct_pair(lifted[4], lifted[0], lifted[3], d_);
  const double x[4] = {x1, lifted[1], lifted[2], x4};
  return eval(model_, x);
}

const std::array<const char*, 5>& LatentLift::factor_names() {
  static const std::array<const char*, 5> names{"eps1", "X2", "X3", "eps4", "eta"};
  return names;
}

LatentLift latent_lift(AlgebraicModel m, double rho) { return LatentLift(m, rho); }

}  // namespace lvgsa
