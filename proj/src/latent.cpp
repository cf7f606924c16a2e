#include "lvgsa/latent.hpp"

#include <cmath>
#include <stdexcept>

namespace lvgsa {

LatentDecomposition decompose(double rho) {
  if (!(std::fabs(rho) < 1.0))
    throw std::domain_error("latent decomposition requires |rho| < 1");
  LatentDecomposition d;
  d.rho = rho;
  const double magnitude = std::sqrt(std::fabs(rho));
  d.lambda1 = magnitude;
  d.lambda2 = rho < 0.0 ? -magnitude : magnitude;
  d.sigma1_sq = 1.0 - d.lambda1 * d.lambda1;
  d.sigma2_sq = 1.0 - d.lambda2 * d.lambda2;
  d.ave = ave_of_loadings(d.lambda1, d.lambda2);
  return d;
}

std::pair<double, double> reconstruct_pair(double eta, double eps1, double eps2,
                                           const LatentDecomposition& d) {
  return {d.lambda1 * eta + eps1, d.lambda2 * eta + eps2};
}

std::pair<double, double> reconstruct_pair_standard(double eta, double z1, double z2,
                                                    const LatentDecomposition& d) {
  return reconstruct_pair(eta, std::sqrt(d.sigma1_sq) * z1, std::sqrt(d.sigma2_sq) * z2, d);
}

double ave_of_loadings(double lambda1, double lambda2) {
  return 0.5 * (lambda1 * lambda1 + lambda2 * lambda2);
}

}  // namespace lvgsa
