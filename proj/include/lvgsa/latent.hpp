#pragma once

#include <utility>

namespace lvgsa {

/// One latent factor explaining the correlation of two standardized inputs:
///
///   x1 = lambda1 * eta + eps1,   eps1 ~ N(0, sigma1_sq)
///   x2 = lambda2 * eta + eps2,   eps2 ~ N(0, sigma2_sq)
///
/// with eta, eps1, eps2 independent and lambda1 * lambda2 = rho.
struct LatentDecomposition {
  double rho = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double sigma1_sq = 1.0;
  double sigma2_sq = 1.0;
  /// Average variance extracted, (lambda1^2 + lambda2^2) / 2.
  double ave = 0.0;
};

/// Loadings of minimal AVE: |lambda1| = |lambda2| = sqrt(|rho|). lambda1 is
/// always non-negative and lambda2 carries the sign of rho. Throws
/// std::domain_error unless |rho| < 1.
LatentDecomposition decompose(double rho);

/// x_i = lambda_i * eta + eps_i. The eps_i are expected with variance sigma_i_sq.
std::pair<double, double> reconstruct_pair(double eta, double eps1, double eps2,
                                           const LatentDecomposition& d);

/// Same as reconstruct_pair but the unique parts are given as standard-normal
/// coordinates and scaled by sqrt(sigma_i_sq) here.
std::pair<double, double> reconstruct_pair_standard(double eta, double z1, double z2,
                                                    const LatentDecomposition& d);

double ave_of_loadings(double lambda1, double lambda2);

}  // namespace lvgsa
