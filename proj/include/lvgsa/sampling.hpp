#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

namespace lvgsa {

// Counter-based Philox4x32-10 block function. Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Reproducible, splittable random stream.
///
/// The stream is a pure function of (seed, stream_id, position): the seed is
/// the Philox key and the stream id occupies the upper half of the counter,
/// so distinct stream ids never share state and can be consumed concurrently.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform();
  /// Standard normal draw via the inverse CDF.
  double normal();

  /// Independent child stream; the same (parent, child) pair always maps to
  /// the same child.
  RandomStream split(std::uint64_t child) const;

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// n i.i.d. standard normal draws.
std::vector<double> standard_normal(RandomStream& stream, std::size_t n);

/// Standard normal CDF.
double normal_cdf(double z);
/// Inverse standard normal CDF (Wichura AS241, ~1e-16 relative accuracy).
/// p must lie in (0, 1).
double normal_quantile(double p);

struct UniformMarginal {
  double lo;
  double hi;
};
struct NormalMarginal {
  double mean;
  double sd;
};
struct LognormalMarginal {
  double mu_log;
  double sigma_log;
};

using Marginal = std::variant<UniformMarginal, NormalMarginal, LognormalMarginal>;

/// Throws std::domain_error when the parameters are not admissible.
void validate(const Marginal& m);

/// Maps a standard-normal coordinate into the marginal's native units.
/// Uniform marginals go through the normal CDF, so every factor shares one
/// standard-normal representation.
double to_marginal(double z, const Marginal& m);

/// Inverse of to_marginal.
double to_standard(double x, const Marginal& m);

/// Analytic CDF of the marginal in native units.
double marginal_cdf(double x, const Marginal& m);

/// Lognormal (mu_log, sigma_log) matching an arithmetic mean and CV.
std::pair<double, double> lognormal_params_from_mean_cv(double mean, double cv);

LognormalMarginal lognormal_from_mean_cv(double mean, double cv);

}  // namespace lvgsa
