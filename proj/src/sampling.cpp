#include "lvgsa/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace lvgsa {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

template <std::size_t N>
double horner(const double (&c)[N], double x) {
  double acc = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

void RandomStream::refill() {
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  const auto out = philox4x32_10(ctr, key);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  buffered_ = 2;
  ++block_;
}

std::uint64_t RandomStream::next_u64() {
  if (buffered_ == 0) refill();
  return buffer_[2 - buffered_--];
}

double RandomStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return normal_quantile(uniform()); }

RandomStream RandomStream::split(std::uint64_t child) const {
  return RandomStream(seed_, splitmix64(stream_id_ ^ splitmix64(child + 0x632BE59BD9B4E019ull)));
}

std::vector<double> standard_normal(RandomStream& stream, std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = stream.normal();
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");

  static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2,
                                 1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                 3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[] = {1.0,
                                 4.2313330701600911252e+1,
                                 6.8718700749205790830e+2,
                                 5.3941960214247511077e+3,
                                 2.1213794301586595867e+4,
                                 3.9307895800092710610e+4,
                                 2.8729085735721942674e+4,
                                 5.2264952788528545610e+3};
  static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                 5.76949722146069140550e0, 3.64784832476320460504e0,
                                 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {1.0,
                                 2.05319162663775882187e0,
                                 1.67638483018380384940e0,
                                 6.89767334985100004550e-1,
                                 1.48103976427480074590e-1,
                                 1.51986665636164571966e-2,
                                 5.47593808499534494600e-4,
                                 1.05075007164441684324e-9};
  static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                 1.78482653991729133580e0, 2.96560571828504891230e-1,
                                 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {1.0,
                                 5.99832206555887937690e-1,
                                 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2,
                                 7.86869131145613259100e-4,
                                 1.84631831751005468180e-5,
                                 1.42151175831644588870e-7,
                                 2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(a, r) / horner(b, r);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = horner(c, r) / horner(d, r);
  } else {
    r -= 5.0;
    val = horner(e, r) / horner(f, r);
  }
  return q < 0.0 ? -val : val;
}

void validate(const Marginal& m) {
  if (const auto* u = std::get_if<UniformMarginal>(&m)) {
    if (!(u->lo < u->hi)) throw std::domain_error("uniform marginal requires lo < hi");
  } else if (const auto* n = std::get_if<NormalMarginal>(&m)) {
    if (!(n->sd > 0.0)) throw std::domain_error("normal marginal requires sd > 0");
  } else if (const auto* l = std::get_if<LognormalMarginal>(&m)) {
    if (!(l->sigma_log > 0.0)) throw std::domain_error("lognormal marginal requires sigma_log > 0");
  }
}

double to_marginal(double z, const Marginal& m) {
  struct Visitor {
    double z;
    double operator()(const UniformMarginal& u) const { return u.lo + (u.hi - u.lo) * normal_cdf(z); }
    double operator()(const NormalMarginal& n) const { return n.mean + n.sd * z; }
    double operator()(const LognormalMarginal& l) const { return std::exp(l.mu_log + l.sigma_log * z); }
  };
  return std::visit(Visitor{z}, m);
}

double to_standard(double x, const Marginal& m) {
  struct Visitor {
    double x;
    double operator()(const UniformMarginal& u) const {
      return normal_quantile((x - u.lo) / (u.hi - u.lo));
    }
    double operator()(const NormalMarginal& n) const { return (x - n.mean) / n.sd; }
    double operator()(const LognormalMarginal& l) const {
      return (std::log(x) - l.mu_log) / l.sigma_log;
    }
  };
  return std::visit(Visitor{x}, m);
}

double marginal_cdf(double x, const Marginal& m) {
  struct Visitor {
    double x;
    double operator()(const UniformMarginal& u) const {
      if (x <= u.lo) return 0.0;
      if (x >= u.hi) return 1.0;
      return (x - u.lo) / (u.hi - u.lo);
    }
    double operator()(const NormalMarginal& n) const { return normal_cdf((x - n.mean) / n.sd); }
    double operator()(const LognormalMarginal& l) const {
      if (x <= 0.0) return 0.0;
      return normal_cdf((std::log(x) - l.mu_log) / l.sigma_log);
    }
  };
  return std::visit(Visitor{x}, m);
}

std::pair<double, double> lognormal_params_from_mean_cv(double mean, double cv) {
  if (!(mean > 0.0)) throw std::domain_error("lognormal mean must be positive");
  if (!(cv > 0.0)) throw std::domain_error("lognormal cv must be positive");
  const double sigma_sq = std::log1p(cv * cv);
  return {std::log(mean) - 0.5 * sigma_sq, std::sqrt(sigma_sq)};
}

LognormalMarginal lognormal_from_mean_cv(double mean, double cv) {
  const auto [mu, sigma] = lognormal_params_from_mean_cv(mean, cv);
  return {mu, sigma};
}

}  // namespace lvgsa
