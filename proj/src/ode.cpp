#include "lvgsa/ode.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lvgsa/errors.hpp"

namespace lvgsa {

OdeMethod parse_ode_method(std::string_view name) {
  if (name == "sdirk4") return OdeMethod::sdirk4;
  if (name == "dopri5") return OdeMethod::dopri5;
  throw ConfigError("unknown ODE method '" + std::string(name) + "'");
}

namespace {

using Vec = Eigen::VectorXd;
constexpr double kUround = std::numeric_limits<double>::epsilon();

// Hairer & Wanner SDIRK method of order 4 (gamma = 1/4), stiffly accurate.
constexpr double kGamma = 0.25;
constexpr double kSdirkA[5][5] = {
    {1.0 / 4.0, 0, 0, 0, 0},
    {1.0 / 2.0, 1.0 / 4.0, 0, 0, 0},
    {17.0 / 50.0, -1.0 / 25.0, 1.0 / 4.0, 0, 0},
    {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 1.0 / 4.0, 0},
    {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 1.0 / 4.0}};
constexpr double kSdirkC[5] = {1.0 / 4.0, 3.0 / 4.0, 11.0 / 20.0, 1.0 / 2.0, 1.0};
constexpr double kSdirkB[5] = {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 1.0 / 4.0};
constexpr double kSdirkBhat[5] = {59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0};

class Integrator {
 public:
  explicit Integrator(const OdeProblem& p) : p_(p), n_(p.dimension) {
    if (n_ == 0 || p.y0.size() != n_) throw std::invalid_argument("ODE initial state does not match dimension");
    if (!p.rhs) throw std::invalid_argument("ODE right-hand side is missing");
    if (!(p.t_end > p.t0)) throw std::invalid_argument("ODE time span must be increasing");
    if (!(p.rtol >= 1e-10 && p.rtol <= 1e-3)) throw std::invalid_argument("ODE rtol must lie in [1e-10, 1e-3]");
    if (!(p.atol > 0.0)) throw std::invalid_argument("ODE atol must be positive");
    for (double v : p.y0)
      if (!std::isfinite(v)) throw std::invalid_argument("ODE initial state must be finite");
    traj_.dimension = n_;
    for (double t : p.output_times)
      if (t > p.t0 && t < p.t_end) outputs_.push_back(t);
    std::sort(outputs_.begin(), outputs_.end());
    outputs_.erase(std::unique(outputs_.begin(), outputs_.end()), outputs_.end());
  }

  Trajectory run() {
    Vec y = Eigen::Map<const Vec>(p_.y0.data(), static_cast<Eigen::Index>(n_));
    double t = p_.t0;
    record(t, y);
    Vec f0(n_);
    eval(t, y, f0);
    double h = initial_step(y, f0);
    std::size_t next_out = 0;
    bool last_rejected = false;

    while (t < p_.t_end) {
      if (traj_.stats.accepted + traj_.stats.rejected >= p_.max_steps)
        throw OdeError("ODE step limit of " + std::to_string(p_.max_steps) + " exceeded");
      const double target = next_out < outputs_.size() ? outputs_[next_out] : p_.t_end;
      double step = h;
      bool lands = false;
      if (t + step >= target - 1e-12 * std::fabs(target)) {
        step = target - t;
        lands = true;
      }
      if (step <= 16.0 * kUround * std::max(1.0, std::fabs(t)))
        throw OdeError("ODE step size underflow at t = " + std::to_string(t));

      Vec y_new(n_);
      double err = 0.0;
      const bool ok = p_.method == OdeMethod::sdirk4 ? sdirk_step(t, y, f0, step, y_new, err)
                                                     : dopri_step(t, y, f0, step, y_new, err);
      if (!ok) {
        // Newton failure
        ++traj_.stats.rejected;
        h = 0.5 * step;
        last_rejected = true;
        continue;
      }
      const double order_exp = p_.method == OdeMethod::sdirk4 ? 0.25 : 0.2;
      double fac = err > 0.0 ? 0.9 * std::pow(err, -order_exp) : 5.0;
      fac = std::clamp(fac, 0.2, p_.method == OdeMethod::sdirk4 ? 5.0 : 10.0);
      if (err <= 1.0) {
        ++traj_.stats.accepted;
        t = lands ? target : t + step;
        y = y_new;
        if (p_.method == OdeMethod::dopri5)
          f0 = fsal_;
        else
          eval(t, y, f0);
        if (last_rejected) fac = std::min(fac, 1.0);
        last_rejected = false;
        const bool at_output = lands && next_out < outputs_.size() && target == outputs_[next_out];
        if (at_output) ++next_out;
        if (p_.record_steps || at_output || t >= p_.t_end) record(t, y);
        // keep the controller's proposal when the step was only shortened to land
        h = (lands && step < h) ? std::max(h, step * fac) : step * fac;
      } else {
        ++traj_.stats.rejected;
        last_rejected = true;
        h = step * std::min(fac, 1.0);
      }
    }
    return std::move(traj_);
  }

 private:
  void eval(double t, const Vec& y, Vec& dy) {
    p_.rhs(t, std::span<const double>(y.data(), n_), std::span<double>(dy.data(), n_));
    ++traj_.stats.rhs_evaluations;
    for (Eigen::Index i = 0; i < dy.size(); ++i)
      if (!std::isfinite(dy(i))) throw OdeError("non-finite derivative at t = " + std::to_string(t));
  }

  void record(double t, const Vec& y) {
    traj_.times.push_back(t);
    traj_.states.insert(traj_.states.end(), y.data(), y.data() + n_);
  }

  double weighted_norm(const Vec& v, const Vec& y_a, const Vec& y_b) const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double scale = p_.atol + p_.rtol * std::max(std::fabs(y_a(i)), std::fabs(y_b(i)));
      const double r = v(i) / scale;
      sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(v.size()));
  }

  double initial_step(const Vec& y, const Vec& f) const {
    const double d0 = weighted_norm(y, y, y);
    const double d1 = weighted_norm(f, y, y);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::min(h, p_.t_end - p_.t0);
  }

  bool sdirk_step(double t, const Vec& y, const Vec& f0, double h, Vec& y_new, double& err) {
    // Jacobian at (t, y) by forward differences.
    Eigen::MatrixXd jac(n_, n_);
    Vec yp = y, fp(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const double delta = std::sqrt(kUround * std::max(1e-5, std::fabs(y(j))));
      yp(j) = y(j) + delta;
      eval(t, yp, fp);
      jac.col(j) = (fp - f0) / delta;
      yp(j) = y(j);
    }
    ++traj_.stats.jacobians;
    Eigen::MatrixXd iteration = Eigen::MatrixXd::Identity(n_, n_) - (h * kGamma) * jac;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(iteration);

    const double newton_tol = std::max(10.0 * kUround / p_.rtol, std::min(0.03, std::sqrt(p_.rtol)));
    Vec k[5];
    Vec known(n_), z(n_), fz(n_), delta(n_);
    for (int i = 0; i < 5; ++i) {
      known = y;
      for (int j = 0; j < i; ++j) known += (h * kSdirkA[i][j]) * k[j];
      z = known + (h * kGamma) * (i == 0 ? f0 : k[i - 1]);
      double prev = 0.0;
      bool converged = false;
      for (int it = 0; it < 10; ++it) {
        eval(t + kSdirkC[i] * h, z, fz);
        delta = lu.solve(-(z - known - (h * kGamma) * fz));
        z += delta;
        const double norm = weighted_norm(delta, z, y);
        if (norm <= newton_tol * 0.1) {
          converged = true;
          break;
        }
        if (it > 0) {
          const double theta = norm / prev;
          if (theta >= 0.99) break;
          if (theta / (1.0 - theta) * norm <= newton_tol) {
            converged = true;
            break;
          }
        }
        prev = norm;
      }
      if (!converged) return false;
      k[i] = (z - known) / (h * kGamma);
    }
    y_new = z;
    Vec e = Vec::Zero(n_);
    for (int i = 0; i < 5; ++i) e += (h * (kSdirkB[i] - kSdirkBhat[i])) * k[i];
    e = lu.solve(e);
    err = weighted_norm(e, y, y_new);
    return true;
  }

  bool dopri_step(double t, const Vec& y, const Vec& k1, double h, Vec& y_new, double& err) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    Vec k2(n_), k3(n_), k4(n_), k5(n_), k6(n_), k7(n_);
    eval(t + c2 * h, y + h * a21 * k1, k2);
    eval(t + c3 * h, y + h * (a31 * k1 + a32 * k2), k3);
    eval(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3), k4);
    eval(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
    eval(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
    y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    eval(t + h, y_new, k7);
    fsal_ = k7;
    const Vec e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    err = weighted_norm(e, y, y_new);
    return true;
  }

  const OdeProblem& p_;
  std::size_t n_;
  std::vector<double> outputs_;
  Trajectory traj_;
  Vec fsal_;
};

}  // namespace

Trajectory integrate(const OdeProblem& problem) { return Integrator(problem).run(); }

AucResult auc_augmented(const OdeProblem& problem, std::function<double(std::span<const double>)> observe) {
  const std::size_t n = problem.dimension;
  OdeProblem aug = problem;
  aug.dimension = n + 1;
  aug.y0.push_back(0.0);
  aug.rhs = [rhs = problem.rhs, observe = std::move(observe), n](double t, std::span<const double> y,
                                                                  std::span<double> dy) {
    rhs(t, y.first(n), dy.first(n));
    dy[n] = observe(y.first(n));
  };
  AucResult r;
  r.trajectory = integrate(aug);
  r.auc = r.trajectory.final_state()[n];
  return r;
}

}  // namespace lvgsa
