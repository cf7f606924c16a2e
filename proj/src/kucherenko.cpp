#include "lvgsa/kucherenko.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lvgsa/errors.hpp"
#include "lvgsa/parallel.hpp"

namespace lvgsa {

GaussianJoint::GaussianJoint(Eigen::MatrixXd corr) : corr_(std::move(corr)) {
  if (corr_.rows() == 0 || corr_.rows() != corr_.cols())
    throw std::invalid_argument("correlation matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < corr_.rows(); ++i) {
    if (std::fabs(corr_(i, i) - 1.0) > 1e-12)
      throw std::invalid_argument("correlation matrix must have a unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::fabs(corr_(i, j) - corr_(j, i)) > 1e-12)
        throw std::invalid_argument("correlation matrix must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(corr_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("correlation matrix is not positive definite");
  chol_ = llt.matrixL();
}

void GaussianJoint::sample(std::span<double> x, RandomStream& stream) const {
  const auto k = static_cast<Eigen::Index>(dimension());
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z(i) = stream.normal();
  Eigen::Map<Eigen::VectorXd>(x.data(), k) = chol_.triangularView<Eigen::Lower>() * z;
}

GaussianJoint pair_joint(std::size_t k, std::size_t i, std::size_t j, double rho) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rho;
  c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rho;
  return GaussianJoint(std::move(c));
}

namespace {

struct Partition {
  std::vector<std::size_t> fixed;
  std::vector<std::size_t> free;
  Eigen::MatrixXd regression;
  Eigen::MatrixXd covariance;
};

Partition partition(const GaussianJoint& joint, std::vector<std::size_t> fixed) {
  const std::size_t k = joint.dimension();
  if (fixed.empty()) throw std::invalid_argument("conditioning set must not be empty");
  std::vector<char> is_fixed(k, 0);
  for (auto f : fixed) {
    if (f >= k) throw std::invalid_argument("conditioning index out of range");
    if (is_fixed[f]) throw std::invalid_argument("duplicate conditioning index");
    is_fixed[f] = 1;
  }
  Partition p;
  p.fixed = std::move(fixed);
  for (std::size_t i = 0; i < k; ++i)
    if (!is_fixed[i]) p.free.push_back(i);

  const auto& s = joint.correlation();
  const auto nf = static_cast<Eigen::Index>(p.free.size());
  const auto no = static_cast<Eigen::Index>(p.fixed.size());
  Eigen::MatrixXd s_oo(no, no), s_fo(nf, no), s_ff(nf, nf);
  for (Eigen::Index a = 0; a < no; ++a)
    for (Eigen::Index b = 0; b < no; ++b) s_oo(a, b) = s(p.fixed[a], p.fixed[b]);
  for (Eigen::Index a = 0; a < nf; ++a) {
    for (Eigen::Index b = 0; b < no; ++b) s_fo(a, b) = s(p.free[a], p.fixed[b]);
    for (Eigen::Index b = 0; b < nf; ++b) s_ff(a, b) = s(p.free[a], p.free[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(s_oo);
  if (llt.info() != Eigen::Success) throw NumericalError("singular conditioning block");
  p.regression = llt.solve(s_fo.transpose()).transpose();
  p.covariance = s_ff - p.regression * s_fo.transpose();
  p.covariance = 0.5 * (p.covariance + p.covariance.transpose());
  return p;
}

}  // namespace

ConditionalGaussian conditional(const GaussianJoint& joint, std::span<const std::size_t> fixed,
                                std::span<const double> values) {
  if (fixed.size() != values.size()) throw std::invalid_argument("one value per fixed index is required");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("conditioning values must be finite");
  Partition p = partition(joint, {fixed.begin(), fixed.end()});
  Eigen::VectorXd xo = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return {p.free, p.regression * xo, p.covariance};
}

ConditionalSampler::ConditionalSampler(const GaussianJoint& joint, std::vector<std::size_t> fixed) {
  Partition p = partition(joint, std::move(fixed));
  fixed_ = std::move(p.fixed);
  free_ = std::move(p.free);
  regression_ = std::move(p.regression);
  if (!free_.empty()) {
    Eigen::LLT<Eigen::MatrixXd> llt(p.covariance);
    if (llt.info() != Eigen::Success) throw NumericalError("conditional covariance is not positive definite");
    chol_ = llt.matrixL();
  }
}

void ConditionalSampler::resample_free(std::span<double> x, RandomStream& stream) const {
  const auto nf = static_cast<Eigen::Index>(free_.size());
  const auto no = static_cast<Eigen::Index>(fixed_.size());
  Eigen::VectorXd xo(no), z(nf);
  for (Eigen::Index a = 0; a < no; ++a) xo(a) = x[fixed_[a]];
  for (Eigen::Index a = 0; a < nf; ++a) z(a) = stream.normal();
  const Eigen::VectorXd draw = regression_ * xo + chol_.triangularView<Eigen::Lower>() * z;
  for (Eigen::Index a = 0; a < nf; ++a) x[free_[a]] = draw(a);
}

namespace {

struct KucherenkoEvals {
  std::vector<double> base;
  std::vector<std::vector<double>> main_w;
  std::vector<std::vector<double>> main_w2;
  std::vector<std::vector<double>> total;
};

void indices_at(const KucherenkoEvals& e, std::size_t m, std::vector<double>& main,
                std::vector<double>& total, double& mean, double& variance) {
  double sum = 0.0;
  for (std::size_t r = 0; r < m; ++r) sum += e.base[r];
  mean = sum / static_cast<double>(m);
  double ss = 0.0;
  for (std::size_t r = 0; r < m; ++r) ss += (e.base[r] - mean) * (e.base[r] - mean);
  variance = ss / static_cast<double>(m - 1);
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw DegenerateOutputError("model output has zero variance; sensitivity indices are undefined");
  const std::size_t k = e.main_w.size();
  main.assign(k, 0.0);
  total.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double prod = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      prod += (e.main_w[i][r] - mean) * (e.main_w2[i][r] - mean);
      const double d = e.base[r] - e.total[i][r];
      sq += d * d;
    }
    main[i] = prod / (static_cast<double>(m) * variance);
    total[i] = sq / (2.0 * static_cast<double>(m) * variance);
  }
}

}  // namespace

SensitivityReport estimate_kucherenko(const Evaluator& f, const GaussianJoint& joint,
                                      const std::vector<std::string>& names,
                                      const KucherenkoOptions& options) {
  const std::size_t k = joint.dimension();
  const std::size_t n = options.n;
  if (names.size() != k) throw std::invalid_argument("one factor name per joint dimension is required");
  if (n < 2) throw std::invalid_argument("Kucherenko estimation requires n >= 2");

  RandomStream root(options.seed, 0);
  RandomStream base_stream = root.split(0x4B55u);
  SampleMatrix base(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < n; ++r) joint.sample(std::span<double>(base.data() + r * k, k), base_stream);

  // All conditional draws are generated sequentially; evaluation may run in
  // parallel without affecting the result.
  std::vector<SampleMatrix> main_w(k, base), main_w2(k, base), total_x(k, base);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<std::size_t> rest;
    for (std::size_t c = 0; c < k; ++c)
      if (c != i) rest.push_back(c);
    RandomStream w_stream = root.split(1000 + 3 * i);
    RandomStream w2_stream = root.split(1001 + 3 * i);
    RandomStream t_stream = root.split(1002 + 3 * i);
    if (!rest.empty()) {
      const ConditionalSampler given_i(joint, {i});
      for (std::size_t r = 0; r < n; ++r) {
        given_i.resample_free(std::span<double>(main_w[i].data() + r * k, k), w_stream);
        given_i.resample_free(std::span<double>(main_w2[i].data() + r * k, k), w2_stream);
      }
      const ConditionalSampler given_rest(joint, rest);
      for (std::size_t r = 0; r < n; ++r)
        given_rest.resample_free(std::span<double>(total_x[i].data() + r * k, k), t_stream);
    } else {
      for (std::size_t r = 0; r < n; ++r) total_x[i](static_cast<Eigen::Index>(r), 0) = t_stream.normal();
    }
  }

  auto eval_rows = [&](const SampleMatrix& m) {
    std::vector<double> out(n);
    parallel_for(n, options.threads, [&](std::size_t r) {
      out[r] = f(std::span<const double>(m.data() + r * k, k));
      if (!std::isfinite(out[r])) throw NumericalError("non-finite model evaluation");
    });
    return out;
  };

  KucherenkoEvals e;
  e.base = eval_rows(base);
  for (std::size_t i = 0; i < k; ++i) {
    e.main_w.push_back(eval_rows(main_w[i]));
    e.main_w2.push_back(eval_rows(main_w2[i]));
    e.total.push_back(eval_rows(total_x[i]));
  }

  SensitivityReport report;
  std::vector<double> main, total;
  indices_at(e, n, main, total, report.output_mean, report.output_variance);
  for (std::size_t i = 0; i < k; ++i) report.factors.push_back({names[i], main[i], total[i], std::nullopt, std::nullopt});

  std::vector<std::size_t> checkpoints = options.checkpoints;
  checkpoints.push_back(n);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  for (auto m : checkpoints) {
    if (m < 2 || m > n) continue;
    double mean, variance;
    indices_at(e, m, main, total, mean, variance);
    for (std::size_t i = 0; i < k; ++i) report.convergence.push_back({m, names[i], main[i], total[i]});
  }

  report.metadata.method = "kucherenko";
  report.metadata.n = n;
  report.metadata.seed = options.seed;
  report.metadata.evaluations = n * (3 * k + 1);
  report.metadata.evaluation_formula = "n*(3k+1)";
  return report;
}

SensitivityReport estimate_kucherenko(const CorrelatedModel& model, const KucherenkoOptions& options) {
  const GaussianJoint joint = pair_joint(model.factors.size(), model.pair_first, model.pair_second, model.rho);
  SensitivityReport r = estimate_kucherenko(model.evaluate, joint, model.factors, options);
  r.metadata.model = model.name;
  r.metadata.rho = model.rho;
  return r;
}

}  // namespace lvgsa
