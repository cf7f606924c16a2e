#include "lvgsa/sobol.hpp"

#include <algorithm>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <stdexcept>

#include "lvgsa/errors.hpp"
#include "lvgsa/parallel.hpp"

namespace lvgsa {

const FactorIndices& SensitivityReport::at(const std::string& name) const {
  for (const auto& f : factors)
    if (f.name == name) return f;
  throw std::out_of_range("no factor named '" + name + "' in report");
}

namespace {

void fill_pseudo_random(SampleMatrix& a, SampleMatrix& b, RandomStream& stream) {
  RandomStream sa = stream.split(0);
  RandomStream sb = stream.split(1);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(i, c) = sa.normal();
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index c = 0; c < b.cols(); ++c) b(i, c) = sb.normal();
}

// Sobol points in 2k dimensions with a random digital shift per dimension;
// the first k coordinates feed A, the rest feed B.
void fill_sobol(SampleMatrix& a, SampleMatrix& b, RandomStream& stream) {
  const auto k = static_cast<std::size_t>(a.cols());
  boost::random::sobol engine(2 * k);
  engine.discard(2 * k);  // skip the origin
  RandomStream shift_stream = stream.split(2);
  std::vector<std::uint64_t> shift(2 * k);
  for (auto& s : shift) s = shift_stream.next_u64();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (std::size_t d = 0; d < 2 * k; ++d) {
      const std::uint64_t bits = static_cast<std::uint64_t>(engine()) ^ shift[d];
      const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
      const double z = normal_quantile(u);
      if (d < k)
        a(i, static_cast<Eigen::Index>(d)) = z;
      else
        b(i, static_cast<Eigen::Index>(d - k)) = z;
    }
  }
}

}  // namespace

SamplePlan build_plan(std::size_t k, std::size_t n, std::vector<FactorGroup> groups,
                      RandomStream& stream, SamplingScheme scheme) {
  if (n < 2) throw std::invalid_argument("sample plan requires n >= 2");
  if (k == 0) throw std::invalid_argument("sample plan requires at least one factor");
  validate_groups(k, groups);

  SamplePlan plan;
  plan.k = k;
  plan.n = n;
  plan.a.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  plan.b.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  if (scheme == SamplingScheme::sobol_sequence)
    fill_sobol(plan.a, plan.b, stream);
  else
    fill_pseudo_random(plan.a, plan.b, stream);

  plan.groups = std::move(groups);
  plan.ab.reserve(plan.groups.size());
  for (const auto& g : plan.groups) {
    SampleMatrix hybrid = plan.a;
    for (auto c : g.columns) hybrid.col(static_cast<Eigen::Index>(c)) = plan.b.col(static_cast<Eigen::Index>(c));
    plan.ab.push_back(std::move(hybrid));
  }
  return plan;
}

namespace {

std::vector<double> evaluate_rows(const SampleMatrix& m, const Evaluator& f, unsigned threads) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  const auto k = static_cast<std::size_t>(m.cols());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i] = f(std::span<const double>(m.data() + i * k, k));
  });
  return out;
}

}  // namespace

PlanEvaluations evaluate_plan(const SamplePlan& plan, const Evaluator& f, unsigned threads) {
  PlanEvaluations e;
  e.f_a = evaluate_rows(plan.a, f, threads);
  e.f_b = evaluate_rows(plan.b, f, threads);
  e.f_ab.reserve(plan.ab.size());
  for (const auto& m : plan.ab) e.f_ab.push_back(evaluate_rows(m, f, threads));
  return e;
}

IndexPoint compute_indices(const PlanEvaluations& evals, std::span<const std::size_t> rows) {
  const std::size_t n_all = evals.f_a.size();
  const std::size_t n = rows.empty() ? n_all : rows.size();
  auto row = [&](std::size_t r) { return rows.empty() ? r : rows[r]; };

  double sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) sum += evals.f_a[row(r)] + evals.f_b[row(r)];
  const double mu = sum / static_cast<double>(2 * n);

  double ss = 0.0, mean_a = 0.0, mean_b = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double da = evals.f_a[row(r)] - mu;
    const double db = evals.f_b[row(r)] - mu;
    ss += da * da + db * db;
    mean_a += da;
    mean_b += db;
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);

  IndexPoint p;
  p.mean = mu;
  p.variance = ss / static_cast<double>(2 * n - 1);
  if (!(p.variance > 0.0) || !std::isfinite(p.variance))
    throw DegenerateOutputError("model output has zero variance; sensitivity indices are undefined");

  const std::size_t g = evals.f_ab.size();
  p.main.resize(g);
  p.total.resize(g);
  for (std::size_t j = 0; j < g; ++j) {
    const auto& fab = evals.f_ab[j];
    double prod = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t i = row(r);
      prod += (evals.f_b[i] - mu) * (fab[i] - mu);
      const double d = evals.f_a[i] - fab[i];
      sq += d * d;
    }
    p.main[j] = (prod / static_cast<double>(n) - mean_a * mean_b) / p.variance;
    p.total[j] = sq / (2.0 * static_cast<double>(n) * p.variance);
  }
  return p;
}

SensitivityReport estimate(const SamplePlan& plan, const PlanEvaluations& evals) {
  const auto check = [&](const std::vector<double>& v) {
    if (v.size() != plan.n) throw std::invalid_argument("evaluation vector length differs from plan size");
    for (double x : v)
      if (!std::isfinite(x)) throw NumericalError("non-finite model evaluation");
  };
  check(evals.f_a);
  check(evals.f_b);
  if (evals.f_ab.size() != plan.groups.size())
    throw std::invalid_argument("one hybrid evaluation vector is required per group");
  for (const auto& v : evals.f_ab) check(v);

  const IndexPoint p = compute_indices(evals);
  SensitivityReport report;
  report.output_mean = p.mean;
  report.output_variance = p.variance;
  for (std::size_t j = 0; j < plan.groups.size(); ++j)
    report.factors.push_back({plan.groups[j].name, p.main[j], p.total[j], std::nullopt, std::nullopt});
  report.metadata.n = plan.n;
  report.metadata.evaluations = plan.n * (plan.groups.size() + 2);
  report.metadata.evaluation_formula = "n*(g+2)";
  return report;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - w) + values[hi] * w;
}

BootstrapIntervals bootstrap(const SamplePlan& plan, const PlanEvaluations& evals,
                             std::size_t resamples, RandomStream& stream) {
  if (plan.n < 2) throw std::invalid_argument("bootstrap requires n > 1");
  if (resamples < 100) throw std::invalid_argument("bootstrap requires at least 100 resamples");
  const std::size_t g = plan.groups.size();
  std::vector<std::vector<double>> mains(g), totals(g);
  for (auto& v : mains) v.reserve(resamples);
  for (auto& v : totals) v.reserve(resamples);

  std::vector<std::size_t> rows(plan.n);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& r : rows) r = static_cast<std::size_t>(stream.next_u64() % plan.n);
    IndexPoint p;
    try {
      p = compute_indices(evals, rows);
    } catch (const DegenerateOutputError&) {
      continue;
    }
    for (std::size_t j = 0; j < g; ++j) {
      mains[j].push_back(p.main[j]);
      totals[j].push_back(p.total[j]);
    }
  }
  if (mains.empty() || mains[0].empty())
    throw DegenerateOutputError("every bootstrap resample had zero output variance");

  BootstrapIntervals out;
  for (std::size_t j = 0; j < g; ++j) {
    out.main.push_back({percentile(mains[j], 0.025), percentile(mains[j], 0.975)});
    out.total.push_back({percentile(totals[j], 0.025), percentile(totals[j], 0.975)});
  }
  return out;
}

SensitivityReport run_sobol(const GsaProblem& problem, const SobolOptions& options) {
  RandomStream root(options.seed, 0);
  RandomStream plan_stream = root.split(0x504C414Eu);
  SamplePlan plan = build_plan(problem.coordinates.size(), options.n, problem.groups, plan_stream, options.scheme);
  const PlanEvaluations evals = evaluate_plan(plan, problem.evaluate, options.threads);
  SensitivityReport report = estimate(plan, evals);
  if (options.bootstrap > 0) {
    RandomStream boot_stream = root.split(0x424F4F54u);
    const BootstrapIntervals ci = bootstrap(plan, evals, options.bootstrap, boot_stream);
    for (std::size_t j = 0; j < report.factors.size(); ++j) {
      report.factors[j].main_ci = ci.main[j];
      report.factors[j].total_ci = ci.total[j];
    }
  }
  report.metadata.method = options.method;
  report.metadata.model = problem.model;
  report.metadata.seed = options.seed;
  report.metadata.bootstrap = options.bootstrap;
  report.metadata.sampling =
      options.scheme == SamplingScheme::sobol_sequence ? "sobol_sequence" : "pseudo_random";
  return report;
}

SensitivityReport estimate_grouped_pair(const CorrelatedModel& model, const SobolOptions& options) {
  SobolOptions o = options;
  if (o.method == "sobol") o.method = "sobol_grouped";
  SensitivityReport r = run_sobol(grouped_problem(model), o);
  r.metadata.rho = model.rho;
  return r;
}

}  // namespace lvgsa
