#include <doctest.h>

#include <cmath>

#include "lvgsa/errors.hpp"
#include "lvgsa/models.hpp"
#include "lvgsa/sobol.hpp"

using namespace lvgsa;

namespace {

SensitivityReport independent_run(AlgebraicModel m, std::size_t n, std::uint64_t seed, std::size_t boot = 0) {
  SobolOptions o;
  o.n = n;
  o.seed = seed;
  o.bootstrap = boot;
  return run_sobol(independent_problem(algebraic_model(m, 0.0)), o);
}

}  // namespace

TEST_CASE("plan shape and grouping") {
  RandomStream s(1);
  auto plan = build_plan(3, 4, singleton_groups({"a", "b", "c"}), s);
  CHECK(plan.ab.size() == 3);
  CHECK(plan.a.rows() == 4);
  CHECK(plan.b.cols() == 3);

  RandomStream s2(1);
  std::vector<FactorGroup> g{{"g14", {0, 3}}, {"x2", {1}}, {"x3", {2}}};
  plan = build_plan(4, 50, g, s2);
  for (Eigen::Index r = 0; r < 50; ++r) {
    CHECK(plan.ab[0](r, 0) == plan.b(r, 0));
    CHECK(plan.ab[0](r, 3) == plan.b(r, 3));
    CHECK(plan.ab[0](r, 1) == plan.a(r, 1));
    CHECK(plan.ab[0](r, 2) == plan.a(r, 2));
  }
  CHECK_THROWS_AS(build_plan(4, 10, {{"x", {0, 1}}, {"y", {1, 2, 3}}}, s2), std::invalid_argument);
  CHECK_THROWS_AS(build_plan(4, 10, {{"x", {0, 1}}}, s2), std::invalid_argument);
}

TEST_CASE("A and B columns are uncorrelated") {
  for (auto scheme : {SamplingScheme::pseudo_random, SamplingScheme::sobol_sequence}) {
    RandomStream s(8);
    const auto plan = build_plan(4, 10000, singleton_groups({"a", "b", "c", "d"}), s, scheme);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const auto x = plan.a.col(i), y = plan.b.col(j);
        const double c = ((x.array() - x.mean()) * (y.array() - y.mean())).mean() /
                         std::sqrt((x.array() - x.mean()).square().mean() * (y.array() - y.mean()).square().mean());
        CHECK(std::fabs(c) < 0.03);
      }
    }
  }
}

TEST_CASE("model 3 independent: all indices 0.25") {
  const auto r = independent_run(AlgebraicModel::model3, 10000, 3);
  double sum = 0.0;
  for (const auto& f : r.factors) {
    CHECK(std::fabs(f.main - 0.25) < 0.02);
    CHECK(std::fabs(f.total - 0.25) < 0.02);
    CHECK(std::fabs(f.main - f.total) < 0.02);
    sum += f.main;
  }
  CHECK(std::fabs(sum - 1.0) < 0.03);
  CHECK(r.metadata.evaluations == 10000 * 6);
}

TEST_CASE("model 1 independent: analytic decomposition") {
  const auto r = independent_run(AlgebraicModel::model1, 10000, 4);
  const double main[] = {1.0 / 3, 1.0 / 3, 0, 0}, total[] = {1.0 / 3, 2.0 / 3, 1.0 / 3, 0};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::fabs(r.factors[i].main - main[i]) < 0.02);
    CHECK(std::fabs(r.factors[i].total - total[i]) < 0.02);
  }
  // inert factor: hybrid equals base, so the total is exactly zero
  CHECK(r.factors[3].total == 0.0);
}

TEST_CASE("sobol sequence sampling gives the same answers") {
  SobolOptions o;
  o.n = 8192;
  o.bootstrap = 0;
  o.scheme = SamplingScheme::sobol_sequence;
  const auto r = run_sobol(independent_problem(algebraic_model(AlgebraicModel::model3, 0.0)), o);
  for (const auto& f : r.factors) CHECK(std::fabs(f.total - 0.25) < 0.02);
  CHECK(r.metadata.sampling == "sobol_sequence");
}

TEST_CASE("grouped pair") {
  SobolOptions o;
  o.n = 10000;
  o.bootstrap = 0;
  o.seed = 9;
  auto r = estimate_grouped_pair(algebraic_model(AlgebraicModel::model3, 0.7), o);
  CHECK(r.factors.size() == 3);
  CHECK(std::fabs(r.at("X1+X4").main - 0.6296) < 0.02);
  CHECK(r.metadata.evaluations == 10000 * 5);

  r = estimate_grouped_pair(algebraic_model(AlgebraicModel::model3, 0.9), o);
  CHECK(std::fabs(r.at("X1+X4").main - 3.8 / 5.8) < 0.02);

  r = estimate_grouped_pair(algebraic_model(AlgebraicModel::model1, 0.9), o);
  CHECK(std::fabs(r.at("X1+X4").main - 1.0 / 3) < 0.03);
  CHECK(std::fabs(r.at("X2").total - 2.0 / 3) < 0.03);
}

TEST_CASE("constant model is degenerate") {
  GsaProblem p;
  p.coordinates = {"a", "b"};
  p.groups = singleton_groups(p.coordinates);
  p.evaluate = [](std::span<const double>) { return 2.5; };
  SobolOptions o;
  o.n = 100;
  CHECK_THROWS_AS(run_sobol(p, o), DegenerateOutputError);
}

TEST_CASE("non-finite evaluations are rejected") {
  GsaProblem p;
  p.coordinates = {"a"};
  p.groups = singleton_groups(p.coordinates);
  p.evaluate = [](std::span<const double> x) { return x[0] > 2.0 ? NAN : x[0]; };
  SobolOptions o;
  o.n = 1000;
  CHECK_THROWS_AS(run_sobol(p, o), NumericalError);
}

TEST_CASE("bootstrap intervals") {
  const auto r1 = independent_run(AlgebraicModel::model1, 10000, 21, 1000);
  const auto& x1 = r1.factors[0];
  REQUIRE(x1.main_ci);
  const double w1 = x1.main_ci->high - x1.main_ci->low;
  CHECK(w1 > 0.025);
  CHECK(w1 < 0.06);
  CHECK(x1.main_ci->low <= x1.main);
  CHECK(x1.main_ci->high >= x1.main);

  const auto r4 = independent_run(AlgebraicModel::model1, 40000, 21, 1000);
  const double w4 = r4.factors[0].main_ci->high - r4.factors[0].main_ci->low;
  CHECK(w4 / w1 == doctest::Approx(0.5).epsilon(0.2));

  RandomStream s(1);
  auto plan = build_plan(2, 2, singleton_groups({"a", "b"}), s);
  PlanEvaluations e{{1, 2}, {3, 4}, {{1, 2}, {3, 5}}};
  CHECK_THROWS_AS(bootstrap(plan, e, 50, s), std::invalid_argument);
}

TEST_CASE("results do not depend on thread count") {
  SobolOptions o;
  o.n = 2000;
  o.bootstrap = 200;
  o.seed = 5;
  o.threads = 1;
  const auto a = run_sobol(latent_problem(algebraic_model(AlgebraicModel::model2, 0.5)), o);
  o.threads = 4;
  const auto b = run_sobol(latent_problem(algebraic_model(AlgebraicModel::model2, 0.5)), o);
  for (std::size_t j = 0; j < a.factors.size(); ++j) {
    CHECK(a.factors[j].main == b.factors[j].main);
    CHECK(a.factors[j].total == b.factors[j].total);
    CHECK(a.factors[j].main_ci->low == b.factors[j].main_ci->low);
  }
}

TEST_CASE("percentile") {
  CHECK(percentile({3, 1, 2}, 0.5) == 2.0);
  CHECK(percentile({1, 2}, 0.25) == doctest::Approx(1.25));
  CHECK_THROWS(percentile({}, 0.5));
}
