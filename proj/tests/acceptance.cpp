// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lvgsa/kucherenko.hpp"
#include "lvgsa/models.hpp"
#include "lvgsa/pbpk.hpp"
#include "lvgsa/runner.hpp"

using namespace lvgsa;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

struct Check {
  std::vector<std::string> misses;
  std::size_t count = 0;

  void near(const std::string& what, double got, double want, double tol) {
    ++count;
    if (!(std::fabs(got - want) <= tol)) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%s = %.4f, expected %.4f +/- %.3f", what.c_str(), got, want, tol);
      misses.push_back(buf);
    }
  }
  void that(const std::string& what, bool ok) {
    ++count;
    if (!ok) misses.push_back(what);
  }
};

int failures = 0;

void report(int id, const std::string& title, const Check& c, double seconds, double limit_s) {
  Check all = c;
  if (limit_s > 0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "runtime %.1f s exceeds %.0f s", seconds, limit_s);
    all.that(buf, seconds < limit_s);
  }
  const bool ok = all.misses.empty();
  if (!ok) ++failures;
  std::printf("criterion %d: %s  %s (%zu checks, %zu failed, %.1f s)\n", id, ok ? "PASS" : "FAIL", title.c_str(),
              all.count, all.misses.size(), seconds);
  for (const auto& m : all.misses) std::printf("    %s\n", m.c_str());
  std::fflush(stdout);
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Mean main/total per factor over the seed set.
struct Averaged {
  std::vector<std::string> names;
  std::vector<double> main, total;
};

Averaged average(const std::function<SensitivityReport(std::uint64_t)>& run) {
  Averaged a;
  for (auto seed : kSeeds) {
    const auto r = run(seed);
    if (a.names.empty()) {
      for (const auto& f : r.factors) a.names.push_back(f.name);
      a.main.assign(r.factors.size(), 0.0);
      a.total.assign(r.factors.size(), 0.0);
    }
    for (std::size_t i = 0; i < r.factors.size(); ++i) {
      a.main[i] += r.factors[i].main / std::size(kSeeds);
      a.total[i] += r.factors[i].total / std::size(kSeeds);
    }
  }
  return a;
}

Averaged method_average(AlgebraicModel m, Method method, double rho, std::size_t n) {
  RunConfig c;
  c.model = to_string(m);
  c.n = n;
  c.bootstrap = 0;
  c.threads = 0;
  return average([&](std::uint64_t seed) {
    c.seed = seed;
    return run_method(c, method, rho);
  });
}

// Published table values, factor order as reported by each method.
struct TableRow {
  Method method;
  std::vector<double> main, total;
};

struct PublishedTable {
  AlgebraicModel model;
  double rho;
  std::vector<TableRow> rows;
};

const std::vector<PublishedTable>& published() {
  using M = Method;
  static const std::vector<PublishedTable> t{
      {AlgebraicModel::model1, 0.7,
       {{M::sobol_independent, {0.34, 0.33, 0, 0}, {0.33, 0.67, 0.33, 0}},
        {M::kucherenko, {0.33, 0.32, 0, 0.16}, {0.17, 0.64, 0.34, 0}},
        {M::latent, {0.11, 0.32, 0.02, 0.02, 0.26}, {0.1, 0.65, 0.33, 0, 0.23}},
        {M::sobol_grouped, {0.31, 0.31, -0.03}, {0.34, 0.7, 0.32}}}},
      {AlgebraicModel::model1, 0.9,
       {{M::sobol_independent, {0.33, 0.32, -0.01, -0.01}, {0.35, 0.66, 0.33, 0}},
        {M::kucherenko, {0.33, 0.33, -0.01, 0.27}, {0.06, 0.69, 0.35, 0}},
        {M::latent, {0.05, 0.33, 0.02, 0.01, 0.3}, {0.04, 0.65, 0.35, 0, 0.29}},
        {M::sobol_grouped, {0.33, 0.35, 0}, {0.34, 0.67, 0.33}}}},
      {AlgebraicModel::model2, 0.7,
       {{M::sobol_independent, {0.34, 0.32, 0, -0.01}, {0.68, 0.33, 0.34, 0}},
        {M::kucherenko, {0.32, 0.33, 0, 0.16}, {0.34, 0.32, 0.34, 0}},
        {M::latent, {0.11, 0.33, 0.01, 0.01, 0.24}, {0.2, 0.33, 0.33, 0, 0.47}},
        {M::sobol_grouped, {0.33, 0.32, -0.03}, {0.68, 0.34, 0.33}}}},
      {AlgebraicModel::model2, 0.9,
       {{M::sobol_independent, {0.33, 0.32, 0, 0}, {0.66, 0.34, 0.34, 0}},
        {M::kucherenko, {0.32, 0.32, 0, 0.25}, {0.13, 0.33, 0.35, 0}},
        {M::latent, {0.03, 0.32, -0.01, 0, 0.29}, {0.06, 0.33, 0.34, 0, 0.61}},
        {M::sobol_grouped, {0.36, 0.35, 0.01}, {0.65, 0.32, 0.34}}}},
      {AlgebraicModel::model3, 0.7,
       {{M::sobol_independent, {0.25, 0.25, 0.26, 0.26}, {0.25, 0.24, 0.25, 0.25}},
        {M::kucherenko, {0.55, 0.19, 0.18, 0.54}, {0.1, 0.19, 0.19, 0.1}},
        {M::latent, {0.07, 0.18, 0.2, 0.06, 0.51}, {0.05, 0.19, 0.19, 0.05, 0.51}},
        {M::sobol_grouped, {0.62, 0.19, 0.18}, {0.63, 0.18, 0.19}}}},
      {AlgebraicModel::model3, 0.9,
       {{M::sobol_independent, {0.24, 0.24, 0.26, 0.25}, {0.25, 0.25, 0.24, 0.26}},
        {M::kucherenko, {0.63, 0.17, 0.18, 0.62}, {0.03, 0.17, 0.17, 0.03}},
        {M::latent, {0.02, 0.18, 0.17, 0.02, 0.63}, {0.02, 0.17, 0.17, 0.02, 0.62}},
        {M::sobol_grouped, {0.65, 0.17, 0.18}, {0.65, 0.17, 0.19}}}},
  };
  return t;
}

std::string label(AlgebraicModel m, double rho, Method method, const std::string& factor, const char* index) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s rho=%.1f %s %s %s", to_string(m).c_str(), rho, to_string(method).c_str(),
                factor.c_str(), index);
  return buf;
}

std::size_t index_of(const Averaged& a, const std::string& name) {
  for (std::size_t i = 0; i < a.names.size(); ++i)
    if (a.names[i] == name) return i;
  throw std::runtime_error("factor " + name + " missing");
}

// Grouped reports in table order: group, X2, X3.
Averaged grouped_order(const Averaged& a, const std::string& group) {
  Averaged out;
  for (const std::string& n : {group, std::string("X2"), std::string("X3")}) {
    const auto i = index_of(a, n);
    out.names.push_back(n);
    out.main.push_back(a.main[i]);
    out.total.push_back(a.total[i]);
  }
  return out;
}

void compare_table(const PublishedTable& t, Check& c,
                   const std::function<bool(Method, const std::string&, const char*, double&, double&)>& override_) {
  for (const auto& row : t.rows) {
    Averaged a = method_average(t.model, row.method, t.rho, 10000);
    if (row.method == Method::sobol_grouped) a = grouped_order(a, "X1+X4");
    for (std::size_t i = 0; i < row.main.size(); ++i) {
      double want = row.main[i], tol = 0.03;
      override_(row.method, a.names[i], "main", want, tol);
      c.near(label(t.model, t.rho, row.method, a.names[i], "main"), a.main[i], want, tol);
      want = row.total[i];
      tol = 0.03;
      override_(row.method, a.names[i], "total", want, tol);
      c.near(label(t.model, t.rho, row.method, a.names[i], "total"), a.total[i], want, tol);
    }
  }
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  const double t3 = 1.0 / 3;
  struct Case {
    AlgebraicModel m;
    std::vector<double> main, total;
  };
  const std::vector<Case> cases{{AlgebraicModel::model1, {t3, t3, 0, 0}, {t3, 2 * t3, t3, 0}},
                                {AlgebraicModel::model2, {t3, t3, 0, 0}, {2 * t3, t3, t3, 0}},
                                {AlgebraicModel::model3, {0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}}};
  for (const auto& k : cases) {
    const auto a = method_average(k.m, Method::sobol_independent, 0.0, 10000);
    for (std::size_t i = 0; i < 4; ++i) {
      c.near(to_string(k.m) + " " + a.names[i] + " main", a.main[i], k.main[i], 0.02);
      c.near(to_string(k.m) + " " + a.names[i] + " total", a.total[i], k.total[i], 0.02);
    }
  }
  report(1, "independent Sobol matches closed-form indices (n=1e4, 5 seeds, tol 0.02)", c, since(t0), 60);
}

void criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  for (const auto& t : published()) {
    if (t.model != AlgebraicModel::model1) continue;
    compare_table(t, c, [&](Method m, const std::string& f, const char* idx, double& want, double& tol) {
      if (t.rho == 0.7 && m == Method::latent && f == "eta" && std::string(idx) == "main") {
        want = 0.7 / 3;
        tol = 0.02;
        return true;
      }
      return false;
    });
  }
  report(2, "model 1 published table at rho 0.7 and 0.9 (tol 0.03; latent eta main at 0.7 vs 0.233 +/- 0.02)", c,
         since(t0), 120);
}

void criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  for (const auto& t : published())
    if (t.model != AlgebraicModel::model1) compare_table(t, c, [](auto&&...) { return false; });

  const double rho = 0.7, v = 4 + 2 * rho;
  const auto k = method_average(AlgebraicModel::model3, Method::kucherenko, rho, 10000);
  c.near("model3 rho=0.7 kucherenko X1 main (closed form)", k.main[0], (1 + rho) * (1 + rho) / v, 0.02);
  c.near("model3 rho=0.7 kucherenko X1 total (closed form)", k.total[0], (1 - rho * rho) / v, 0.02);
  for (double r : {0.7, 0.9}) {
    const auto g = method_average(AlgebraicModel::model3, Method::sobol_grouped, r, 10000);
    c.near(label(AlgebraicModel::model3, r, Method::sobol_grouped, "X1+X4", "main (closed form)"),
           g.main[index_of(g, "X1+X4")], (2 + 2 * r) / (4 + 2 * r), 0.02);
  }
  report(3, "models 2 and 3 published tables at rho 0.7 and 0.9 plus closed-form anchors", c, since(t0), 0);
}

void criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  // Inert-factor indices are pure Monte Carlo noise of order 1/sqrt(n); a
  // larger base sample keeps that noise well inside the 0.01 band.
  const std::size_t n = 50000;
  for (double rho : default_rho_grid()) {
    for (auto m : {AlgebraicModel::model1, AlgebraicModel::model2}) {
      const auto k = method_average(m, Method::kucherenko, rho, n);
      c.near(label(m, rho, Method::kucherenko, "X4", "total"), k.total[3], 0.0, 0.01);
      const auto l = method_average(m, Method::latent, rho, n);
      const auto e4 = index_of(l, "eps4");
      c.near(label(m, rho, Method::latent, "eps4", "main"), l.main[e4], 0.0, 0.01);
      c.near(label(m, rho, Method::latent, "eps4", "total"), l.total[e4], 0.0, 0.01);
    }
    const auto l3 = method_average(AlgebraicModel::model3, Method::latent, rho, n);
    const double eta = l3.main[index_of(l3, "eta")];
    if (rho < 0)
      c.near(label(AlgebraicModel::model3, rho, Method::latent, "eta", "main"), eta, 0.0, 0.01);
    else
      c.near(label(AlgebraicModel::model3, rho, Method::latent, "eta", "main"), eta,
             4 * std::fabs(rho) / (4 + 2 * rho), 0.02);
  }
  report(4, "rho-sweep structure: inert X4 and eps4 vanish, model 3 eta follows 4|rho|/(4+2rho)", c, since(t0), 300);
}

void criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  RunConfig cfg;
  cfg.model = "pbpk_mdz";
  cfg.n = 2000;
  cfg.bootstrap = 0;
  cfg.seed = 1;
  cfg.threads = 0;
  const auto s = run_method(cfg, Method::sobol_independent, cfg.pbpk.population.rho);
  const auto l = run_method(cfg, Method::latent, cfg.pbpk.population.rho);
  const double mppgl = s.at("MPPGL").total, a4 = s.at("CYP3A4").total, a5 = s.at("CYP3A5").total;
  const double minor = std::max({s.at("sex").total, s.at("height").total, s.at("BMI").total});
  char buf[256];
  std::snprintf(buf, sizeof buf, "total-effect ranking MPPGL %.3f > CYP3A4 %.3f > CYP3A5 %.3f > max(sex,height,BMI) %.3f",
                mppgl, a4, a5, minor);
  c.that(buf, mppgl > a4 && a4 > a5 && a5 > minor);
  c.near("sobol MPPGL total", mppgl, 0.39, 0.06);
  c.near("sobol CYP3A4 total", a4, 0.33, 0.06);
  c.near("sobol CYP3A5 total", a5, 0.29, 0.06);

  const auto& eta = l.at("eta");
  bool largest = true;
  for (const auto& f : l.factors) largest = largest && (f.name == "eta" || f.main < eta.main);
  c.that("latent eta has the largest main effect", largest);
  c.near("latent eta main", eta.main, 0.43, 0.06);
  c.near("latent eps_CYP3A4 main", l.at("eps_CYP3A4").main, 0.12, 0.05);
  c.near("latent eps_CYP3A5 main", l.at("eps_CYP3A5").main, 0.09, 0.05);

  std::printf("    sobol_independent:");
  for (const auto& f : s.factors) std::printf(" %s %.3f/%.3f", f.name.c_str(), f.main, f.total);
  std::printf("\n    latent:");
  for (const auto& f : l.factors) std::printf(" %s %.3f/%.3f", f.name.c_str(), f.main, f.total);
  std::printf("\n");
  report(5, "PBPK GSA at n=2000: ranking and published indices", c, since(t0), 1200);
}

void criterion6() {
  using namespace pbpk;
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  PopulationConfig pop;
  RandomStream root(606);
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    RandomStream s = root.split(i);
    const auto ind = generate_individual(s, pop, InputMode::correlated);
    const PBPKSystem sys(ind, midazolam(), 5.0);
    const auto r = simulate_subject(sys, 168.0, {}, {}, true);
    for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
      const auto y = r.trajectory.state(k);
      double m = 0.0;
      for (std::size_t j = 0; j < kStateSize; ++j) m += y[j];
      worst = std::max(worst, std::fabs(m / 5.0 - 1.0));
    }
  }
  c.near("worst relative mass-balance error over 100 subjects", worst, 0.0, 1e-6);

  for (Sex sex : {Sex::female, Sex::male}) {
    Covariates cov;
    cov.sex = sex;
    cov.height_cm = 170;
    cov.bmi = 22;
    cov.mppgl = 40;
    cov.cyp3a4 = 137;
    cov.cyp3a5 = 103;
    const auto ind = make_individual(cov, pop);
    double q = 0.0;
    for (std::size_t o = 0; o < organ_count; ++o)
      if (o != lung) q += ind.flow[o];
    c.near(std::string("flow-fraction sum, ") + (sex == Sex::male ? "male" : "female"), q / ind.cardiac_output, 1.0,
           1e-9);
  }

  for (auto mode : {InputMode::latent, InputMode::correlated}) {
    RandomStream s(6060);
    std::vector<double> a, b;
    for (int i = 0; i < 100000; ++i) {
      const auto ind = generate_individual(s, pop, mode);
      a.push_back(std::log(ind.covariates.cyp3a4));
      b.push_back(std::log(ind.covariates.cyp3a5));
    }
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sab += (a[i] - ma) * (b[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
    }
    c.near("corr(log CYP3A4, log CYP3A5), " + to_string(mode) + " mode", sab / std::sqrt(saa * sbb), 0.52, 0.01);
  }
  report(6, "PBPK invariants: mass balance, flow sums, CYP log-correlation", c, since(t0), 0);
}

void criterion7() {
  using namespace pbpk;
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  PopulationRun run;
  run.subjects = 2000;
  run.seed = 7;
  run.grid_points = 50;
  run.threads = 0;
  run.mode = InputMode::independent;
  const auto ind = simulate_population(run);
  run.mode = InputMode::correlated;
  const auto cor = simulate_population(run);
  RandomStream bs(77);
  const auto t = exposure_widening_test(cor.auc, ind.auc, 1000, bs);
  char buf[256];
  std::snprintf(buf, sizeof buf, "var(log AUC) correlated %.4f > independent %.4f", t.log_auc_variance_correlated,
                t.log_auc_variance_independent);
  c.that(buf, t.log_auc_variance_correlated > t.log_auc_variance_independent);
  std::snprintf(buf, sizeof buf, "one-sided paired bootstrap p = %.4f < 0.05", t.p_value);
  c.that(buf, t.p_value < 0.05);
  std::printf("    var(log AUC): correlated %.4f, independent %.4f, p = %.4f\n", t.log_auc_variance_correlated,
              t.log_auc_variance_independent, t.p_value);
  report(7, "exposure widening under CYP correlation (2000 paired subjects)", c, since(t0), 0);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  const fs::path root = fs::temp_directory_path() / "lvgsa_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::function<RunOutcome(const fs::path&)>> jobs{
      [](const fs::path& d) {
        RunConfig cfg = parse_config(R"({"model": "model2", "rho": [0.7, -0.3], "n": 2000, "bootstrap": 200, "seed": 11})");
        cfg.output_dir = d.string();
        return run_analyses(cfg);
      },
      [](const fs::path& d) {
        RunConfig cfg = parse_config(R"({"model": "model3", "n": 1000, "bootstrap": 100, "seed": 3,
                                         "methods": ["latent", "kucherenko"]})");
        cfg.output_dir = d.string();
        return run_sweep(cfg);
      },
      [](const fs::path& d) {
        RunConfig cfg = parse_config(R"({"model": "pbpk_mdz", "n": 100, "bootstrap": 100, "seed": 5,
                                         "methods": ["sobol_independent", "latent"], "pbpk": {"rtol": 1e-6}})");
        cfg.output_dir = d.string();
        return run_analyses(cfg);
      },
      [](const fs::path& d) {
        RunConfig cfg = parse_config(R"({"model": "pbpk_mdz", "seed": 9, "pbpk": {"rtol": 1e-6},
                                         "population": {"subjects": 100, "modes": ["independent", "latent"]}})");
        cfg.output_dir = d.string();
        return run_population(cfg);
      },
  };
  std::size_t compared = 0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto a = root / ("a" + std::to_string(j)), b = root / ("b" + std::to_string(j));
    const auto oa = jobs[j](a);
    const auto ob = jobs[j](b);
    c.that("job " + std::to_string(j) + " file lists match", oa.files.size() == ob.files.size());
    for (const auto& f : oa.files) {
      const auto name = fs::path(f).filename();
      c.that("byte-identical " + name.string(), slurp(a / name) == slurp(b / name));
      ++compared;
    }
  }
  std::printf("    compared %zu report files\n", compared);
  report(8, "repeated runs produce byte-identical report files", c, since(t0), 0);
}

}  // namespace

int main(int argc, char** argv) {
  std::map<int, void (*)()> all{{1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
                                {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8}};
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  if (pick.empty())
    for (const auto& [k, f] : all) pick.push_back(k);
  for (int k : pick) {
    if (!all.count(k)) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    try {
      all[k]();
    } catch (const std::exception& e) {
      ++failures;
      std::printf("criterion %d: FAIL  aborted: %s\n", k, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, pick.size());
  return failures == 0 ? 0 : 1;
}
