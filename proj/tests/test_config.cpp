#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lvgsa/errors.hpp"
#include "lvgsa/runner.hpp"

using namespace lvgsa;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* root = std::getenv("LVGSA_TEST_TMP");
  fs::path p = fs::path(root ? root : "test_tmp") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig config_in(const std::string& json, const fs::path& dir) {
  RunConfig c = parse_config(json);
  c.output_dir = dir.string();
  return c;
}

}  // namespace

TEST_CASE("defaults") {
  const auto c = parse_config(R"({"model": "model1", "rho": 0.7})");
  CHECK(c.n == 10000);
  CHECK(c.bootstrap == 1000);
  CHECK(c.methods.size() == 4);
  CHECK(c.rho == std::vector<double>{0.7});
  CHECK(c.checkpoints == std::vector<std::size_t>{100, 200, 500, 1000, 2000, 5000});
  CHECK_FALSE(c.record_wall_time);
}

TEST_CASE("invalid configs are rejected") {
  const char* bad[] = {
      R"({"model": "model1", "rho": 0.7, "colour": 1})",
      R"({"model": "model7"})",
      R"({"rho": 0.7})",
      R"({"model": "model1", "rho": 1.0})",
      R"({"model": "model1", "rho": [0.2, -1.2]})",
      R"({"model": "model1", "n": 50})",
      R"({"model": "model1", "methods": []})",
      R"({"model": "model1", "methods": ["latent", "latent"]})",
      R"({"model": "model1", "methods": ["morris"]})",
      R"({"model": "model1", "bootstrap": 10})",
      R"({"model": "model1", "n": 500, "methods": ["kucherenko"]})",
      R"({"model": "model1", "pbpk": {"dose_mg": 1}})",
      R"({"model": "pbpk_mdz", "pbpk": {"dose": 1}})",
      R"({"model": "pbpk_mdz", "pbpk": {"co_mean_l_per_min": {"male": 5}}})",
      R"({"model": "pbpk_mdz", "population": {"subjects": 10, "extra": true}})",
      R"({"model": "pbpk_mdz", "population": {"modes": ["sideways"]}})",
      R"({"model": "pbpk_mdz", "rho": [0.1, 0.2]})",
      R"({"model": "model1", "seed": -3})",
      R"({"model": "model1", "sampling": "halton"})",
      R"({"model": "model1",)",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_config(text), ConfigError);
  }
}

TEST_CASE("pbpk overrides") {
  const auto c = parse_config(R"({"model": "pbpk_mdz", "rho": 0.3,
    "pbpk": {"dose_mg": 2, "t_end_h": 24, "rtol": 1e-6, "co_mean_l_per_min": {"male": 6, "female": 5},
             "conserve_liver_flow": false},
    "population": {"subjects": 10, "modes": ["independent", "latent"]}})");
  CHECK(c.pbpk.dose_mg == 2.0);
  CHECK(c.pbpk.t_end == 24.0);
  CHECK(c.pbpk.population.rho == 0.3);
  CHECK(c.pbpk.population.co_mean_l_per_min[1] == 6.0);
  CHECK_FALSE(c.pbpk.system.conserve_liver_flow);
  CHECK(c.population.modes.size() == 2);
}

TEST_CASE("output directory resolution") {
  RunConfig c = parse_config(R"({"model": "model3", "rho": 0.1})");
  setenv("LVGSA_OUTPUT_DIR", "/tmp/from_env", 1);
  CHECK(resolve_output_dir(c) == "/tmp/from_env");
  c.output_dir = "explicit";
  CHECK(resolve_output_dir(c) == "explicit");
  unsetenv("LVGSA_OUTPUT_DIR");
  c.output_dir.clear();
  CHECK(resolve_output_dir(c) == "lvgsa_out");
}

TEST_CASE("format_number round-trips") {
  for (double v : {0.1, 1.0 / 3, -2.5e-17, 12345.678, 0.0}) CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("run writes one report per method and is deterministic") {
  const auto dir1 = scratch("run1"), dir2 = scratch("run2");
  const std::string text = R"({"model": "model1", "rho": 0.7, "seed": 42, "n": 1000, "bootstrap": 100})";
  const auto out1 = run_analyses(config_in(text, dir1));
  const auto out2 = run_analyses(config_in(text, dir2));
  CHECK(out1.exit_code == exit_ok);
  for (const char* m : {"sobol_independent", "sobol_grouped", "kucherenko", "latent"}) {
    const std::string stem = std::string("model1_") + m + "_rho0.70";
    CHECK(fs::exists(dir1 / (stem + ".csv")));
    CHECK(fs::exists(dir1 / (stem + ".json")));
  }
  CHECK(fs::exists(dir1 / "model1_kucherenko_rho0.70_convergence.csv"));
  REQUIRE(out1.files.size() == out2.files.size());
  for (const auto& f : out1.files) {
    const auto name = fs::path(f).filename();
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
  }

  const auto latent = nlohmann::json::parse(slurp(dir1 / "model1_latent_rho0.70.json"));
  std::vector<std::string> names;
  for (const auto& f : latent["factors"]) names.push_back(f["name"]);
  CHECK(names == std::vector<std::string>{"eps1", "X2", "X3", "eps4", "eta"});
  CHECK(latent["evaluations"] == 1000 * 7);
  CHECK_FALSE(latent.contains("wall_time_s"));
  const auto k = nlohmann::json::parse(slurp(dir1 / "model1_kucherenko_rho0.70.json"));
  CHECK(k["evaluations"] == 1000 * 13);
  CHECK(k["factors"][0]["main_ci"].is_null());
}

TEST_CASE("thread count does not change files") {
  const auto d1 = scratch("threads1"), d4 = scratch("threads4");
  RunConfig c1 = config_in(R"({"model": "model2", "rho": -0.5, "n": 1000, "bootstrap": 100, "threads": 1})", d1);
  RunConfig c4 = c1;
  c4.threads = 4;
  c4.output_dir = d4.string();
  const auto o1 = run_analyses(c1);
  run_analyses(c4);
  for (const auto& f : o1.files) CHECK(slurp(f) == slurp(d4 / fs::path(f).filename()));
}

TEST_CASE("sweep writes a combined long-format file") {
  const auto dir = scratch("sweep");
  RunConfig c = config_in(R"({"model": "model3", "n": 1000, "bootstrap": 0, "methods": ["latent", "kucherenko"]})", dir);
  const auto out = run_sweep(c);
  CHECK(out.exit_code == exit_ok);
  std::ifstream in(dir / "model3_sweep.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "rho,method,factor,index,value,ci_low,ci_high");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  // 9 rho values; latent has 5 factors, kucherenko 4; two index types each
  CHECK(rows == 9 * (5 + 4) * 2);
}

TEST_CASE("algebraic run without rho is a config error") {
  RunConfig c = parse_config(R"({"model": "model2"})");
  CHECK_THROWS_AS(run_analyses(c), ConfigError);
}

TEST_CASE("population export with t_end override") {
  const auto dir = scratch("population");
  RunConfig c = config_in(R"({"model": "pbpk_mdz", "seed": 4,
    "pbpk": {"t_end_h": 24, "rtol": 1e-6},
    "population": {"subjects": 12, "grid_points": 13, "modes": ["independent", "correlated"], "widening_bootstrap": 100}})",
                          dir);
  const auto out = run_population(c);
  CHECK(out.exit_code == exit_ok);
  std::ifstream in(dir / "pbpk_mdz_population_independent_concentration.csv");
  std::string line, last;
  std::size_t rows = 0;
  std::getline(in, line);
  while (std::getline(in, line)) {
    last = line;
    ++rows;
  }
  CHECK(rows == 13);
  CHECK(last.rfind("24,", 0) == 0);
  const auto meta = nlohmann::json::parse(slurp(dir / "pbpk_mdz_population.json"));
  CHECK(meta.contains("widening_test"));
  CHECK(slurp(dir / "pbpk_mdz_population_summary.csv").find("correlated") != std::string::npos);
}
