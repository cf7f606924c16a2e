#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "lvgsa.h"

TEST_CASE("pure helpers") {
  double l1 = 0, l2 = 0, s1 = 0, s2 = 0;
  CHECK(lvgsa_latent_decompose(-0.49, &l1, &l2, &s1, &s2) == LVGSA_OK);
  CHECK(l1 == doctest::Approx(0.7));
  CHECK(l2 == doctest::Approx(-0.7));
  CHECK(s1 == doctest::Approx(0.51));
  CHECK(lvgsa_latent_decompose(1.5, &l1, &l2, &s1, &s2) == LVGSA_ERR_ARGUMENT);
  CHECK(std::string(lvgsa_last_error()).size() > 0);

  const double x[] = {2, 0, 3, 0};
  double y = 0;
  CHECK(lvgsa_model_eval("model2", x, &y) == LVGSA_OK);
  CHECK(y == 8.0);
  CHECK(lvgsa_model_eval("nope", x, &y) == LVGSA_ERR_CONFIG);
  CHECK(lvgsa_model_eval("model1", nullptr, &y) == LVGSA_ERR_ARGUMENT);
  CHECK(std::string(lvgsa_version()).size() > 0);
}

TEST_CASE("session lifecycle") {
  lvgsa_session* s = nullptr;
  CHECK(lvgsa_session_from_string(R"({"model": "model1", "bogus": 1})", &s) == LVGSA_ERR_CONFIG);
  CHECK(s == nullptr);
  CHECK(std::string(lvgsa_last_error()).find("bogus") != std::string::npos);
  CHECK(lvgsa_session_from_file("/nonexistent/config.json", &s) == LVGSA_ERR_CONFIG);
  CHECK(lvgsa_run(nullptr) == LVGSA_ERR_ARGUMENT);

  REQUIRE(lvgsa_session_from_string(R"({"model": "model3", "rho": 0.5, "n": 1000, "bootstrap": 100,
                                        "methods": ["sobol_grouped"]})",
                                    &s) == LVGSA_OK);
  const char* tmp = std::getenv("LVGSA_TEST_TMP");
  const std::string dir = std::string(tmp ? tmp : "test_tmp") + "/capi";
  CHECK(lvgsa_session_set_output_dir(s, dir.c_str()) == LVGSA_OK);
  CHECK(lvgsa_session_set_seed(s, 17) == LVGSA_OK);
  CHECK(lvgsa_session_set_threads(s, 2) == LVGSA_OK);
  CHECK(lvgsa_run(s) == LVGSA_OK);
  CHECK(lvgsa_session_file_count(s) == 3);
  CHECK(std::string(lvgsa_session_file(s, 0)).find("model3_sobol_grouped_rho0.50.csv") != std::string::npos);
  CHECK(lvgsa_session_file(s, 99) == nullptr);
  CHECK(std::string(lvgsa_session_summary(s)).find("X1+X4") != std::string::npos);
  CHECK(lvgsa_session_wall_time(s) >= 0.0);
  CHECK(lvgsa_population(s) == LVGSA_ERR_CONFIG);
  lvgsa_session_destroy(s);
}
