#include "lvgsa.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "lvgsa/config.hpp"
#include "lvgsa/errors.hpp"
#include "lvgsa/latent.hpp"
#include "lvgsa/models.hpp"
#include "lvgsa/runner.hpp"

struct lvgsa_session {
  lvgsa::RunConfig config;
  lvgsa::RunOutcome outcome;
  std::string error;
};

namespace {

thread_local std::string g_last_error;

lvgsa_status fail(lvgsa_status code, const std::string& msg, lvgsa_session* s = nullptr) {
  g_last_error = msg;
  if (s) s->error = msg;
  return code;
}

// Maps exceptions to status codes; nothing escapes the C boundary.
template <class F>
lvgsa_status guarded(lvgsa_session* s, F&& f) {
  try {
    g_last_error.clear();
    if (s) s->error.clear();
    return f();
  } catch (const lvgsa::ConfigError& e) {
    return fail(LVGSA_ERR_CONFIG, e.what(), s);
  } catch (const lvgsa::NumericalError& e) {
    return fail(LVGSA_ERR_NUMERICAL, e.what(), s);
  } catch (const std::invalid_argument& e) {
    return fail(LVGSA_ERR_ARGUMENT, e.what(), s);
  } catch (const std::domain_error& e) {
    return fail(LVGSA_ERR_ARGUMENT, e.what(), s);
  } catch (const std::bad_alloc&) {
    return fail(LVGSA_ERR_INTERNAL, "out of memory", s);
  } catch (const std::exception& e) {
    return fail(LVGSA_ERR_INTERNAL, e.what(), s);
  } catch (...) {
    return fail(LVGSA_ERR_INTERNAL, "unknown error", s);
  }
}

lvgsa_status finish(lvgsa_session* s, lvgsa::RunOutcome&& out) {
  s->outcome = std::move(out);
  if (!s->outcome.errors.empty()) {
    std::string msg;
    for (const auto& e : s->outcome.errors) msg += (msg.empty() ? "" : "\n") + e;
    fail(LVGSA_OK, msg, s);
  }
  return static_cast<lvgsa_status>(s->outcome.exit_code);
}

lvgsa_status make_session(lvgsa::RunConfig (*load)(const char*), const char* arg, lvgsa_session** out) {
  if (!out) return fail(LVGSA_ERR_ARGUMENT, "null output pointer");
  *out = nullptr;
  if (!arg) return fail(LVGSA_ERR_ARGUMENT, "null argument");
  return guarded(nullptr, [&] {
    auto* s = new lvgsa_session{load(arg), {}, {}};
    *out = s;
    return LVGSA_OK;
  });
}

}  // namespace

extern "C" {

const char* lvgsa_version(void) { return "1.0.0"; }

const char* lvgsa_last_error(void) { return g_last_error.c_str(); }

lvgsa_status lvgsa_session_from_file(const char* path, lvgsa_session** out) {
  return make_session([](const char* p) { return lvgsa::load_config(p); }, path, out);
}

lvgsa_status lvgsa_session_from_string(const char* json_text, lvgsa_session** out) {
  return make_session([](const char* t) { return lvgsa::parse_config(t); }, json_text, out);
}

void lvgsa_session_destroy(lvgsa_session* session) { delete session; }

lvgsa_status lvgsa_session_set_seed(lvgsa_session* session, uint64_t seed) {
  if (!session) return fail(LVGSA_ERR_ARGUMENT, "null session");
  session->config.seed = seed;
  return LVGSA_OK;
}

lvgsa_status lvgsa_session_set_output_dir(lvgsa_session* session, const char* dir) {
  if (!session || !dir) return fail(LVGSA_ERR_ARGUMENT, "null argument");
  session->config.output_dir = dir;
  return LVGSA_OK;
}

lvgsa_status lvgsa_session_set_threads(lvgsa_session* session, unsigned threads) {
  if (!session) return fail(LVGSA_ERR_ARGUMENT, "null session");
  session->config.threads = threads;
  return LVGSA_OK;
}

lvgsa_status lvgsa_run(lvgsa_session* session) {
  if (!session) return fail(LVGSA_ERR_ARGUMENT, "null session");
  return guarded(session, [&] { return finish(session, lvgsa::run_analyses(session->config)); });
}

lvgsa_status lvgsa_sweep(lvgsa_session* session) {
  if (!session) return fail(LVGSA_ERR_ARGUMENT, "null session");
  return guarded(session, [&] { return finish(session, lvgsa::run_sweep(session->config)); });
}

lvgsa_status lvgsa_population(lvgsa_session* session) {
  if (!session) return fail(LVGSA_ERR_ARGUMENT, "null session");
  return guarded(session, [&] { return finish(session, lvgsa::run_population(session->config)); });
}

const char* lvgsa_session_summary(const lvgsa_session* session) {
  return session ? session->outcome.summary.c_str() : "";
}

const char* lvgsa_session_error(const lvgsa_session* session) { return session ? session->error.c_str() : ""; }

size_t lvgsa_session_file_count(const lvgsa_session* session) {
  return session ? session->outcome.files.size() : 0;
}

const char* lvgsa_session_file(const lvgsa_session* session, size_t index) {
  if (!session || index >= session->outcome.files.size()) return nullptr;
  return session->outcome.files[index].c_str();
}

double lvgsa_session_wall_time(const lvgsa_session* session) { return session ? session->outcome.wall_time_s : 0.0; }

lvgsa_status lvgsa_latent_decompose(double rho, double* lambda1, double* lambda2, double* sigma1_sq,
                                    double* sigma2_sq) {
  return guarded(nullptr, [&] {
    const auto d = lvgsa::decompose(rho);
    if (lambda1) *lambda1 = d.lambda1;
    if (lambda2) *lambda2 = d.lambda2;
    if (sigma1_sq) *sigma1_sq = d.sigma1_sq;
    if (sigma2_sq) *sigma2_sq = d.sigma2_sq;
    return LVGSA_OK;
  });
}

lvgsa_status lvgsa_model_eval(const char* model, const double* x, double* y) {
  if (!model || !x || !y) return fail(LVGSA_ERR_ARGUMENT, "null argument");
  return guarded(nullptr, [&] {
    const auto m = lvgsa::parse_algebraic_model(model);
    *y = lvgsa::eval(m, std::span<const double>(x, 4));
    return LVGSA_OK;
  });
}

}  // extern "C"
