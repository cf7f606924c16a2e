#include "lvgsa/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lvgsa/errors.hpp"

namespace lvgsa {

using nlohmann::json;

Method parse_method(std::string_view name) {
  if (name == "sobol_independent") return Method::sobol_independent;
  if (name == "sobol_grouped") return Method::sobol_grouped;
  if (name == "kucherenko") return Method::kucherenko;
  if (name == "latent") return Method::latent;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::sobol_independent: return "sobol_independent";
    case Method::sobol_grouped: return "sobol_grouped";
    case Method::kucherenko: return "kucherenko";
    case Method::latent: return "latent";
  }
  return "unknown";
}

std::vector<std::size_t> default_checkpoints(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t decade = 100; decade < n; decade *= 10)
    for (std::size_t m : {1, 2, 5})
      if (decade * m < n) out.push_back(decade * m);
  return out;
}

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + where + (where.empty() ? "" : ".") + it.key() + "'");
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("'" + key + "' must be finite");
  return d;
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("'" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("'" + key + "' must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
  return v.get<std::string>();
}

std::array<double, 2> by_sex(const json& v, const std::string& key) {
  reject_unknown(v, key, {"male", "female"});
  if (!v.contains("male") || !v.contains("female")) throw ConfigError("'" + key + "' needs male and female values");
  return {get_number(v["female"], key + ".female"), get_number(v["male"], key + ".male")};
}

void parse_pbpk(const json& p, RunConfig& c) {
  reject_unknown(p, "pbpk",
                 {"co_mean_l_per_min", "dose_mg", "t_end_h", "rtol", "atol", "ode_method", "conserve_liver_flow",
                  "log_dvow_intercept"});
  auto& s = c.pbpk;
  if (p.contains("co_mean_l_per_min")) s.population.co_mean_l_per_min = by_sex(p["co_mean_l_per_min"], "pbpk.co_mean_l_per_min");
  if (p.contains("dose_mg")) s.dose_mg = get_number(p["dose_mg"], "pbpk.dose_mg");
  if (p.contains("t_end_h")) s.t_end = get_number(p["t_end_h"], "pbpk.t_end_h");
  if (p.contains("rtol")) s.ode.rtol = get_number(p["rtol"], "pbpk.rtol");
  if (p.contains("atol")) s.ode.atol = get_number(p["atol"], "pbpk.atol");
  if (p.contains("ode_method")) s.ode.method = parse_ode_method(get_string(p["ode_method"], "pbpk.ode_method"));
  if (p.contains("conserve_liver_flow"))
    s.system.conserve_liver_flow = get_bool(p["conserve_liver_flow"], "pbpk.conserve_liver_flow");
  if (p.contains("log_dvow_intercept"))
    s.drug.log_dvow_intercept = get_number(p["log_dvow_intercept"], "pbpk.log_dvow_intercept");
  if (!(s.dose_mg >= 0.0)) throw ConfigError("pbpk.dose_mg must be non-negative");
  if (!(s.t_end > 0.0)) throw ConfigError("pbpk.t_end_h must be positive");
  if (!(s.ode.rtol >= 1e-10 && s.ode.rtol <= 1e-3)) throw ConfigError("pbpk.rtol must lie in [1e-10, 1e-3]");
  if (!(s.ode.atol > 0.0)) throw ConfigError("pbpk.atol must be positive");
  pbpk::validate(s.population);
}

void parse_population(const json& p, RunConfig& c) {
  reject_unknown(p, "population", {"subjects", "modes", "grid_points", "widening_bootstrap"});
  auto& s = c.population;
  if (p.contains("subjects")) s.subjects = get_count(p["subjects"], "population.subjects");
  if (p.contains("grid_points")) s.grid_points = get_count(p["grid_points"], "population.grid_points");
  if (p.contains("widening_bootstrap"))
    s.widening_bootstrap = get_count(p["widening_bootstrap"], "population.widening_bootstrap");
  if (p.contains("modes")) {
    const json& m = p["modes"];
    if (!m.is_array() || m.empty()) throw ConfigError("population.modes must be a non-empty list");
    s.modes.clear();
    for (const auto& e : m) {
      const auto mode = pbpk::parse_input_mode(get_string(e, "population.modes"));
      for (auto seen : s.modes)
        if (seen == mode) throw ConfigError("population.modes lists '" + pbpk::to_string(mode) + "' twice");
      s.modes.push_back(mode);
    }
  }
  if (s.subjects < 2) throw ConfigError("population.subjects must be at least 2");
  if (s.grid_points < 2) throw ConfigError("population.grid_points must be at least 2");
  if (s.widening_bootstrap != 0 && s.widening_bootstrap < 100)
    throw ConfigError("population.widening_bootstrap must be 0 or at least 100");
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "",
                 {"model", "methods", "rho", "n", "bootstrap", "seed", "threads", "output_dir", "sampling",
                  "kucherenko_checkpoints", "record_wall_time", "pbpk", "population"});
  RunConfig c;
  if (!j.contains("model")) throw ConfigError("'model' is required");
  c.model = get_string(j["model"], "model");
  if (c.model != "model1" && c.model != "model2" && c.model != "model3" && c.model != "pbpk_mdz")
    throw ConfigError("'model' must be one of model1, model2, model3, pbpk_mdz");

  if (j.contains("methods")) {
    const json& m = j["methods"];
    if (!m.is_array() || m.empty()) throw ConfigError("'methods' must be a non-empty list");
    for (const auto& e : m) {
      const Method method = parse_method(get_string(e, "methods"));
      for (auto seen : c.methods)
        if (seen == method) throw ConfigError("method '" + to_string(method) + "' is listed twice");
      c.methods.push_back(method);
    }
  } else {
    c.methods = {Method::sobol_independent, Method::sobol_grouped, Method::kucherenko, Method::latent};
  }

  if (j.contains("rho")) {
    const json& r = j["rho"];
    if (r.is_array()) {
      if (r.empty()) throw ConfigError("'rho' list must not be empty");
      for (const auto& e : r) c.rho.push_back(get_number(e, "rho"));
    } else {
      c.rho.push_back(get_number(r, "rho"));
    }
    for (double v : c.rho)
      if (!(std::fabs(v) < 1.0)) throw ConfigError("every rho must lie in (-1, 1)");
  }

  if (j.contains("n")) c.n = get_count(j["n"], "n");
  if (c.n < 100) throw ConfigError("'n' must be at least 100");
  if (j.contains("bootstrap")) c.bootstrap = get_count(j["bootstrap"], "bootstrap");
  if (c.bootstrap != 0 && c.bootstrap < 100) throw ConfigError("'bootstrap' must be 0 or at least 100");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      throw ConfigError("'seed' must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("threads")) c.threads = static_cast<unsigned>(get_count(j["threads"], "threads"));
  if (j.contains("output_dir")) c.output_dir = get_string(j["output_dir"], "output_dir");
  if (j.contains("sampling")) {
    const std::string s = get_string(j["sampling"], "sampling");
    if (s == "pseudo_random")
      c.sampling = SamplingScheme::pseudo_random;
    else if (s == "sobol_sequence")
      c.sampling = SamplingScheme::sobol_sequence;
    else
      throw ConfigError("'sampling' must be pseudo_random or sobol_sequence");
  }
  if (j.contains("kucherenko_checkpoints")) {
    const json& k = j["kucherenko_checkpoints"];
    if (!k.is_array()) throw ConfigError("'kucherenko_checkpoints' must be a list");
    for (const auto& e : k) {
      const std::size_t m = get_count(e, "kucherenko_checkpoints");
      if (m < 2 || m > c.n) throw ConfigError("kucherenko checkpoints must lie in [2, n]");
      c.checkpoints.push_back(m);
    }
  } else {
    c.checkpoints = default_checkpoints(c.n);
  }
  for (auto m : c.methods)
    if (m == Method::kucherenko && c.n < 1000) throw ConfigError("the kucherenko method requires n >= 1000");
  if (j.contains("record_wall_time")) c.record_wall_time = get_bool(j["record_wall_time"], "record_wall_time");

  if (j.contains("pbpk")) {
    if (!c.is_pbpk()) throw ConfigError("'pbpk' settings are only valid for model pbpk_mdz");
    parse_pbpk(j["pbpk"], c);
  }
  if (j.contains("population")) {
    if (!c.is_pbpk()) throw ConfigError("'population' settings are only valid for model pbpk_mdz");
    parse_population(j["population"], c);
  }
  if (c.is_pbpk() && !c.rho.empty()) {
    if (c.rho.size() != 1) throw ConfigError("pbpk_mdz takes a single rho");
    c.pbpk.population.rho = c.rho.front();
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string resolve_output_dir(const RunConfig& config) {
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* env = std::getenv("LVGSA_OUTPUT_DIR"); env && *env) return env;
  return "lvgsa_out";
}

}  // namespace lvgsa
