#include "lvgsa/runner.hpp"

#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "lvgsa/errors.hpp"
#include "lvgsa/kucherenko.hpp"
#include "lvgsa/models.hpp"
#include "lvgsa/pbpk.hpp"

namespace lvgsa {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string rho_label(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", rho);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

void write_file(const fs::path& path, const std::string& content, RunOutcome& out) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
  out.files.push_back(path.string());
}

fs::path prepare_dir(const RunConfig& config) {
  const fs::path dir = resolve_output_dir(config);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

ordered_json pbpk_assumptions(const RunConfig& c) {
  const auto& s = c.pbpk;
  ordered_json a;
  a["co_mean_l_per_min"] = {{"male", s.population.co_mean_l_per_min[1]},
                            {"female", s.population.co_mean_l_per_min[0]}};
  a["co_mean_note"] = "assumed values; mean cardiac output is not part of the source parameter tables";
  a["cyp_log_correlation"] = s.population.rho;
  a["dose_mg"] = s.dose_mg;
  a["t_end_h"] = s.t_end;
  a["ode_method"] = s.ode.method == OdeMethod::sdirk4 ? "sdirk4" : "dopri5";
  a["rtol"] = s.ode.rtol;
  a["atol"] = s.ode.atol;
  a["conserve_liver_flow"] = s.system.conserve_liver_flow;
  a["log_dvow_intercept"] = s.drug.log_dvow_intercept;
  a["flow_fractions"] = "non-lung fractions rescaled per sex to sum to one";
  return a;
}

ordered_json interval_json(const std::optional<Interval>& i) {
  if (!i) return nullptr;
  return ordered_json::array({i->low, i->high});
}

}  // namespace

std::string report_stem(const std::string& model, Method method, double rho) {
  return model + "_" + to_string(method) + "_rho" + rho_label(rho);
}

CorrelatedModel build_model(const RunConfig& config, double rho) {
  if (config.is_pbpk()) {
    pbpk::AucModelSettings s = config.pbpk;
    s.population.rho = rho;
    return pbpk::auc_model(s);
  }
  return algebraic_model(parse_algebraic_model(config.model), rho);
}

SensitivityReport run_method(const RunConfig& config, Method method, double rho) {
  const CorrelatedModel model = build_model(config, rho);
  SobolOptions so;
  so.n = config.n;
  so.bootstrap = config.bootstrap;
  so.seed = config.seed;
  so.threads = config.threads;
  so.scheme = config.sampling;
  SensitivityReport r;
  switch (method) {
    case Method::sobol_independent:
      so.method = "sobol_independent";
      r = run_sobol(independent_problem(model), so);
      break;
    case Method::sobol_grouped:
      r = estimate_grouped_pair(model, so);
      break;
    case Method::kucherenko: {
      KucherenkoOptions ko;
      ko.n = config.n;
      ko.seed = config.seed;
      ko.threads = config.threads;
      ko.checkpoints = config.checkpoints;
      r = estimate_kucherenko(model, ko);
      break;
    }
    case Method::latent:
      so.method = "latent";
      r = run_sobol(latent_problem(model), so);
      break;
  }
  r.metadata.method = to_string(method);
  r.metadata.model = config.model;
  r.metadata.rho = rho;
  return r;
}

std::string indices_csv(const SensitivityReport& report) {
  std::string s = "factor,main,total,main_ci_low,main_ci_high,total_ci_low,total_ci_high\n";
  for (const auto& f : report.factors) {
    s += f.name + "," + format_number(f.main) + "," + format_number(f.total);
    s += "," + (f.main_ci ? format_number(f.main_ci->low) : std::string());
    s += "," + (f.main_ci ? format_number(f.main_ci->high) : std::string());
    s += "," + (f.total_ci ? format_number(f.total_ci->low) : std::string());
    s += "," + (f.total_ci ? format_number(f.total_ci->high) : std::string());
    s += "\n";
  }
  return s;
}

std::string convergence_csv(const SensitivityReport& report) {
  std::string s = "n,factor,main,total\n";
  for (const auto& c : report.convergence)
    s += std::to_string(c.n) + "," + c.factor + "," + format_number(c.main) + "," + format_number(c.total) + "\n";
  return s;
}

std::string report_json(const SensitivityReport& r, const RunConfig& config, const std::string& stem,
                        const std::vector<std::string>& files, const double* wall_time_s) {
  ordered_json j;
  j["schema_version"] = 1;
  j["status"] = "ok";
  j["report"] = stem;
  j["model"] = r.metadata.model;
  j["method"] = r.metadata.method;
  j["rho"] = r.metadata.rho ? ordered_json(*r.metadata.rho) : ordered_json(nullptr);
  j["n"] = r.metadata.n;
  j["seed"] = r.metadata.seed;
  j["bootstrap"] = r.metadata.bootstrap;
  j["sampling"] = r.metadata.sampling;
  j["evaluations"] = r.metadata.evaluations;
  j["evaluation_formula"] = r.metadata.evaluation_formula;
  j["output"] = {{"mean", r.output_mean}, {"variance", r.output_variance}};
  ordered_json factors = ordered_json::array();
  for (const auto& f : r.factors)
    factors.push_back({{"name", f.name},
                       {"main", f.main},
                       {"total", f.total},
                       {"main_ci", interval_json(f.main_ci)},
                       {"total_ci", interval_json(f.total_ci)}});
  j["factors"] = factors;
  j["files"] = files;
  if (config.is_pbpk()) j["assumptions"] = pbpk_assumptions(config);
  if (wall_time_s) j["wall_time_s"] = *wall_time_s;
  return j.dump(2) + "\n";
}

namespace {

std::string error_json(const RunConfig& config, Method method, double rho, const std::string& stem,
                       const std::string& kind, const std::string& message) {
  ordered_json j;
  j["schema_version"] = 1;
  j["status"] = "error";
  j["report"] = stem;
  j["model"] = config.model;
  j["method"] = to_string(method);
  j["rho"] = rho;
  j["seed"] = config.seed;
  j["error_kind"] = kind;
  j["message"] = message;
  return j.dump(2) + "\n";
}

std::string cell(const FactorIndices* f, bool with_ci, bool total) {
  if (!f) return "-";
  char buf[64];
  const double v = total ? f->total : f->main;
  const auto& ci = total ? f->total_ci : f->main_ci;
  if (with_ci && ci)
    std::snprintf(buf, sizeof buf, "%.2f (%.2f,%.2f)", v, ci->low, ci->high);
  else
    std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Paper-style table: one row per original factor, the latent factor and the
// group; the latent columns show the unique part in the pair rows.
std::string summary_table(const RunConfig& config, double rho,
                          const std::map<Method, SensitivityReport>& reports) {
  const CorrelatedModel model = build_model(config, rho);
  std::vector<std::string> rows = model.factors;
  rows.push_back(model.latent_name);
  rows.push_back(model.group_name);
  const std::vector<Method> order{Method::sobol_independent, Method::kucherenko, Method::latent,
                                  Method::sobol_grouped};

  auto lookup = [&](Method m, std::size_t row) -> const FactorIndices* {
    auto it = reports.find(m);
    if (it == reports.end()) return nullptr;
    const auto& factors = it->second.factors;
    const std::string& name = rows[row];
    if (m == Method::latent) {
      if (row < model.factors.size()) return &factors[row];
      if (row == model.factors.size()) return &factors.back();
      return nullptr;
    }
    for (const auto& f : factors)
      if (f.name == name) return &f;
    return nullptr;
  };

  std::ostringstream os;
  char line[512];
  os << "rho = " << rho_label(rho) << "\n";
  std::snprintf(line, sizeof line, "%-14s", "factor");
  os << line;
  for (Method m : order) {
    std::snprintf(line, sizeof line, " | %-20s %-20s", (to_string(m) + " main").c_str(), "total");
    os << line;
  }
  os << "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bool any = false;
    for (Method m : order) any = any || lookup(m, r) != nullptr;
    if (!any) continue;
    std::string label = rows[r];
    if (r == model.pair_first || r == model.pair_second)
      label += "*";
    std::snprintf(line, sizeof line, "%-14s", label.c_str());
    os << line;
    for (Method m : order) {
      const bool ci = m != Method::kucherenko;
      std::snprintf(line, sizeof line, " | %-20s %-20s", cell(lookup(m, r), ci, false).c_str(),
                    cell(lookup(m, r), ci, true).c_str());
      os << line;
    }
    os << "\n";
  }
  os << "* latent columns in this row refer to the unique part of the factor\n\n";
  return os.str();
}

struct SweepRow {
  double rho;
  Method method;
  const SensitivityReport* report;
};

RunOutcome run_grid(const RunConfig& config, const std::vector<double>& rhos, bool sweep) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  const fs::path dir = prepare_dir(config);
  std::vector<std::pair<std::pair<double, Method>, SensitivityReport>> done;
  done.reserve(rhos.size() * config.methods.size());
  std::size_t failures = 0, attempts = 0;
  std::string summary = "lvgsa summary: model " + config.model + ", n " + std::to_string(config.n) +
                        ", bootstrap " + std::to_string(config.bootstrap) + ", seed " + std::to_string(config.seed) +
                        "\nvalues are main/total indices with (2.5, 97.5) bootstrap percentiles where available\n\n";

  for (double rho : rhos) {
    std::map<Method, SensitivityReport> at_rho;
    for (Method m : config.methods) {
      ++attempts;
      const std::string stem = report_stem(config.model, m, rho);
      const auto t0 = std::chrono::steady_clock::now();
      try {
        SensitivityReport r = run_method(config, m, rho);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::vector<std::string> names{stem + ".csv"};
        if (m == Method::kucherenko) names.push_back(stem + "_convergence.csv");
        write_file(dir / (stem + ".csv"), indices_csv(r), out);
        if (m == Method::kucherenko) write_file(dir / (stem + "_convergence.csv"), convergence_csv(r), out);
        write_file(dir / (stem + ".json"), report_json(r, config, stem, names, config.record_wall_time ? &wall : nullptr),
                   out);
        at_rho.emplace(m, r);
        done.push_back({{rho, m}, std::move(r)});
      } catch (const NumericalError& e) {
        ++failures;
        out.errors.push_back(stem + ": " + e.what());
        write_file(dir / (stem + ".error.json"), error_json(config, m, rho, stem, "numerical", e.what()), out);
      } catch (const std::invalid_argument& e) {
        ++failures;
        out.errors.push_back(stem + ": " + e.what());
        write_file(dir / (stem + ".error.json"), error_json(config, m, rho, stem, "invalid_argument", e.what()), out);
      }
    }
    if (!at_rho.empty()) summary += summary_table(config, rho, at_rho);
  }

  if (sweep) {
    std::string s = "rho,method,factor,index,value,ci_low,ci_high\n";
    for (const auto& [key, r] : done) {
      for (const auto& f : r.factors) {
        for (int t = 0; t < 2; ++t) {
          const auto& ci = t ? f.total_ci : f.main_ci;
          s += format_number(key.first) + "," + to_string(key.second) + "," + f.name + "," + (t ? "total" : "main") +
               "," + format_number(t ? f.total : f.main) + "," + (ci ? format_number(ci->low) : "") + "," +
               (ci ? format_number(ci->high) : "") + "\n";
        }
      }
    }
    write_file(dir / (config.model + "_sweep.csv"), s, out);
  }
  if (!out.errors.empty()) {
    summary += "failed analyses:\n";
    for (const auto& e : out.errors) summary += "  " + e + "\n";
  }
  write_file(dir / (config.model + (sweep ? "_sweep_summary.txt" : "_summary.txt")), summary, out);
  out.summary = summary;
  out.exit_code = failures == 0 ? exit_ok : (failures == attempts ? exit_numerical_failure : exit_partial_failure);
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

RunOutcome run_analyses(const RunConfig& config) {
  std::vector<double> rhos = config.rho;
  if (rhos.empty()) {
    if (!config.is_pbpk()) throw ConfigError("'rho' is required for model " + config.model);
    rhos = {config.pbpk.population.rho};
  }
  return run_grid(config, rhos, false);
}

RunOutcome run_sweep(const RunConfig& config) {
  std::vector<double> rhos = config.rho;
  if (rhos.empty()) rhos = config.is_pbpk() ? std::vector<double>{config.pbpk.population.rho} : default_rho_grid();
  return run_grid(config, rhos, true);
}

RunOutcome run_population(const RunConfig& config) {
  if (!config.is_pbpk()) throw ConfigError("population simulation requires model pbpk_mdz");
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  const fs::path dir = prepare_dir(config);
  const auto& ps = config.population;

  std::map<pbpk::InputMode, pbpk::PopulationResult> results;
  std::string summary_csv = "mode,subjects,auc_mean,auc_median,auc_p2_5,auc_p97_5,log_auc_variance\n";
  std::ostringstream text;
  text << "lvgsa population summary: " << ps.subjects << " subjects, seed " << config.seed << ", dose "
       << format_number(config.pbpk.dose_mg) << " mg, t_end " << format_number(config.pbpk.t_end) << " h\n";
  ordered_json modes_json = ordered_json::array();

  for (auto mode : ps.modes) {
    pbpk::PopulationRun run;
    run.subjects = ps.subjects;
    run.seed = config.seed;
    run.mode = mode;
    run.grid_points = ps.grid_points;
    run.threads = config.threads;
    run.model = config.pbpk;
    const std::string stem = "pbpk_mdz_population_" + pbpk::to_string(mode);
    try {
      pbpk::PopulationResult r = pbpk::simulate_population(run);
      std::string auc = "subject,sex,height_cm,bmi,mppgl,cyp3a4,cyp3a5,auc_mg_h_per_l\n";
      for (std::size_t i = 0; i < r.auc.size(); ++i) {
        const auto& c = r.subjects[i];
        auc += std::to_string(i) + "," + (c.sex == pbpk::Sex::male ? "male" : "female") + "," +
               format_number(c.height_cm) + "," + format_number(c.bmi) + "," + format_number(c.mppgl) + "," +
               format_number(c.cyp3a4) + "," + format_number(c.cyp3a5) + "," + format_number(r.auc[i]) + "\n";
      }
      write_file(dir / (stem + "_auc.csv"), auc, out);

      const std::vector<double> qs{0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975};
      std::string conc = "time_h,mean,p2_5,p5,p25,p50,p75,p95,p97_5\n";
      const std::size_t g = r.times.size();
      for (std::size_t k = 0; k < g; ++k) {
        std::vector<double> column(r.auc.size());
        double mean = 0.0;
        for (std::size_t i = 0; i < column.size(); ++i) {
          column[i] = r.concentration[i * g + k];
          mean += column[i];
        }
        mean /= static_cast<double>(column.size());
        conc += format_number(r.times[k]) + "," + format_number(mean);
        for (double q : qs) conc += "," + format_number(percentile(column, q));
        conc += "\n";
      }
      write_file(dir / (stem + "_concentration.csv"), conc, out);

      double mean = 0.0;
      for (double a : r.auc) mean += a;
      mean /= static_cast<double>(r.auc.size());
      const double lv = pbpk::log_variance(r.auc);
      const double med = percentile(r.auc, 0.5), lo = percentile(r.auc, 0.025), hi = percentile(r.auc, 0.975);
      summary_csv += pbpk::to_string(mode) + "," + std::to_string(r.auc.size()) + "," + format_number(mean) + "," +
                     format_number(med) + "," + format_number(lo) + "," + format_number(hi) + "," +
                     format_number(lv) + "\n";
      char line[256];
      std::snprintf(line, sizeof line, "  %-12s AUC median %.4f (%.4f, %.4f) mg*h/L, var(log AUC) %.4f\n",
                    pbpk::to_string(mode).c_str(), med, lo, hi, lv);
      text << line;
      modes_json.push_back({{"mode", pbpk::to_string(mode)},
                            {"auc_file", stem + "_auc.csv"},
                            {"concentration_file", stem + "_concentration.csv"}});
      results.emplace(mode, std::move(r));
    } catch (const NumericalError& e) {
      out.errors.push_back(stem + ": " + e.what());
    }
  }
  write_file(dir / "pbpk_mdz_population_summary.csv", summary_csv, out);

  ordered_json j;
  j["schema_version"] = 1;
  j["status"] = out.errors.empty() ? "ok" : "error";
  j["model"] = config.model;
  j["seed"] = config.seed;
  j["subjects"] = ps.subjects;
  j["grid_points"] = ps.grid_points;
  j["modes"] = modes_json;
  j["summary_file"] = "pbpk_mdz_population_summary.csv";
  j["assumptions"] = pbpk_assumptions(config);
  if (!out.errors.empty()) j["errors"] = out.errors;

  const auto ind = results.find(pbpk::InputMode::independent);
  auto cor = results.find(pbpk::InputMode::correlated);
  if (cor == results.end()) cor = results.find(pbpk::InputMode::latent);
  if (ps.widening_bootstrap > 0 && ind != results.end() && cor != results.end()) {
    RandomStream stream = RandomStream(config.seed, 0).split(0x57494445u);
    const auto t = pbpk::exposure_widening_test(cor->second.auc, ind->second.auc, ps.widening_bootstrap, stream);
    j["widening_test"] = {{"correlated_mode", pbpk::to_string(cor->first)},
                          {"log_auc_variance_correlated", t.log_auc_variance_correlated},
                          {"log_auc_variance_independent", t.log_auc_variance_independent},
                          {"resamples", t.resamples},
                          {"p_value", t.p_value}};
    char line[256];
    std::snprintf(line, sizeof line,
                  "  widening test: var(log AUC) %.4f (%s) vs %.4f (independent), one-sided bootstrap p = %.4f\n",
                  t.log_auc_variance_correlated, pbpk::to_string(cor->first).c_str(), t.log_auc_variance_independent,
                  t.p_value);
    text << line;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (config.record_wall_time) j["wall_time_s"] = wall;
  write_file(dir / "pbpk_mdz_population.json", j.dump(2) + "\n", out);
  if (!out.errors.empty()) {
    text << "failed modes:\n";
    for (const auto& e : out.errors) text << "  " << e << "\n";
  }
  write_file(dir / "pbpk_mdz_population_summary.txt", text.str(), out);
  out.summary = text.str();
  out.exit_code = out.errors.empty() ? exit_ok
                                     : (out.errors.size() == ps.modes.size() ? exit_numerical_failure
                                                                              : exit_partial_failure);
  out.wall_time_s = wall;
  return out;
}

}  // namespace lvgsa
