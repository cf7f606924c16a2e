#include "lvgsa/pbpk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "lvgsa/errors.hpp"
#include "lvgsa/latent.hpp"
#include "lvgsa/parallel.hpp"

namespace lvgsa::pbpk {

namespace data {
extern const char* const kTissueCsv;
extern const char* const kDrugCsv;
}  // namespace data

const std::array<const char*, organ_count>& organ_names() {
  static const std::array<const char*, organ_count> names{
      "adipose", "bone",    "brain",           "heart",           "muscle",
      "skin",    "spleen",  "kidney",          "gonads",          "lung",
      "stomach", "small_intestine", "large_intestine", "liver",   "pancreas"};
  return names;
}

bool is_splanchnic(std::size_t organ) {
  return organ == spleen || organ == stomach || organ == small_intestine || organ == large_intestine ||
         organ == pancreas;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Header plus data rows; comment and blank lines dropped.
std::vector<std::vector<std::string>> read_rows(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(csv)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#')
      continue;
    rows.push_back(split_fields(line));
  }
  return rows;
}

double number(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number '" + s + "' for " + what);
  }
}

}  // namespace

TissueTable parse_tissue_table(std::string_view csv) {
  static const std::vector<std::string> header{"organ",  "f_nl",    "f_ph",    "f_w",    "density",
                                               "wfrac_m", "wfrac_f", "qfrac_m", "qfrac_f"};
  const auto rows = read_rows(csv);
  if (rows.empty() || rows.front() != header)
    throw ConfigError("tissue table header must be: organ,f_nl,f_ph,f_w,density,wfrac_m,wfrac_f,qfrac_m,qfrac_f");

  std::map<std::string, std::vector<std::string>> by_organ;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw ConfigError("tissue table row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                        " fields");
    if (!by_organ.emplace(rows[r][0], rows[r]).second)
      throw ConfigError("duplicate organ '" + rows[r][0] + "' in tissue table");
  }

  TissueTable t;
  auto fraction = [](const std::string& s, const std::string& what) {
    const double v = number(s, what);
    if (v < 0.0 || v > 1.0) throw ConfigError(what + " must lie in [0, 1]");
    return v;
  };
  for (std::size_t o = 0; o < organ_count; ++o) {
    const std::string name = organ_names()[o];
    auto it = by_organ.find(name);
    if (it == by_organ.end()) throw ConfigError("tissue table is missing organ '" + name + "'");
    const auto& f = it->second;
    TissueRow row;
    row.organ = name;
    row.composition = {fraction(f[1], name + " f_nl"), fraction(f[2], name + " f_ph"), fraction(f[3], name + " f_w")};
    row.density = number(f[4], name + " density");
    if (row.density < 0.9 || row.density > 1.5) throw ConfigError(name + " density must lie in [0.9, 1.5]");
    row.weight_fraction = {fraction(f[6], name + " wfrac_f"), fraction(f[5], name + " wfrac_m")};
    row.flow_fraction = {fraction(f[8], name + " qfrac_f"), fraction(f[7], name + " qfrac_m")};
    t.organs.push_back(row);
    by_organ.erase(it);
  }
  auto plasma = by_organ.find("plasma");
  if (plasma == by_organ.end()) throw ConfigError("tissue table is missing the plasma row");
  t.plasma = {fraction(plasma->second[1], "plasma f_nl"), fraction(plasma->second[2], "plasma f_ph"),
              fraction(plasma->second[3], "plasma f_w")};
  by_organ.erase(plasma);
  auto blood = by_organ.find("blood");
  if (blood == by_organ.end()) throw ConfigError("tissue table is missing the blood row");
  t.blood_density = number(blood->second[4], "blood density");
  t.blood_fraction = {fraction(blood->second[6], "blood wfrac_f"), fraction(blood->second[5], "blood wfrac_m")};
  by_organ.erase(blood);
  if (!by_organ.empty()) throw ConfigError("unknown organ '" + by_organ.begin()->first + "' in tissue table");
  return t;
}

const TissueTable& default_tissue_table() {
  static const TissueTable table = parse_tissue_table(data::kTissueCsv);
  return table;
}

DrugParams parse_drug_table(std::string_view csv) {
  const auto rows = read_rows(csv);
  if (rows.empty() || rows.front() != std::vector<std::string>{"parameter", "value", "unit"})
    throw ConfigError("drug table header must be: parameter,value,unit");
  std::map<std::string, double> values;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3) throw ConfigError("drug table row " + std::to_string(r) + " must have 3 fields");
    const double v = number(rows[r][1], rows[r][0]);
    if (!(v > 0.0)) throw ConfigError("drug parameter " + rows[r][0] + " must be positive");
    if (!values.emplace(rows[r][0], v).second) throw ConfigError("duplicate drug parameter " + rows[r][0]);
  }
  auto take = [&](const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("drug table is missing '" + key + "'");
    const double v = it->second;
    values.erase(it);
    return v;
  };
  DrugParams d;
  d.molecular_weight = take("molecular_weight");
  d.log_pow = take("log_pow");
  d.b_to_p = take("b_to_p");
  d.fu_p = take("fu_p");
  if (d.fu_p > 1.0) throw ConfigError("fu_p must not exceed 1");
  const std::array<std::pair<const char*, const char*>, 4> keys{
      {{"CYP3A4", "1OH"}, {"CYP3A4", "4OH"}, {"CYP3A5", "1OH"}, {"CYP3A5", "4OH"}}};
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string suffix = std::string(keys[i].first) + "_" + keys[i].second;
    d.reactions[i] = {keys[i].first, keys[i].second, take("vmax_" + suffix), take("km_" + suffix)};
  }
  if (!values.empty()) throw ConfigError("unknown drug parameter '" + values.begin()->first + "'");
  return d;
}

const DrugParams& midazolam() {
  static const DrugParams drug = parse_drug_table(data::kDrugCsv);
  return drug;
}

double fu_tissue(const DrugParams& drug) { return 1.0 / (1.0 + 0.5 * (1.0 - drug.fu_p) / drug.fu_p); }

double dvow(const DrugParams& drug) {
  return std::pow(10.0, drug.log_dvow_intercept + 1.115 * drug.log_pow);
}

double partition_coefficient(const DrugParams& drug, const Composition& t, const Composition& p) {
  const double d = dvow(drug);
  const double num = d * (t.f_nl + 0.3 * t.f_ph) + (t.f_w / fu_tissue(drug) + 0.7 * t.f_ph);
  const double den = d * (p.f_nl + 0.3 * p.f_ph) + (p.f_w / drug.fu_p + 0.7 * p.f_ph);
  return num / den;
}

double vmax_invivo(double vmax_invitro, double cyp_abundance, double mppgl, double liver_weight_g, double mw) {
  // pmol/min -> mg/h
  return vmax_invitro * cyp_abundance * mppgl * liver_weight_g * 60.0 * mw * 1e-9;
}

double km_mg_per_l(double km_um, double mw) { return km_um * mw / 1000.0; }

void validate(const PopulationConfig& c) {
  for (int s = 0; s < 2; ++s) {
    if (!(c.height_mean[s] > 0.0 && c.height_sd[s] > 0.0))
      throw ConfigError("height mean and sd must be positive");
    if (!(c.co_mean_l_per_min[s] > 0.0)) throw ConfigError("mean cardiac output must be positive");
  }
  if (!(c.bmi_lo > 0.0 && c.bmi_lo < c.bmi_hi)) throw ConfigError("BMI range must satisfy 0 < lo < hi");
  for (double v : {c.mppgl_mean, c.mppgl_cv, c.cyp3a4_mean, c.cyp3a4_cv, c.cyp3a5_mean, c.cyp3a5_cv})
    if (!(v > 0.0)) throw ConfigError("lognormal means and CVs must be positive");
  if (!(std::fabs(c.rho) < 1.0)) throw ConfigError("CYP correlation must lie in (-1, 1)");
}

Individual make_individual(const Covariates& c, const PopulationConfig& config, const TissueTable& tissues) {
  if (tissues.organs.size() != organ_count) throw std::invalid_argument("tissue table must list every organ");
  if (!(c.height_cm > 0.0 && c.bmi > 0.0 && c.mppgl >= 0.0 && c.cyp3a4 >= 0.0 && c.cyp3a5 >= 0.0))
    throw std::invalid_argument("covariates must be positive");
  const auto s = static_cast<std::size_t>(c.sex);
  Individual ind;
  ind.covariates = c;
  const double h = c.height_cm / 100.0;
  ind.body_weight = c.bmi * h * h;
  ind.cardiac_output =
      std::pow(c.height_cm / config.height_mean[s], 0.75) * config.co_mean_l_per_min[s] * 60.0;

  double flow_sum = 0.0;
  for (std::size_t o = 0; o < organ_count; ++o)
    if (o != lung) flow_sum += tissues.organs[o].flow_fraction[s];
  for (std::size_t o = 0; o < organ_count; ++o) {
    const TissueRow& row = tissues.organs[o];
    const double weight = row.weight_fraction[s] * ind.body_weight;
    ind.volume[o] = weight / row.density;
    ind.flow[o] = o == lung ? ind.cardiac_output : ind.cardiac_output * row.flow_fraction[s] / flow_sum;
  }
  ind.liver_weight_g = tissues.organs[liver].weight_fraction[s] * ind.body_weight * 1000.0;
  const double blood_volume = tissues.blood_fraction[s] * ind.body_weight / tissues.blood_density;
  ind.arterial_volume = tissues.arterial_share * blood_volume;
  ind.venous_volume = tissues.venous_share * blood_volume;
  return ind;
}

InputMode parse_input_mode(std::string_view name) {
  if (name == "independent") return InputMode::independent;
  if (name == "correlated") return InputMode::correlated;
  if (name == "latent") return InputMode::latent;
  throw ConfigError("unknown input mode '" + std::string(name) + "'");
}

std::string to_string(InputMode mode) {
  switch (mode) {
    case InputMode::independent: return "independent";
    case InputMode::correlated: return "correlated";
    case InputMode::latent: return "latent";
  }
  return "unknown";
}

std::size_t coordinate_count(InputMode mode) { return mode == InputMode::latent ? 7 : 6; }

namespace {

Covariates map_covariates(double sex_u, double z_height, double z_bmi, double z_mppgl, double x_3a4,
                          double x_3a5, const PopulationConfig& config) {
  Covariates c;
  c.sex = sex_u < 0.5 ? Sex::female : Sex::male;
  const auto s = static_cast<std::size_t>(c.sex);
  c.height_cm = to_marginal(z_height, NormalMarginal{config.height_mean[s], config.height_sd[s]});
  c.bmi = to_marginal(z_bmi, UniformMarginal{config.bmi_lo, config.bmi_hi});
  c.mppgl = to_marginal(z_mppgl, lognormal_from_mean_cv(config.mppgl_mean, config.mppgl_cv));
  c.cyp3a4 = to_marginal(x_3a4, lognormal_from_mean_cv(config.cyp3a4_mean, config.cyp3a4_cv));
  c.cyp3a5 = to_marginal(x_3a5, lognormal_from_mean_cv(config.cyp3a5_mean, config.cyp3a5_cv));
  return c;
}

}  // namespace

Covariates gsa_input_map(std::span<const double> u, InputMode mode, const PopulationConfig& config) {
  if (u.size() != coordinate_count(mode))
    throw std::invalid_argument(to_string(mode) + " mode takes " + std::to_string(coordinate_count(mode)) +
                                " coordinates");
  double x4 = u[4], x5 = u[5];
  switch (mode) {
    case InputMode::independent: break;
    case InputMode::correlated:
      x5 = config.rho * u[4] + std::sqrt(1.0 - config.rho * config.rho) * u[5];
      break;
    case InputMode::latent: {
      const auto pair = reconstruct_pair_standard(u[6], u[4], u[5], decompose(config.rho));
      x4 = pair.first;
      x5 = pair.second;
      break;
    }
  }
  return map_covariates(u[0], u[1], u[2], u[3], x4, x5, config);
}

Covariates covariates_from_standard(std::span<const double> x, const PopulationConfig& config) {
  if (x.size() != 6) throw std::invalid_argument("six standard-normal coordinates are required");
  return map_covariates(normal_cdf(x[0]), x[1], x[2], x[3], x[4], x[5], config);
}

Individual generate_individual(RandomStream& stream, const PopulationConfig& config, InputMode mode,
                               const TissueTable& tissues) {
  // Draw all seven coordinates regardless of mode so subjects pair across modes.
  std::array<double, 7> u{};
  u[0] = stream.uniform();
  for (std::size_t i = 1; i < u.size(); ++i) u[i] = stream.normal();
  const auto c = gsa_input_map(std::span<const double>(u.data(), coordinate_count(mode)), mode, config);
  return make_individual(c, config, tissues);
}

PBPKSystem::PBPKSystem(const Individual& individual, const DrugParams& drug, double dose_mg,
                       const TissueTable& tissues, SystemOptions options)
    : ind_(individual), dose_(dose_mg), bp_(drug.b_to_p), fu_t_(fu_tissue(drug)), options_(options) {
  if (tissues.organs.size() != organ_count) throw std::invalid_argument("inconsistent organ set");
  if (!(dose_mg >= 0.0)) throw std::invalid_argument("dose must be non-negative");
  if (!(ind_.arterial_volume > 0.0 && ind_.venous_volume > 0.0))
    throw std::invalid_argument("blood volumes must be positive");
  for (std::size_t o = 0; o < organ_count; ++o) {
    if (!(ind_.volume[o] > 0.0 && ind_.flow[o] > 0.0))
      throw std::invalid_argument("organ volumes and flows must be positive");
    kp_[o] = partition_coefficient(drug, tissues.organs[o].composition, tissues.plasma);
  }
  liver_out_ = ind_.flow[liver];
  if (options_.conserve_liver_flow)
    for (std::size_t o = 0; o < organ_count; ++o)
      if (is_splanchnic(o)) liver_out_ += ind_.flow[o];
  for (std::size_t o = 0; o < organ_count; ++o) {
    const double q = o == liver ? liver_out_ : ind_.flow[o];
    out_coef_[o] = q * bp_ / (ind_.volume[o] * kp_[o]);
  }
  const Covariates& c = ind_.covariates;
  for (std::size_t r = 0; r < 4; ++r) {
    const double cyp = r < 2 ? c.cyp3a4 : c.cyp3a5;
    vmax_[r] = vmax_invivo(drug.reactions[r].vmax, cyp, c.mppgl, ind_.liver_weight_g, drug.molecular_weight);
    km_[r] = km_mg_per_l(drug.reactions[r].km, drug.molecular_weight);
  }
}

std::array<double, 2> PBPKSystem::metabolism(double x_liver) const {
  const double cu = x_liver * fu_t_ / ind_.volume[liver];
  return {vmax_[0] * cu / (km_[0] + cu) + vmax_[1] * cu / (km_[1] + cu),
          vmax_[2] * cu / (km_[2] + cu) + vmax_[3] * cu / (km_[3] + cu)};
}

void PBPKSystem::rhs(std::span<const double> y, std::span<double> dy) const {
  const double c_art = y[kArterial] / ind_.arterial_volume;
  const double c_ven = y[kVenous] / ind_.venous_volume;
  const double co = ind_.cardiac_output;
  double venous_in = 0.0, splanchnic_out = 0.0;
  for (std::size_t o = 0; o < organ_count; ++o) {
    if (o == lung || o == liver) continue;
    const double out = out_coef_[o] * y[o];
    dy[o] = ind_.flow[o] * c_art - out;
    if (is_splanchnic(o))
      splanchnic_out += out;
    else
      venous_in += out;
  }
  const auto met = metabolism(y[liver]);
  const double liver_out = out_coef_[liver] * y[liver];
  dy[liver] = ind_.flow[liver] * c_art + splanchnic_out - liver_out - met[0] - met[1];
  venous_in += liver_out;

  const double lung_out = out_coef_[lung] * y[lung];
  dy[lung] = co * c_ven - lung_out;
  dy[kArterial] = lung_out - co * c_art;
  dy[kVenous] = venous_in - co * c_ven;
  dy[kMet3A4] = met[0];
  dy[kMet3A5] = met[1];
}

std::vector<double> PBPKSystem::initial_state() const {
  std::vector<double> y(kStateSize, 0.0);
  y[kVenous] = dose_;
  return y;
}

double PBPKSystem::plasma_concentration(std::span<const double> y) const {
  return y[kVenous] / (ind_.venous_volume * bp_);
}

double PBPKSystem::venous_return() const {
  double q = liver_out_;
  for (std::size_t o = 0; o < organ_count; ++o)
    if (o != lung && o != liver && !is_splanchnic(o)) q += ind_.flow[o];
  return q;
}

SubjectResult simulate_subject(const PBPKSystem& system, double t_end, const OdeSettings& ode,
                               std::vector<double> output_times, bool record_steps) {
  OdeProblem p;
  p.dimension = kStateSize;
  p.rhs = [&system](double, std::span<const double> y, std::span<double> dy) { system.rhs(y, dy); };
  p.y0 = system.initial_state();
  p.t_end = t_end;
  p.rtol = ode.rtol;
  p.atol = ode.atol;
  p.method = ode.method;
  p.output_times = std::move(output_times);
  p.record_steps = record_steps;
  if (system.dose() == 0.0) {
    // Nothing to integrate; the solution is identically zero.
    SubjectResult r;
    r.trajectory.dimension = kStateSize + 1;
    std::vector<double> times{0.0};
    for (double t : p.output_times)
      if (t > 0.0 && t < t_end) times.push_back(t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    times.push_back(t_end);
    r.trajectory.times = times;
    r.trajectory.states.assign(times.size() * (kStateSize + 1), 0.0);
    return r;
  }
  AucResult a = auc_augmented(p, [&system](std::span<const double> y) { return system.plasma_concentration(y); });
  return {std::move(a.trajectory), a.auc};
}

CorrelatedModel auc_model(const AucModelSettings& settings) {
  validate(settings.population);
  CorrelatedModel m;
  m.name = "pbpk_mdz";
  m.factors = {"sex", "height", "BMI", "MPPGL", "CYP3A4", "CYP3A5"};
  m.evaluate = [settings](std::span<const double> x) {
    const Individual ind = make_individual(covariates_from_standard(x, settings.population), settings.population);
    const PBPKSystem sys(ind, settings.drug, settings.dose_mg, default_tissue_table(), settings.system);
    return simulate_subject(sys, settings.t_end, settings.ode).auc;
  };
  m.pair_first = 4;
  m.pair_second = 5;
  m.rho = settings.population.rho;
  m.unique_first_name = "eps_CYP3A4";
  m.unique_second_name = "eps_CYP3A5";
  m.latent_name = "eta";
  m.group_name = "CYP3A4+CYP3A5";
  return m;
}

PopulationResult simulate_population(const PopulationRun& run) {
  validate(run.model.population);
  if (run.subjects == 0) throw std::invalid_argument("population size must be positive");
  if (run.grid_points < 2) throw std::invalid_argument("concentration grid needs at least two points");
  PopulationResult out;
  out.mode = run.mode;
  const std::size_t g = run.grid_points;
  for (std::size_t i = 0; i < g; ++i)
    out.times.push_back(run.model.t_end * static_cast<double>(i) / static_cast<double>(g - 1));
  out.subjects.resize(run.subjects);
  out.auc.resize(run.subjects);
  out.concentration.resize(run.subjects * g);

  const RandomStream root(run.seed, 0);
  parallel_for(run.subjects, run.threads, [&](std::size_t i) {
    RandomStream stream = root.split(i);
    const Individual ind = generate_individual(stream, run.model.population, run.mode);
    const PBPKSystem sys(ind, run.model.drug, run.model.dose_mg, default_tissue_table(), run.model.system);
    const SubjectResult r = simulate_subject(sys, run.model.t_end, run.model.ode, out.times, false);
    out.subjects[i] = ind.covariates;
    out.auc[i] = r.auc;
    const auto& tr = r.trajectory;
    for (std::size_t k = 0; k < g; ++k) {
      // Recorded times are exactly the grid times.
      out.concentration[i * g + k] = sys.plasma_concentration(tr.state(k));
    }
  });
  return out;
}

double log_variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("log variance needs at least two values");
  double mean = 0.0;
  for (double v : x) {
    if (!(v > 0.0)) throw std::invalid_argument("log variance needs positive values");
    mean += std::log(v);
  }
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (std::log(v) - mean) * (std::log(v) - mean);
  return ss / static_cast<double>(x.size() - 1);
}

WideningTest exposure_widening_test(std::span<const double> auc_correlated, std::span<const double> auc_independent,
                                    std::size_t resamples, RandomStream& stream) {
  const std::size_t n = auc_correlated.size();
  if (n < 2 || auc_independent.size() != n)
    throw std::invalid_argument("paired AUC samples of equal size (at least two) are required");
  if (resamples < 100) throw std::invalid_argument("at least 100 bootstrap resamples are required");
  WideningTest t;
  t.log_auc_variance_correlated = log_variance(auc_correlated);
  t.log_auc_variance_independent = log_variance(auc_independent);
  t.resamples = resamples;
  std::vector<double> lc(n), li(n), rc(n), ri(n);
  for (std::size_t i = 0; i < n; ++i) {
    lc[i] = std::log(auc_correlated[i]);
    li[i] = std::log(auc_independent[i]);
  }
  auto variance = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
  };
  std::size_t not_wider = 0;
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = static_cast<std::size_t>(stream.uniform() * static_cast<double>(n));
      rc[i] = lc[std::min(r, n - 1)];
      ri[i] = li[std::min(r, n - 1)];
    }
    if (variance(rc) <= variance(ri)) ++not_wider;
  }
  t.p_value = static_cast<double>(not_wider) / static_cast<double>(resamples);
  return t;
}

}  // namespace lvgsa::pbpk
