#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lvgsa/ode.hpp"
#include "lvgsa/problem.hpp"
#include "lvgsa/sampling.hpp"

// Whole-body midazolam PBPK model. Units throughout: amounts mg, volumes L,
// flows L/h, time h, concentrations mg/L.
namespace lvgsa::pbpk {

enum class Sex { female = 0, male = 1 };

/// Tissue compartments in state-vector order.
enum Organ : std::size_t {
  adipose,
  bone,
  brain,
  heart,
  muscle,
  skin,
  spleen,
  kidney,
  gonads,
  lung,
  stomach,
  small_intestine,
  large_intestine,
  liver,
  pancreas,
  organ_count
};

const std::array<const char*, organ_count>& organ_names();

/// Organs whose venous outflow drains into the liver.
bool is_splanchnic(std::size_t organ);

/// State layout: 15 tissues, arterial, venous, then cumulative metabolized
/// amounts for CYP3A4 and CYP3A5.
inline constexpr std::size_t kArterial = organ_count;
inline constexpr std::size_t kVenous = organ_count + 1;
inline constexpr std::size_t kMet3A4 = organ_count + 2;
inline constexpr std::size_t kMet3A5 = organ_count + 3;
inline constexpr std::size_t kStateSize = organ_count + 4;

struct Composition {
  double f_nl = 0.0;
  double f_ph = 0.0;
  double f_w = 0.0;
};

struct TissueRow {
  std::string organ;
  Composition composition;
  double density = 1.0;
  /// Indexed by Sex.
  std::array<double, 2> weight_fraction{};
  std::array<double, 2> flow_fraction{};
};

struct TissueTable {
  /// Exactly organ_count rows, in Organ order.
  std::vector<TissueRow> organs;
  Composition plasma;
  /// Blood weight as a fraction of body weight, by sex.
  std::array<double, 2> blood_fraction{};
  double blood_density = 1.0;
  /// Shares of total blood weight in the arterial and venous compartments.
  double arterial_share = 0.06;
  double venous_share = 0.18;
};

/// Parses the delimiter-separated tissue table. Lines starting with '#' are
/// comments. Throws ConfigError on a malformed table or a wrong organ set.
TissueTable parse_tissue_table(std::string_view csv);
/// The tissue table shipped with the library.
const TissueTable& default_tissue_table();

struct MichaelisMenten {
  std::string enzyme;
  std::string metabolite;
  /// pmol/min/(pmol CYP)
  double vmax = 0.0;
  /// uM
  double km = 0.0;
};

struct DrugParams {
  double molecular_weight = 0.0;
  double log_pow = 0.0;
  double b_to_p = 1.0;
  double fu_p = 1.0;
  /// (3A4, 1-OH), (3A4, 4-OH), (3A5, 1-OH), (3A5, 4-OH)
  std::array<MichaelisMenten, 4> reactions;
  /// log Dvow = intercept + 1.115 * log Pow. Zero by default.
  double log_dvow_intercept = 0.0;
};

DrugParams parse_drug_table(std::string_view csv);
const DrugParams& midazolam();

double fu_tissue(const DrugParams& drug);
double dvow(const DrugParams& drug);
/// Berezhkovskiy tissue:plasma partition coefficient.
double partition_coefficient(const DrugParams& drug, const Composition& tissue, const Composition& plasma);

/// In-vivo maximal rate in mg/h from an in-vitro rate in pmol/min/(pmol CYP),
/// abundance in pmol CYP/mg MP, MPPGL in mg MP/g liver and liver weight in g.
double vmax_invivo(double vmax_invitro, double cyp_abundance, double mppgl, double liver_weight_g, double mw);
/// uM to mg/L.
double km_mg_per_l(double km_um, double mw);

struct PopulationConfig {
  /// Indexed by Sex.
  std::array<double, 2> height_mean{163.3, 176.7};
  std::array<double, 2> height_sd{5.85, 6.15};
  /// Not given numerically in the source model; overridable.
  std::array<double, 2> co_mean_l_per_min{4.9, 5.6};
  double bmi_lo = 18.5;
  double bmi_hi = 24.9;
  double mppgl_mean = 39.79;
  double mppgl_cv = 0.27;
  double cyp3a4_mean = 137.0;
  double cyp3a4_cv = 0.41;
  double cyp3a5_mean = 103.0;
  double cyp3a5_cv = 0.65;
  /// Correlation of log CYP3A4 and log CYP3A5 abundances.
  double rho = 0.52;
};

void validate(const PopulationConfig& config);

/// The sampled characteristics of one subject.
struct Covariates {
  Sex sex = Sex::male;
  double height_cm = 0.0;
  double bmi = 0.0;
  double mppgl = 0.0;
  double cyp3a4 = 0.0;
  double cyp3a5 = 0.0;
};

struct Individual {
  Covariates covariates;
  double body_weight = 0.0;
  /// L/h
  double cardiac_output = 0.0;
  std::array<double, organ_count> volume{};
  /// Arterial inflow per organ; the lung carries the full cardiac output.
  std::array<double, organ_count> flow{};
  double arterial_volume = 0.0;
  double venous_volume = 0.0;
  double liver_weight_g = 0.0;
};

/// Builds physiology from covariates. Non-lung flow fractions are rescaled
/// per sex so that they sum to one.
Individual make_individual(const Covariates& c, const PopulationConfig& config = {},
                           const TissueTable& tissues = default_tissue_table());

enum class InputMode { independent, correlated, latent };
InputMode parse_input_mode(std::string_view name);
std::string to_string(InputMode mode);

/// Number of GSA coordinates consumed by gsa_input_map.
std::size_t coordinate_count(InputMode mode);

/// u[0] is a uniform sex coordinate (female below 0.5); the remaining entries
/// are independent standard normals: height, BMI, MPPGL, then for
/// independent/correlated modes the CYP3A4 and CYP3A5 coordinates, and for
/// latent mode eps_CYP3A4, eps_CYP3A5 (unit variance, rescaled here) and eta.
Covariates gsa_input_map(std::span<const double> u, InputMode mode, const PopulationConfig& config = {});

/// Covariates from six marginally standard-normal coordinates (sex, height,
/// BMI, MPPGL, CYP3A4, CYP3A5) where the CYP pair may already be correlated.
Covariates covariates_from_standard(std::span<const double> x, const PopulationConfig& config = {});

/// One subject drawn from the population in the given mode.
Individual generate_individual(RandomStream& stream, const PopulationConfig& config = {},
                               InputMode mode = InputMode::independent,
                               const TissueTable& tissues = default_tissue_table());

struct SystemOptions {
  /// Liver outflow equals hepatic-artery plus splanchnic flow, which keeps the
  /// venous return equal to cardiac output. When false the outflow is the
  /// hepatic-artery flow only.
  bool conserve_liver_flow = true;
};

class PBPKSystem {
 public:
  PBPKSystem(const Individual& individual, const DrugParams& drug, double dose_mg,
             const TissueTable& tissues = default_tissue_table(), SystemOptions options = {});

  void rhs(std::span<const double> y, std::span<double> dydt) const;
  std::vector<double> initial_state() const;
  /// Venous plasma concentration, mg/L.
  double plasma_concentration(std::span<const double> y) const;

  /// Hepatic metabolic fluxes (3A4, 3A5) in mg/h.
  std::array<double, 2> metabolism(double x_liver) const;

  const Individual& individual() const { return ind_; }
  double dose() const { return dose_; }
  const std::array<double, organ_count>& partition() const { return kp_; }
  /// In-vivo Vmax (mg/h) and KM (mg/L), in the DrugParams reaction order.
  const std::array<double, 4>& vmax() const { return vmax_; }
  const std::array<double, 4>& km() const { return km_; }
  double liver_outflow() const { return liver_out_; }
  /// Sum of flows entering the venous compartment.
  double venous_return() const;

 private:
  Individual ind_;
  double dose_;
  double bp_;
  double fu_t_;
  SystemOptions options_;
  std::array<double, organ_count> kp_{};
  /// Q_t * B:P / (V_t * P_t): outflow rate constant per organ, 1/h times L/h.
  std::array<double, organ_count> out_coef_{};
  std::array<double, 4> vmax_{};
  std::array<double, 4> km_{};
  double liver_out_ = 0.0;
};

struct OdeSettings {
  double rtol = 1e-8;
  double atol = 1e-10;
  OdeMethod method = OdeMethod::sdirk4;
};

struct SubjectResult {
  Trajectory trajectory;
  double auc = 0.0;
};

/// Integrates one subject over [0, t_end] with the AUC as an augmented state.
SubjectResult simulate_subject(const PBPKSystem& system, double t_end = 168.0, const OdeSettings& ode = {},
                               std::vector<double> output_times = {}, bool record_steps = false);

/// Model setup for GSA: AUC as a function of six marginally standard-normal
/// inputs with the CYP pair correlated at config.rho.
struct AucModelSettings {
  PopulationConfig population;
  DrugParams drug = midazolam();
  double dose_mg = 5.0;
  double t_end = 168.0;
  OdeSettings ode;
  SystemOptions system;
};

CorrelatedModel auc_model(const AucModelSettings& settings);

struct PopulationResult {
  InputMode mode = InputMode::independent;
  std::vector<Covariates> subjects;
  std::vector<double> auc;
  /// Plasma concentration grid, one row per subject.
  std::vector<double> times;
  std::vector<double> concentration;
};

struct PopulationRun {
  std::size_t subjects = 100;
  std::uint64_t seed = 0;
  InputMode mode = InputMode::independent;
  std::size_t grid_points = 200;
  unsigned threads = 1;
  AucModelSettings model;
};

/// Subject i uses stream split(i) of the run seed, so the same seed pairs
/// subjects across modes.
PopulationResult simulate_population(const PopulationRun& run);

struct WideningTest {
  double log_auc_variance_correlated = 0.0;
  double log_auc_variance_independent = 0.0;
  /// Share of paired bootstrap resamples in which the correlated variance
  /// does not exceed the independent one.
  double p_value = 1.0;
  std::size_t resamples = 0;
};

/// One-sided paired bootstrap test of var(log AUC) under correlation against
/// no correlation. Both AUC vectors must come from the same subject draws.
WideningTest exposure_widening_test(std::span<const double> auc_correlated, std::span<const double> auc_independent,
                                    std::size_t resamples, RandomStream& stream);

/// Unbiased sample variance of log x.
double log_variance(std::span<const double> x);

}  // namespace lvgsa::pbpk
