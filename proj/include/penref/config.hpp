#ifndef PENREF_CONFIG_HPP_
#define PENREF_CONFIG_HPP_
//! \file config.hpp
//! Experiment configuration: strict JSON parsing (unknown keys are fatal),
//! serialization, and construction of the simulation objects it describes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "penref/fields.hpp"
#include "penref/geometry.hpp"
#include "penref/integrator.hpp"
#include "penref/penalty.hpp"
#include "penref/reference.hpp"

namespace penref {

//! Invalid configuration. line() is 1-based, 0 when no position is known.
class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct DomainConfig {
  std::string kind = "half_space";  // half_space | ball | ellipsoid | annulus
  int dimension = 2;                // half_space only; curved shapes use center.size()
  int axis = 1;
  double offset = 0.0;
  std::vector<double> center;
  double radius = 1.0;
  std::vector<double> semi_axes;
  double inner_radius = 1.0;
  double outer_radius = 2.0;
  std::optional<double> tube_radius_hint;

  bool operator==(const DomainConfig&) const = default;
};

struct CoefficientConfig {
  std::string kind = "constant";  // constant | affine
  std::vector<double> drift;
  std::vector<std::vector<double>> drift_matrix;
  std::vector<std::vector<double>> diffusion;
  double sigma_perturbation = 0.0;

  bool operator==(const CoefficientConfig&) const = default;
};

struct ReflectionConfig {
  std::string kind = "normal";  // constant | normal | normal_tangent
  std::vector<double> vector;
  double tangent_coefficient = 0.0;

  bool operator==(const ReflectionConfig&) const = default;
};

struct PenaltyConfig {
  std::string family = "exponential";  // exponential | scaled_bump | projection | constant | none
  std::string profile = "indicator_0_1";
  double a_exponent = 2.0;
  double c_exponent = 1.0;
  double value = 1.0;
  std::optional<std::string> direction;  // reflection | inward_normal
  std::vector<int> n_grid{4, 16, 64, 256};
  std::optional<double> cutoff;

  bool operator==(const PenaltyConfig&) const = default;
};

struct StoppingConfig {
  std::string kind = "everywhere";  // everywhere | ball | band
  std::vector<double> center;
  double radius = 0.0;
  double depth = 0.0;

  bool operator==(const StoppingConfig&) const = default;
};

struct IntegratorConfig {
  std::vector<double> initial_point;
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t paths = 1000;
  std::uint64_t master_seed = 1;
  std::optional<double> stiffness_cap;
  StoppingConfig stopping;
  std::size_t record_stride = 0;

  bool operator==(const IntegratorConfig&) const = default;
};

struct ReferenceConfig {
  std::string kind = "none";  // none | skorokhod_halfspace | projection
  std::optional<double> dt;   // defaults to the integrator step
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> master_seed;

  bool operator==(const ReferenceConfig&) const = default;
};

struct CertifyConfig {
  std::vector<double> epsilons{0.05, 0.1};
  std::vector<double> s_grid{0.1, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> band_widths{0.1, 0.05, 0.01};
  std::vector<double> thresholds{1.0};
  std::vector<double> floor_levels{-0.05, -0.01, 0.0, 0.01, 0.05};
  std::size_t samples = 2000;
  std::uint64_t seed = 7;
  double emulation_tolerance = 1e-8;
  double floor_tolerance = 1e-9;  //!< relative to max(1, g_n(level))

  bool operator==(const CertifyConfig&) const = default;
};

//! Optional pass/fail thresholds applied by the convergence runner.
struct ConvergeChecks {
  std::optional<double> final_ks_max;        //!< every KS column at the largest n
  std::optional<double> final_min_phi_prob;  //!< min-phi probability at the largest n
  std::optional<double> monotone_sigmas;     //!< KS and min-phi monotone in n up to this many pooled stderr

  bool operator==(const ConvergeChecks&) const = default;
};

struct DiagnosticsConfig {
  double eta = 0.1;
  CertifyConfig certify;
  ConvergeChecks checks;

  bool operator==(const DiagnosticsConfig&) const = default;
};

struct TrajectoryConfig {
  std::size_t count = 1;
  bool dump = true;
  std::size_t stride = 1;

  bool operator==(const TrajectoryConfig&) const = default;
};

struct ExperimentConfig {
  DomainConfig domain;
  CoefficientConfig coefficients;
  ReflectionConfig reflection;
  PenaltyConfig penalty;
  IntegratorConfig integrator;
  ReferenceConfig reference;
  DiagnosticsConfig diagnostics;
  TrajectoryConfig trajectories;
  std::optional<std::string> output_directory;

  bool operator==(const ExperimentConfig&) const = default;
};

//! Parse and validate. Errors carry the line of the offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

//! Check every module-level precondition; throws ConfigError.
void validate_config(const ExperimentConfig& config);

Domain make_domain(const DomainConfig& config);
CoefficientField make_coefficients(const CoefficientConfig& config, int dim);
ReflectionField make_reflection(const ReflectionConfig& config, const Domain& domain);
//! nullopt for family "none".
std::optional<PenaltyField> make_penalty(const ExperimentConfig& config, const Domain& domain,
                                         int n);
PenaltySchedule make_schedule(const PenaltyConfig& config, int n);
ModelSpec make_model_spec(const ExperimentConfig& config, int n);
ReferenceSpec make_reference_spec(const ExperimentConfig& config);

}  // namespace penref

#endif  // PENREF_CONFIG_HPP_
