#ifndef PENREF_PENALTY_HPP_
#define PENREF_PENALTY_HPP_
//! \file penalty.hpp
//! Penalty schedules g_n, the penalty drift f_n and numerical certifiers
//! for the hypotheses under which penalized diffusions converge to the
//! reflected one.
//!
//! The drift is
//!
//!     f_n(x) = g_n(phi(x)) r(y(x))   for |phi(x)| < cutoff
//!     f_n(x) = 0                     otherwise
//!
//! where y(x) is the nearest boundary point. Choosing the inward normal in
//! place of r together with the projection schedule n * max(-s, 0) gives the
//! classical projection penalty n (Pi(x) - x).

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "penref/fields.hpp"
#include "penref/geometry.hpp"

namespace penref {

enum class ScheduleFamily { scaled_bump, exponential, projection, constant };

//! Profile h of a scaled bump g_n(s) = a_n h(c_n s).
enum class BumpProfile {
  indicator_0_1,   //!< 1 on [0, 1]
  indicator_m1_0,  //!< 1 on [-1, 0]
  exp_decay,       //!< e^{-s}
};

const char* to_string(ScheduleFamily family);
const char* to_string(BumpProfile profile);
ScheduleFamily parse_schedule_family(const std::string& name);
BumpProfile parse_bump_profile(const std::string& name);

class PenaltySchedule {
 public:
  //! g_n(s) = n^2 e^{-n s}
  static PenaltySchedule exponential(int n);
  //! g_n(s) = n^a_exp h(n^c_exp s); requires a_exp > c_exp > 0.
  static PenaltySchedule scaled_bump(BumpProfile profile, double a_exponent, double c_exponent,
                                     int n);
  //! g_n(s) = n max(-s, 0)
  static PenaltySchedule projection(int n);
  //! g_n(s) = value, independent of n. Has no spike; used as a negative control.
  static PenaltySchedule constant(double value, int n);

  PenaltySchedule with_index(int n) const;

  ScheduleFamily family() const { return family_; }
  BumpProfile profile() const { return profile_; }
  int index() const { return n_; }
  double a_exponent() const { return a_exp_; }
  double c_exponent() const { return c_exp_; }
  double constant_value() const { return value_; }
  double amplitude() const;  //!< a_n
  double rate() const;       //!< c_n

  //! eval_schedule
  double operator()(double s) const;

  //! Closed-form integral of g_n over [lo, hi].
  double integral(double lo, double hi) const;

  //! Width over which g_n changes appreciably (1/c_n or 1/n); +inf for constants.
  double length_scale() const;

  //! Points where g_n is not smooth, for piecewise quadrature.
  std::vector<double> breakpoints() const;

 private:
  PenaltySchedule() = default;

  ScheduleFamily family_ = ScheduleFamily::exponential;
  BumpProfile profile_ = BumpProfile::exp_decay;
  int n_ = 1;
  double a_exp_ = 2.0;
  double c_exp_ = 1.0;
  double value_ = 0.0;
};

double eval_schedule(const PenaltySchedule& schedule, double s);

enum class PenaltyDirection { reflection, inward_normal };

const char* to_string(PenaltyDirection direction);

struct PenaltyEvaluation {
  Vector value;
  double magnitude = 0.0;
  double phi = 0.0;
};

class PenaltyField {
 public:
  //! cutoff defaults to half the tube radius of the reflection's domain.
  PenaltyField(PenaltySchedule schedule, ReflectionField reflection,
               PenaltyDirection direction = PenaltyDirection::reflection,
               std::optional<double> cutoff = std::nullopt);

  const PenaltySchedule& schedule() const { return schedule_; }
  const ReflectionField& reflection() const { return reflection_; }
  const Domain& domain() const { return reflection_.domain(); }
  PenaltyDirection direction() const { return direction_; }
  double cutoff() const { return cutoff_; }

  PenaltyField with_index(int n) const;

  PenaltyEvaluation evaluate(const Point& x) const;
  //! Same, reusing a known phi(x).
  PenaltyEvaluation evaluate(const Point& x, double phi) const;
  Vector operator()(const Point& x) const { return evaluate(x).value; }

 private:
  PenaltySchedule schedule_;
  ReflectionField reflection_;
  PenaltyDirection direction_;
  double cutoff_;
};

Vector eval_penalty_field(const PenaltyField& field, const Point& x);

//---------------------------------------------------------------------------//
// Certifiers
//---------------------------------------------------------------------------//

//! Integral of g_n over [-eps, eps] from the closed-form antiderivative.
double spike_integral(const PenaltySchedule& schedule, double eps);

//! Same integral by adaptive Gauss-Kronrod quadrature (relative tolerance
//! 1e-6), split at the schedule's breakpoints.
double spike_integral_numeric(const PenaltySchedule& schedule, double eps);

struct SingularityRow {
  int n = 0;
  double sup_on_grid = 0.0;
  std::vector<double> spike;  //!< one integral per requested eps
};

struct SingularityReport {
  std::vector<double> epsilons;
  std::vector<SingularityRow> rows;
  bool vanishing = false;  //!< sup_{s in grid} g_n decays toward 0 along the n-grid
  bool spike = false;      //!< integrals over [-eps, eps] grow without bound along the n-grid
  bool pass() const { return vanishing && spike; }
};

struct SingularityOptions {
  std::vector<double> epsilons{0.05, 0.1};
  //! Required ratio last/first of the spike integrals over the n-grid.
  double min_spike_growth = 2.0;
  //! Required ratio last/peak of the sup over the s-grid.
  double max_tail_ratio = 0.5;
};

//! Tabulate sup_s g_n(s) and the spike integrals over an increasing n-grid.
SingularityReport singularity_report(const PenaltySchedule& family, const std::vector<int>& n_grid,
                                     const std::vector<double>& s_grid,
                                     const SingularityOptions& options = {});

struct EmulationResult {
  bool applicable = false;  //!< false when no sample reached the magnitude threshold
  double defect = 0.0;
  std::size_t accepted = 0;
  std::size_t sampled = 0;
};

//! Monte Carlo sup over the two-sided band of width `band` of
//! | f/|f| - r(y)/|r(y)| |, over samples with |f| >= threshold.
EmulationResult emulation_defect(const PenaltyField& field, double band, double threshold,
                                 std::size_t samples, std::uint64_t seed);

//! Monte Carlo estimate of inf |f_n(x)| over the level set phi(x) = level.
//! Returns +inf when the level set is empty.
double boundary_floor(const PenaltyField& field, double level, std::size_t samples,
                      std::uint64_t seed);

}  // namespace penref

#endif  // PENREF_PENALTY_HPP_
