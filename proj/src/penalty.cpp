#include "penref/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace penref {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_index(int n) {
  if (n < 1) throw InvalidArgument("penalty index n must be a positive integer");
}

double overlap(double lo, double hi, double a, double b) {
  return std::max(0.0, std::min(hi, b) - std::max(lo, a));
}
}  // namespace

const char* to_string(ScheduleFamily family) {
  switch (family) {
    case ScheduleFamily::scaled_bump:
      return "scaled_bump";
    case ScheduleFamily::exponential:
      return "exponential";
    case ScheduleFamily::projection:
      return "projection";
    case ScheduleFamily::constant:
      return "constant";
  }
  return "?";
}

const char* to_string(BumpProfile profile) {
  switch (profile) {
    case BumpProfile::indicator_0_1:
      return "indicator_0_1";
    case BumpProfile::indicator_m1_0:
      return "indicator_m1_0";
    case BumpProfile::exp_decay:
      return "exp_decay";
  }
  return "?";
}

const char* to_string(PenaltyDirection direction) {
  return direction == PenaltyDirection::reflection ? "reflection" : "inward_normal";
}

ScheduleFamily parse_schedule_family(const std::string& name) {
  for (auto f : {ScheduleFamily::scaled_bump, ScheduleFamily::exponential,
                 ScheduleFamily::projection, ScheduleFamily::constant}) {
    if (name == to_string(f)) return f;
  }
  throw InvalidArgument("unknown penalty family '" + name + "'");
}

BumpProfile parse_bump_profile(const std::string& name) {
  for (auto p : {BumpProfile::indicator_0_1, BumpProfile::indicator_m1_0, BumpProfile::exp_decay}) {
    if (name == to_string(p)) return p;
  }
  throw InvalidArgument("unknown bump profile '" + name + "'");
}

//---------------------------------------------------------------------------//
// PenaltySchedule
//---------------------------------------------------------------------------//

PenaltySchedule PenaltySchedule::exponential(int n) {
  check_index(n);
  PenaltySchedule s;
  s.family_ = ScheduleFamily::exponential;
  s.n_ = n;
  return s;
}

PenaltySchedule PenaltySchedule::scaled_bump(BumpProfile profile, double a_exponent,
                                             double c_exponent, int n) {
  check_index(n);
  if (!(c_exponent > 0.0) || !(a_exponent > c_exponent)) {
    std::ostringstream msg;
    msg << "scaled bump needs a_exponent > c_exponent > 0 (got " << a_exponent << ", "
        << c_exponent << ")";
    throw InvalidArgument(msg.str());
  }
  PenaltySchedule s;
  s.family_ = ScheduleFamily::scaled_bump;
  s.profile_ = profile;
  s.a_exp_ = a_exponent;
  s.c_exp_ = c_exponent;
  s.n_ = n;
  return s;
}

PenaltySchedule PenaltySchedule::projection(int n) {
  check_index(n);
  PenaltySchedule s;
  s.family_ = ScheduleFamily::projection;
  s.n_ = n;
  return s;
}

PenaltySchedule PenaltySchedule::constant(double value, int n) {
  check_index(n);
  if (!(value >= 0.0) || !std::isfinite(value))
    throw InvalidArgument("constant schedule must be finite and nonnegative");
  PenaltySchedule s;
  s.family_ = ScheduleFamily::constant;
  s.value_ = value;
  s.n_ = n;
  return s;
}

PenaltySchedule PenaltySchedule::with_index(int n) const {
  check_index(n);
  PenaltySchedule s = *this;
  s.n_ = n;
  return s;
}

double PenaltySchedule::amplitude() const {
  switch (family_) {
    case ScheduleFamily::scaled_bump:
      return std::pow(static_cast<double>(n_), a_exp_);
    case ScheduleFamily::exponential:
      return static_cast<double>(n_) * n_;
    case ScheduleFamily::projection:
      return n_;
    case ScheduleFamily::constant:
      return value_;
  }
  return 0.0;
}

double PenaltySchedule::rate() const {
  switch (family_) {
    case ScheduleFamily::scaled_bump:
      return std::pow(static_cast<double>(n_), c_exp_);
    case ScheduleFamily::exponential:
    case ScheduleFamily::projection:
      return n_;
    case ScheduleFamily::constant:
      return 0.0;
  }
  return 0.0;
}

double PenaltySchedule::operator()(double s) const {
  const double n = n_;
  switch (family_) {
    case ScheduleFamily::exponential:
      return n * n * std::exp(-n * s);
    case ScheduleFamily::projection:
      return n * std::max(-s, 0.0);
    case ScheduleFamily::constant:
      return value_;
    case ScheduleFamily::scaled_bump:
      break;
  }
  const double u = rate() * s;
  switch (profile_) {
    case BumpProfile::indicator_0_1:
      return (u >= 0.0 && u <= 1.0) ? amplitude() : 0.0;
    case BumpProfile::indicator_m1_0:
      return (u >= -1.0 && u <= 0.0) ? amplitude() : 0.0;
    case BumpProfile::exp_decay:
      return amplitude() * std::exp(-u);
  }
  return 0.0;
}

double eval_schedule(const PenaltySchedule& schedule, double s) { return schedule(s); }

double PenaltySchedule::integral(double lo, double hi) const {
  if (hi < lo) return -integral(hi, lo);
  const double n = n_;
  switch (family_) {
    case ScheduleFamily::exponential:
      return n * (std::exp(-n * lo) - std::exp(-n * hi));
    case ScheduleFamily::projection: {
      const double a = std::max(-lo, 0.0);
      const double b = std::max(-hi, 0.0);
      return 0.5 * n * (a * a - b * b);
    }
    case ScheduleFamily::constant:
      return value_ * (hi - lo);
    case ScheduleFamily::scaled_bump:
      break;
  }
  const double c = rate();
  const double a = amplitude();
  switch (profile_) {
    case BumpProfile::indicator_0_1:
      return a * overlap(lo, hi, 0.0, 1.0 / c);
    case BumpProfile::indicator_m1_0:
      return a * overlap(lo, hi, -1.0 / c, 0.0);
    case BumpProfile::exp_decay:
      return a / c * (std::exp(-c * lo) - std::exp(-c * hi));
  }
  return 0.0;
}

double PenaltySchedule::length_scale() const {
  if (family_ == ScheduleFamily::constant) return kInf;
  return 1.0 / rate();
}

std::vector<double> PenaltySchedule::breakpoints() const {
  switch (family_) {
    case ScheduleFamily::projection:
      return {0.0};
    case ScheduleFamily::scaled_bump:
      if (profile_ == BumpProfile::indicator_0_1) return {0.0, 1.0 / rate()};
      if (profile_ == BumpProfile::indicator_m1_0) return {-1.0 / rate(), 0.0};
      return {};
    default:
      return {};
  }
}

//---------------------------------------------------------------------------//
// PenaltyField
//---------------------------------------------------------------------------//

PenaltyField::PenaltyField(PenaltySchedule schedule, ReflectionField reflection,
                           PenaltyDirection direction, std::optional<double> cutoff)
    : schedule_(std::move(schedule)),
      reflection_(std::move(reflection)),
      direction_(direction),
      cutoff_(cutoff.value_or(0.5 * reflection_.domain().tube_radius())) {
  if (!(cutoff_ > 0.0) || cutoff_ > reflection_.domain().tube_radius())
    throw InvalidArgument("penalty cutoff must lie in (0, tube_radius]");
}

PenaltyField PenaltyField::with_index(int n) const {
  PenaltyField f = *this;
  f.schedule_ = schedule_.with_index(n);
  return f;
}

PenaltyEvaluation PenaltyField::evaluate(const Point& x) const {
  return evaluate(x, domain().signed_distance(x));
}

PenaltyEvaluation PenaltyField::evaluate(const Point& x, double phi) const {
  const Domain& dom = domain();
  PenaltyEvaluation out;
  out.value = Vector::Zero(x.size());
  out.phi = phi;
  if (!(std::abs(phi) < cutoff_)) return out;
  const double g = schedule_(phi);
  if (g == 0.0) return out;
  const BoundaryFootprint fp = dom.footprint(x);
  const Vector dir = direction_ == PenaltyDirection::reflection ? reflection_.at_footprint(fp)
                                                                : fp.normal;
  out.value = g * dir;
  out.magnitude = g * dir.norm();
  return out;
}

Vector eval_penalty_field(const PenaltyField& field, const Point& x) { return field(x); }

//---------------------------------------------------------------------------//
// Certifiers
//---------------------------------------------------------------------------//

double spike_integral(const PenaltySchedule& schedule, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("spike integral needs eps > 0");
  return schedule.integral(-eps, eps);
}

double spike_integral_numeric(const PenaltySchedule& schedule, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("spike integral needs eps > 0");
  std::vector<double> knots{-eps};
  for (double b : schedule.breakpoints()) {
    if (b > -eps && b < eps) knots.push_back(b);
  }
  knots.push_back(eps);
  auto g = [&](double s) { return schedule(s); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, knots[i],
                                                                           knots[i + 1], 20, 1e-6);
  }
  return total;
}

SingularityReport singularity_report(const PenaltySchedule& family, const std::vector<int>& n_grid,
                                     const std::vector<double>& s_grid,
                                     const SingularityOptions& options) {
  if (n_grid.empty()) throw InvalidArgument("singularity report needs a nonempty n-grid");
  if (s_grid.empty()) throw InvalidArgument("singularity report needs a nonempty s-grid");
  for (double s : s_grid) {
    if (!(s > 0.0)) throw InvalidArgument("s-grid must lie in (0, inf)");
  }
  if (!std::is_sorted(n_grid.begin(), n_grid.end()))
    throw InvalidArgument("n-grid must be increasing");

  SingularityReport report;
  report.epsilons = options.epsilons;
  for (int n : n_grid) {
    const PenaltySchedule g = family.with_index(n);
    SingularityRow row;
    row.n = n;
    for (double s : s_grid) row.sup_on_grid = std::max(row.sup_on_grid, g(s));
    for (double eps : options.epsilons) row.spike.push_back(spike_integral(g, eps));
    report.rows.push_back(std::move(row));
  }

  // Vanishing: past its peak the sup sequence never grows, and it ends well
  // below the peak (or is identically zero).
  std::size_t peak = 0;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].sup_on_grid > report.rows[peak].sup_on_grid) peak = i;
  }
  const double peak_value = report.rows[peak].sup_on_grid;
  bool vanishing = true;
  if (peak_value > 0.0) {
    for (std::size_t i = peak + 1; i < report.rows.size(); ++i) {
      if (report.rows[i].sup_on_grid > report.rows[i - 1].sup_on_grid * (1.0 + 1e-12))
        vanishing = false;
    }
    if (report.rows.back().sup_on_grid > options.max_tail_ratio * peak_value) vanishing = false;
  }
  report.vanishing = vanishing;

  bool spike = !options.epsilons.empty() && report.rows.size() >= 2;
  for (std::size_t e = 0; spike && e < options.epsilons.size(); ++e) {
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
      if (report.rows[i].spike[e] < report.rows[i - 1].spike[e] * (1.0 - 1e-12)) spike = false;
    }
    const double first = report.rows.front().spike[e];
    const double last = report.rows.back().spike[e];
    if (!(last >= options.min_spike_growth * first) || !(last > 0.0)) spike = false;
  }
  report.spike = spike;
  return report;
}

namespace {
//! Point in the band at signed distance `offset` from a sampled boundary point.
Point band_point(const Domain& domain, RandomStream& rng, double offset) {
  const Point p = domain.sample_boundary(rng);
  const BoundaryFootprint fp = domain.footprint(p);
  return fp.foot + offset * fp.normal;
}
}  // namespace

EmulationResult emulation_defect(const PenaltyField& field, double band, double threshold,
                                 std::size_t samples, std::uint64_t seed) {
  const Domain& domain = field.domain();
  if (!(band > 0.0) || !(band < domain.tube_radius()))
    throw InvalidArgument("emulation band must lie in (0, tube_radius)");
  if (!(threshold > 0.0)) throw InvalidArgument("emulation threshold must be positive");
  RandomStream rng(seed);
  EmulationResult result;
  result.sampled = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const double offset = band * (2.0 * rng.uniform() - 1.0);
    const Point x = band_point(domain, rng, offset);
    const PenaltyEvaluation f = field.evaluate(x);
    if (!(f.value.norm() >= threshold)) continue;
    const Vector target = field.reflection().unit_direction(x);
    const double defect = (f.value / f.value.norm() - target).norm();
    result.defect = std::max(result.defect, defect);
    ++result.accepted;
  }
  result.applicable = result.accepted > 0;
  return result;
}

double boundary_floor(const PenaltyField& field, double level, std::size_t samples,
                      std::uint64_t seed) {
  const Domain& domain = field.domain();
  if (level > domain.max_depth()) return kInf;
  if (!(std::abs(level) < domain.tube_radius()))
    throw InvalidArgument("floor level must satisfy |s| < tube_radius");
  RandomStream rng(seed);
  double floor = kInf;
  for (std::size_t i = 0; i < samples; ++i) {
    const Point x = band_point(domain, rng, level);
    floor = std::min(floor, field.evaluate(x).value.norm());
  }
  return floor;
}

}  // namespace penref
