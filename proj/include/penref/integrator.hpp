#ifndef PENREF_INTEGRATOR_HPP_
#define PENREF_INTEGRATOR_HPP_
//! \file integrator.hpp
//! Euler-Maruyama simulation of the penalized SDE
//!
//!     dX = [f_n(X) + b(X)] dt + sigma_n(X) dW
//!
//! stopped on leaving a region O, with the accumulators
//! L(t) = int f_n(X) ds and l(t) = int |f_n(X)| ds.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "penref/fields.hpp"
#include "penref/geometry.hpp"
#include "penref/penalty.hpp"

namespace penref {

//! The open set O whose exit stops (freezes) a path.
struct StoppingRegion {
  enum class Kind { everywhere, ball, band };

  Kind kind = Kind::everywhere;
  Point center;        //!< ball
  double radius = 0;   //!< ball
  double depth = 0;    //!< band: phi(x) > -depth

  static StoppingRegion everywhere() { return {}; }
  static StoppingRegion ball(Point center, double radius);
  static StoppingRegion band(double depth);

  bool contains(const Domain& domain, const Point& x) const;
};

struct ModelSpec {
  Domain domain;
  CoefficientField coefficients;
  std::optional<PenaltyField> penalty;  //!< empty means f_n == 0
  Point initial;
  double horizon = 1.0;
  double dt = 1e-3;
  StoppingRegion stopping = StoppingRegion::everywhere();
  double sigma_perturbation = 0.0;
  //! Largest distance the penalty drift may move a state in one (sub)step.
  //! Defaults to min(tube_radius / 2, length_scale(g_n) / 4).
  std::optional<double> stiffness_cap;
  //! Keep every k-th grid state; 0 keeps only the initial and final state.
  std::size_t record_stride = 0;

  //! Throws InvalidArgument on a violated precondition.
  void validate() const;
  std::size_t steps() const;
  double step_size() const;  //!< horizon / steps()
  double effective_stiffness_cap() const;
  int penalty_index() const;
};

enum class PathStatus { ok, blow_up, outside_validity, failed };

const char* to_string(PathStatus status);

struct PathRecord {
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<Point> states;
  Point final_state;
  Vector L;              //!< accumulated penalty displacement int f_n dt
  double l = 0.0;        //!< accumulated penalty magnitude int |f_n| dt
  double min_phi = 0.0;  //!< min of phi over every grid state up to exit
  std::optional<double> exit_time;
  PathStatus status = PathStatus::ok;
  std::string message;
  double stiffness_cap = 0.0;
  std::uint64_t split_steps = 0;  //!< grid steps whose drift was subdivided
  std::uint64_t substeps = 0;     //!< total drift substeps taken in split steps

  bool ok() const { return status == PathStatus::ok; }
};

//! Gaussian increment xi_k of step k for a path keyed by seed.
void step_noise(std::uint64_t seed, std::uint64_t step, std::span<double> out);

PathRecord simulate_path(const ModelSpec& spec, std::uint64_t seed);

struct Ensemble {
  std::uint64_t master_seed = 0;
  int penalty_index = 0;
  double horizon = 0.0;
  double dt = 0.0;
  std::vector<PathRecord> paths;
  std::size_t failures = 0;
};

//! Path i uses derive_seed(master_seed, i). Output is identical for every
//! worker count; workers == 0 picks the hardware concurrency.
Ensemble simulate_batch(const ModelSpec& spec, std::size_t path_count, std::uint64_t master_seed,
                        unsigned workers = 0);

//! sum_k h(t_k) (l(t_{k+1}) - l(t_k)). Throws InvalidArgument when the
//! accumulator decreases or lengths differ.
double stieltjes_accumulate(std::span<const double> integrand, std::span<const double> accumulator);

struct ProbabilityEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

//! Fraction of completed paths with min_phi > -eta, with binomial standard error.
ProbabilityEstimate min_phi_statistic(const Ensemble& ensemble, double eta);

namespace detail {
//! Run body(i) for i in [0, count) on `workers` threads.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);
unsigned resolve_workers(unsigned workers);
}  // namespace detail

}  // namespace penref

#endif  // PENREF_INTEGRATOR_HPP_
