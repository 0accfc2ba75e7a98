#ifndef PENREF_REFERENCE_HPP_
#define PENREF_REFERENCE_HPP_
//! \file reference.hpp
//! Reference simulators of the reflected diffusion
//!
//!     Z(t) = z + int b(Z) ds + int sigma(Z) dW + int r(Z) dl
//!
//! with l nondecreasing and increasing only while Z is on the boundary.
//! Paths share the integrator's noise stream: for equal seeds, step k of a
//! reference path and of a penalized path use the same Gaussian increment.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "penref/fields.hpp"
#include "penref/geometry.hpp"
#include "penref/integrator.hpp"

namespace penref {

struct ReflectedPathRecord {
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<Point> states;
  std::vector<double> local_time;  //!< l at the recorded times, l(0) = 0
  Point final_state;
  double local_time_final = 0.0;
  //! int |r(Z)| dl, the reference counterpart of the penalized l_n(T).
  double weighted_local_time = 0.0;
  double min_phi = 0.0;
  PathStatus status = PathStatus::ok;
  std::string message;

  bool ok() const { return status == PathStatus::ok; }
};

struct SkorokhodResult {
  std::vector<double> reflected;
  std::vector<double> local_time;
};

//! One-dimensional Skorokhod map on [0, inf):
//! l(t_k) = max(0, max_{j<=k} -x(t_j)), z = x + l.
SkorokhodResult skorokhod_halfline(std::span<const double> driver);

//! Parameters shared by the reference simulators.
struct ReferenceSpec {
  Domain domain;
  CoefficientField coefficients;
  Point initial;
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t record_stride = 0;  //!< as in ModelSpec

  void validate() const;
  std::size_t steps() const;
  double step_size() const;
};

//! Oblique reflected diffusion in {x[axis] > offset} with constant b, sigma
//! and constant r (r[axis] == 1): free Euler path plus the Skorokhod map on
//! the normal coordinate, Z = X + r l.
ReflectedPathRecord halfspace_oblique_rbm(const ReferenceSpec& spec, const Vector& reflection,
                                          std::uint64_t seed);

//! Euler step followed by projection onto the closure (normal reflection).
//! l grows by the projection displacement.
ReflectedPathRecord projection_scheme(const ReferenceSpec& spec, std::uint64_t seed);

enum class ReferenceKind { skorokhod_halfspace, projection };

const char* to_string(ReferenceKind kind);
ReferenceKind parse_reference_kind(const std::string& name);

struct ReferenceEnsemble {
  std::uint64_t master_seed = 0;
  ReferenceKind kind = ReferenceKind::projection;
  double horizon = 0.0;
  double dt = 0.0;
  std::vector<ReflectedPathRecord> paths;
  std::size_t failures = 0;
};

//! Batch counterpart with the integrator's seed derivation and worker-count
//! independence. `reflection` is only read by the half-space simulator.
ReferenceEnsemble simulate_reference_batch(const ReferenceSpec& spec, ReferenceKind kind,
                                           const Vector& reflection, std::size_t path_count,
                                           std::uint64_t master_seed, unsigned workers = 0);

}  // namespace penref

#endif  // PENREF_REFERENCE_HPP_
