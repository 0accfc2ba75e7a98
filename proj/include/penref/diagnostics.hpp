#ifndef PENREF_DIAGNOSTICS_HPP_
#define PENREF_DIAGNOSTICS_HPP_
//! \file diagnostics.hpp
//! Two-sample distances, path statistics and the convergence table that
//! compares penalized ensembles with a reference ensemble.

#include <iosfwd>
#include <span>
#include <vector>

#include "penref/geometry.hpp"
#include "penref/integrator.hpp"
#include "penref/reference.hpp"

namespace penref {

//! sup_x |F_a(x) - F_b(x)| over the pooled sample points.
double ks_distance(std::span<const double> a, std::span<const double> b);

//! Standard deviation of the two-sample KS statistic under the null,
//! from the Kolmogorov limit law (sd 0.2603 on the sqrt(n m / (n + m)) scale).
double ks_standard_error(std::size_t na, std::size_t nb);

//! 99% quantile of the two-sample KS statistic under the null.
double ks_null_band99(std::size_t na, std::size_t nb);

//! Mean absolute difference of the sorted samples. The larger sample is
//! thinned to the size of the smaller one by picking evenly spaced order
//! statistics.
double wasserstein1_1d(std::span<const double> a, std::span<const double> b);

//! max |x(t) - x(s)| over recorded pairs with |t - s| <= delta.
double modulus_of_continuity(std::span<const Point> states, std::span<const double> times,
                             double delta);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanEstimate mean_estimate(std::span<const double> values);

struct ConvergenceRow {
  int n = 0;
  double dt = 0.0;
  std::size_t paths = 0;
  std::size_t reference_paths = 0;
  std::size_t failures = 0;
  std::vector<double> ks;       //!< per coordinate of X(T)
  double ks_phi = 0.0;          //!< KS of phi(X(T))
  double ks_std_error = 0.0;
  double w1_local_time = 0.0;   //!< W1 between l_n(T) and int |r| dl of the reference
  double min_phi_prob = 0.0;
  double min_phi_std_error = 0.0;
  MeanEstimate l;               //!< l_n(T)
  MeanEstimate reference_l;     //!< int |r| dl
  std::vector<MeanEstimate> L;  //!< components of L_n(T)
  bool reliable = true;         //!< false when an ensemble is too small for standard errors
};

struct ConvergenceOptions {
  double eta = 0.1;
};

//! One row per penalized ensemble, ordered by n. Throws InvalidArgument when
//! horizons differ. Failed paths are left out of every statistic.
std::vector<ConvergenceRow> convergence_table(std::span<const Ensemble> penalized,
                                              const ReferenceEnsemble& reference,
                                              const Domain& domain,
                                              const ConvergenceOptions& options = {});

//! Fixed header for a table over `dim` coordinates, then one line per row.
void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows, int dim);

}  // namespace penref

#endif  // PENREF_DIAGNOSTICS_HPP_
