#include "penref/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace penref {

namespace {
constexpr double kKolmogorovSd = 0.2603;
constexpr double kKolmogorov99 = 1.6276;

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}
}  // namespace

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("KS distance of an empty sample");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return sup;
}

double ks_standard_error(std::size_t na, std::size_t nb) {
  return kKolmogorovSd * std::sqrt(1.0 / static_cast<double>(na) + 1.0 / static_cast<double>(nb));
}

double ks_null_band99(std::size_t na, std::size_t nb) {
  return kKolmogorov99 * std::sqrt(1.0 / static_cast<double>(na) + 1.0 / static_cast<double>(nb));
}

double wasserstein1_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("Wasserstein distance of an empty sample");
  auto sa = sorted_copy(a);
  auto sb = sorted_copy(b);
  if (sa.size() < sb.size()) std::swap(sa, sb);
  const std::size_t m = sb.size();
  const std::size_t big = sa.size();
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t pick = big == m ? k : std::min(big - 1, (2 * k + 1) * big / (2 * m));
    total += std::abs(sa[pick] - sb[k]);
  }
  return total / static_cast<double>(m);
}

double modulus_of_continuity(std::span<const Point> states, std::span<const double> times,
                             double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("modulus of continuity needs delta > 0");
  if (states.size() != times.size()) throw InvalidArgument("states and times differ in length");
  double sup = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size() && times[j] - times[i] <= delta * (1 + 1e-12);
         ++j) {
      sup = std::max(sup, (states[j] - states[i]).norm());
    }
  }
  return sup;
}

MeanEstimate mean_estimate(std::span<const double> values) {
  MeanEstimate out;
  if (values.empty()) {
    out.mean = std::numeric_limits<double>::quiet_NaN();
    out.std_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;
  if (values.size() < 2) {
    out.std_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std_error = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

std::vector<ConvergenceRow> convergence_table(std::span<const Ensemble> penalized,
                                              const ReferenceEnsemble& reference,
                                              const Domain& domain,
                                              const ConvergenceOptions& options) {
  const int dim = domain.dimension();
  std::vector<const ReflectedPathRecord*> ref_ok;
  for (const auto& p : reference.paths) {
    if (p.ok()) ref_ok.push_back(&p);
  }
  if (ref_ok.empty()) throw InvalidArgument("reference ensemble has no completed paths");

  std::vector<std::vector<double>> ref_coord(static_cast<std::size_t>(dim));
  std::vector<double> ref_phi, ref_l;
  for (const auto* p : ref_ok) {
    for (int i = 0; i < dim; ++i) ref_coord[static_cast<std::size_t>(i)].push_back(p->final_state[i]);
    ref_phi.push_back(domain.signed_distance(p->final_state));
    ref_l.push_back(p->weighted_local_time);
  }
  const MeanEstimate ref_l_mean = mean_estimate(ref_l);

  std::vector<ConvergenceRow> rows;
  for (const Ensemble& ens : penalized) {
    if (std::abs(ens.horizon - reference.horizon) > 1e-12 * std::max(1.0, reference.horizon))
      throw InvalidArgument("penalized and reference ensembles have different horizons");
    ConvergenceRow row;
    row.n = ens.penalty_index;
    row.dt = ens.dt;
    row.failures = ens.failures;
    row.reference_paths = ref_ok.size();

    std::vector<std::vector<double>> coord(static_cast<std::size_t>(dim));
    std::vector<std::vector<double>> big_l(static_cast<std::size_t>(dim));
    std::vector<double> phi, l;
    for (const auto& p : ens.paths) {
      if (!p.ok()) continue;
      for (int i = 0; i < dim; ++i) {
        coord[static_cast<std::size_t>(i)].push_back(p.final_state[i]);
        big_l[static_cast<std::size_t>(i)].push_back(p.L[i]);
      }
      phi.push_back(domain.signed_distance(p.final_state));
      l.push_back(p.l);
    }
    row.paths = phi.size();
    if (row.paths == 0) throw InvalidArgument("penalized ensemble has no completed paths");

    for (int i = 0; i < dim; ++i) {
      row.ks.push_back(ks_distance(coord[static_cast<std::size_t>(i)], ref_coord[static_cast<std::size_t>(i)]));
      row.L.push_back(mean_estimate(big_l[static_cast<std::size_t>(i)]));
    }
    row.ks_phi = ks_distance(phi, ref_phi);
    row.ks_std_error = ks_standard_error(row.paths, row.reference_paths);
    row.w1_local_time = wasserstein1_1d(l, ref_l);
    const ProbabilityEstimate p = min_phi_statistic(ens, options.eta);
    row.min_phi_prob = p.estimate;
    row.min_phi_std_error = p.std_error;
    row.l = mean_estimate(l);
    row.reference_l = ref_l_mean;
    row.reliable = row.paths >= 2 && row.reference_paths >= 2;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.n < b.n; });
  return rows;
}

void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows, int dim) {
  out << "n,dt,paths,reference_paths,failures";
  for (int i = 1; i <= dim; ++i) out << ",ks_x" << i;
  out << ",ks_phi,ks_stderr,w1_local_time,min_phi_prob,min_phi_stderr,mean_l,mean_l_stderr,"
         "mean_ref_local_time,mean_ref_local_time_stderr";
  for (int i = 1; i <= dim; ++i) out << ",mean_L" << i << ",mean_L" << i << "_stderr";
  out << ",reliable\n";
  for (const auto& r : rows) {
    out << r.n << ',' << fmt_double(r.dt) << ',' << r.paths << ',' << r.reference_paths << ','
        << r.failures;
    for (double ks : r.ks) out << ',' << fmt_double(ks);
    out << ',' << fmt_double(r.ks_phi) << ',' << fmt_double(r.ks_std_error) << ','
        << fmt_double(r.w1_local_time) << ',' << fmt_double(r.min_phi_prob) << ','
        << fmt_double(r.min_phi_std_error) << ',' << fmt_double(r.l.mean) << ','
        << fmt_double(r.l.std_error) << ',' << fmt_double(r.reference_l.mean) << ','
        << fmt_double(r.reference_l.std_error);
    for (const auto& m : r.L) out << ',' << fmt_double(m.mean) << ',' << fmt_double(m.std_error);
    out << ',' << (r.reliable ? 1 : 0) << '\n';
  }
}

}  // namespace penref
