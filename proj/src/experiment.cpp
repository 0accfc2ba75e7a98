#include "penref/experiment.hpp"

#include <charconv>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "penref/rng.hpp"

#ifndef PENREF_GIT_DESCRIBE
#define PENREF_GIT_DESCRIBE "unknown"
#endif

namespace penref {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ExperimentConfig with_seed(ExperimentConfig config, const RunOptions& options) {
  if (options.seed) config.integrator.master_seed = *options.seed;
  return config;
}

void write_metadata(const fs::path& dir, const std::string& command, const ExperimentConfig& config,
                    const RunOptions& options, double wall_seconds, ordered_json extra) {
  ordered_json meta;
  meta["command"] = command;
  meta["version"] = build_version();
  meta["started_utc"] = utc_timestamp();
  meta["wall_clock_seconds"] = wall_seconds;
  meta["workers"] = detail::resolve_workers(options.workers);
  meta["master_seed"] = config.integrator.master_seed;
  for (auto& [key, value] : extra.items()) meta[key] = value;
  meta["config"] = ordered_json::parse(serialize_config(config));
  auto out = open_output(dir / "metadata.json");
  out << meta.dump(2) << "\n";
}

}  // namespace

fs::path timestamped_directory(const fs::path& root, const std::string& prefix) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return root / (prefix + "-" + buf);
}

fs::path resolve_output(const RunOptions& options, const ExperimentConfig& config,
                        const std::string& prefix) {
  fs::path dir;
  if (!options.output.empty()) {
    dir = options.output;
  } else if (config.output_directory) {
    dir = *config.output_directory;
  } else {
    dir = timestamped_directory("results", prefix);
  }
  fs::create_directories(dir);
  return dir;
}

std::uint64_t default_reference_seed(std::uint64_t master_seed) {
  return mix64(master_seed ^ 0x5EF0E2E7CE5EEDULL);
}

std::string build_version() { return PENREF_GIT_DESCRIBE; }

//---------------------------------------------------------------------------//
// Certification
//---------------------------------------------------------------------------//

CertificationReport certify(const ExperimentConfig& config) {
  if (config.penalty.family == "none") throw ConfigError(0, "certify needs a penalty family");
  const auto& cc = config.diagnostics.certify;
  const Domain domain = make_domain(config.domain);

  CertificationReport report;
  report.family = config.penalty.family;

  SingularityOptions sopt;
  sopt.epsilons = cc.epsilons;
  report.singularity = singularity_report(make_schedule(config.penalty, config.penalty.n_grid.front()),
                                          config.penalty.n_grid, cc.s_grid, sopt);
  report.spike = report.singularity.spike;
  report.vanishing = report.singularity.vanishing;

  bool any_applicable = false;
  bool defects_ok = true;
  bool floors_ok = true;
  std::uint64_t cell = 0;
  for (int n : config.penalty.n_grid) {
    const PenaltyField field = *make_penalty(config, domain, n);
    for (double band : cc.band_widths) {
      for (double threshold : cc.thresholds) {
        EmulationCell e{n, band, threshold,
                        emulation_defect(field, band, threshold, cc.samples, derive_seed(cc.seed, cell++))};
        if (e.result.applicable) {
          any_applicable = true;
          report.max_defect = std::max(report.max_defect, e.result.defect);
          if (!(e.result.defect <= cc.emulation_tolerance)) defects_ok = false;
        }
        report.emulation.push_back(e);
      }
    }
    for (double level : cc.floor_levels) {
      FloorCell f;
      f.n = n;
      f.level = level;
      f.floor = boundary_floor(field, level, cc.samples, derive_seed(cc.seed, cell++));
      f.schedule = field.schedule()(level);
      f.dominated = f.floor >= f.schedule - cc.floor_tolerance * std::max(1.0, f.schedule);
      if (!f.dominated) floors_ok = false;
      report.floor.push_back(f);
    }
  }
  report.emulation_pass = any_applicable && defects_ok;
  report.floor_pass = floors_ok;
  return report;
}

void write_certification(const fs::path& dir, const ExperimentConfig& config,
                         const CertificationReport& report) {
  ordered_json j;
  j["family"] = report.family;
  j["verdict"] = report.pass() ? "PASS" : "FAIL";
  ordered_json verdicts;
  verdicts["spike"] = report.spike ? "PASS" : "FAIL";
  verdicts["singularity"] = report.vanishing ? "PASS" : "FAIL";
  verdicts["emulation"] = report.emulation_pass ? "PASS" : "FAIL";
  verdicts["floor"] = report.floor_pass ? "PASS" : "FAIL";
  j["verdicts"] = verdicts;
  j["max_emulation_defect"] = report.max_defect;
  j["epsilons"] = report.singularity.epsilons;

  const Domain domain = make_domain(config.domain);
  const PenaltyField field = *make_penalty(config, domain, config.penalty.n_grid.front());
  j["cutoff"] = field.cutoff();
  j["tube_radius"] = domain.tube_radius();

  ordered_json sing = ordered_json::array();
  for (const auto& row : report.singularity.rows) {
    ordered_json r;
    r["n"] = row.n;
    r["sup_on_grid"] = json_number(row.sup_on_grid);
    r["spike_integrals"] = ordered_json::array();
    for (double v : row.spike) r["spike_integrals"].push_back(json_number(v));
    sing.push_back(r);
  }
  j["singularity"] = sing;

  ordered_json emu = ordered_json::array();
  for (const auto& e : report.emulation) {
    ordered_json r;
    r["n"] = e.n;
    r["band"] = e.band;
    r["threshold"] = e.threshold;
    r["applicable"] = e.result.applicable;
    r["defect"] = e.result.applicable ? ordered_json(e.result.defect) : ordered_json(nullptr);
    r["accepted"] = e.result.accepted;
    r["sampled"] = e.result.sampled;
    emu.push_back(r);
  }
  j["emulation"] = emu;

  ordered_json flo = ordered_json::array();
  for (const auto& f : report.floor) {
    ordered_json r;
    r["n"] = f.n;
    r["level"] = f.level;
    r["floor"] = json_number(f.floor);
    r["schedule"] = json_number(f.schedule);
    r["dominated"] = f.dominated;
    flo.push_back(r);
  }
  j["floor"] = flo;

  auto out = open_output(dir / "certification.json");
  out << j.dump(2) << "\n";

  auto csv = open_output(dir / "certification_rows.csv");
  csv << "kind,n,delta,epsilon,level,value,applicable\n";
  for (const auto& row : report.singularity.rows) {
    csv << "sup_on_grid," << row.n << ",,,," << num(row.sup_on_grid) << ",1\n";
    for (std::size_t k = 0; k < row.spike.size(); ++k)
      csv << "spike_integral," << row.n << ",," << num(report.singularity.epsilons[k]) << ",,"
          << num(row.spike[k]) << ",1\n";
  }
  for (const auto& e : report.emulation)
    csv << "emulation_defect," << e.n << ',' << num(e.band) << ',' << num(e.threshold) << ",,"
        << (e.result.applicable ? num(e.result.defect) : "") << ',' << (e.result.applicable ? 1 : 0)
        << '\n';
  for (const auto& f : report.floor)
    csv << "boundary_floor," << f.n << ",,," << num(f.level) << ',' << num(f.floor) << ",1\n";
}

CertifyOutcome run_certify(const ExperimentConfig& config_in, const RunOptions& options) {
  const ExperimentConfig config = with_seed(config_in, options);
  const auto start = std::chrono::steady_clock::now();
  CertifyOutcome outcome;
  outcome.report = certify(config);
  outcome.directory = resolve_output(options, config, "certify");
  write_certification(outcome.directory, config, outcome.report);
  if (options.write_metadata) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ordered_json extra;
    extra["verdict"] = outcome.report.pass() ? "PASS" : "FAIL";
    write_metadata(outcome.directory, "certify", config, options, wall, extra);
  }
  return outcome;
}

//---------------------------------------------------------------------------//
// Convergence
//---------------------------------------------------------------------------//

bool ConvergenceOutcome::pass() const {
  if (failures > 0) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::vector<CheckResult> convergence_checks(const ConvergeChecks& checks,
                                            const std::vector<ConvergenceRow>& rows) {
  std::vector<CheckResult> out;
  if (rows.empty()) return out;
  const ConvergenceRow& last = rows.back();

  if (checks.final_ks_max) {
    CheckResult c{"final_ks_max", true, ""};
    std::ostringstream detail;
    for (std::size_t i = 0; i < last.ks.size(); ++i) {
      detail << "ks_x" << i + 1 << '=' << last.ks[i] << ' ';
      if (!(last.ks[i] <= *checks.final_ks_max)) c.pass = false;
    }
    detail << "ks_phi=" << last.ks_phi;
    if (!(last.ks_phi <= *checks.final_ks_max)) c.pass = false;
    c.detail = detail.str();
    out.push_back(c);
  }
  if (checks.final_min_phi_prob) {
    CheckResult c{"final_min_phi_prob", last.min_phi_prob >= *checks.final_min_phi_prob, ""};
    c.detail = "min_phi_prob=" + num(last.min_phi_prob);
    out.push_back(c);
  }
  if (checks.monotone_sigmas) {
    const double k = *checks.monotone_sigmas;
    CheckResult ks{"ks_monotone", true, ""};
    CheckResult mp{"min_phi_monotone", true, ""};
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& a = rows[r - 1];
      const auto& b = rows[r];
      const double pooled = std::hypot(a.ks_std_error, b.ks_std_error);
      auto check = [&](double prev, double next, const std::string& name) {
        if (next > prev + k * pooled) {
          ks.pass = false;
          ks.detail += name + " rises at n=" + std::to_string(b.n) + "; ";
        }
      };
      for (std::size_t i = 0; i < b.ks.size(); ++i) check(a.ks[i], b.ks[i], "ks_x" + std::to_string(i + 1));
      check(a.ks_phi, b.ks_phi, "ks_phi");
      const double pooled_p = std::hypot(a.min_phi_std_error, b.min_phi_std_error);
      if (b.min_phi_prob < a.min_phi_prob - k * pooled_p) {
        mp.pass = false;
        mp.detail += "drops at n=" + std::to_string(b.n) + "; ";
      }
    }
    out.push_back(ks);
    out.push_back(mp);
  }
  return out;
}

ConvergenceOutcome run_convergence(const ExperimentConfig& config_in, const RunOptions& options) {
  const ExperimentConfig config = with_seed(config_in, options);
  if (config.reference.kind == "none")
    throw ConfigError(0, "/reference/kind: converge needs a reference simulator");
  const auto start = std::chrono::steady_clock::now();
  const Domain domain = make_domain(config.domain);
  const int dim = domain.dimension();

  ConvergenceOutcome outcome;
  outcome.directory = resolve_output(options, config, "converge");

  std::vector<Ensemble> ensembles;
  for (int n : config.penalty.n_grid) {
    const ModelSpec spec = make_model_spec(config, n);
    ensembles.push_back(simulate_batch(spec, config.integrator.paths, config.integrator.master_seed,
                                       options.workers));
    outcome.failures += ensembles.back().failures;
    auto out = open_output(outcome.directory / ("ensemble_n" + std::to_string(n) + ".csv"));
    write_ensemble_csv(out, ensembles.back(), dim);
  }

  const ReferenceSpec rspec = make_reference_spec(config);
  const std::uint64_t ref_seed =
      config.reference.master_seed.value_or(default_reference_seed(config.integrator.master_seed));
  Vector r = Vector::Zero(dim);
  if (config.reflection.kind == "constant")
    r = make_reflection(config.reflection, domain).at(domain.nearest_boundary_point(rspec.initial));
  const ReferenceEnsemble reference = simulate_reference_batch(
      rspec, parse_reference_kind(config.reference.kind), r,
      config.reference.paths.value_or(config.integrator.paths), ref_seed, options.workers);
  outcome.failures += reference.failures;
  {
    auto out = open_output(outcome.directory / "reference.csv");
    write_reference_csv(out, reference, dim);
  }

  ConvergenceOptions copt;
  copt.eta = config.diagnostics.eta;
  outcome.rows = convergence_table(ensembles, reference, domain, copt);
  {
    auto out = open_output(outcome.directory / "convergence.csv");
    write_convergence_csv(out, outcome.rows, dim);
  }
  outcome.checks = convergence_checks(config.diagnostics.checks, outcome.rows);

  if (options.write_metadata) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ordered_json extra;
    extra["reference_seed"] = ref_seed;
    extra["path_seeds"] = "derive_seed(master_seed, i)";
    ordered_json caps = ordered_json::array();
    for (const auto& e : ensembles) {
      ordered_json c;
      c["n"] = e.penalty_index;
      c["stiffness_cap"] = e.paths.empty() ? 0.0 : e.paths.front().stiffness_cap;
      c["failures"] = e.failures;
      caps.push_back(c);
    }
    extra["ensembles"] = caps;
    extra["reference_failures"] = reference.failures;
    ordered_json checks = ordered_json::array();
    for (const auto& c : outcome.checks) {
      ordered_json o;
      o["name"] = c.name;
      o["verdict"] = c.pass ? "PASS" : "FAIL";
      o["detail"] = c.detail;
      checks.push_back(o);
    }
    extra["checks"] = checks;
    extra["verdict"] = outcome.pass() ? "PASS" : "FAIL";
    write_metadata(outcome.directory, "converge", config, options, wall, extra);
  }
  return outcome;
}

//---------------------------------------------------------------------------//
// Trajectories
//---------------------------------------------------------------------------//

PathsOutcome run_paths(const ExperimentConfig& config_in, const RunOptions& options) {
  const ExperimentConfig config = with_seed(config_in, options);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t count = options.count.value_or(config.trajectories.count);
  const bool dump = options.dump.value_or(config.trajectories.dump);
  if (count < 1) throw ConfigError(0, "path count must be at least 1");

  ModelSpec spec = make_model_spec(config, config.penalty.n_grid.back());
  spec.record_stride = dump ? config.trajectories.stride : 0;
  const int dim = spec.domain.dimension();

  PathsOutcome outcome;
  outcome.directory = resolve_output(options, config, "paths");
  const Ensemble ens = simulate_batch(spec, count, config.integrator.master_seed, options.workers);
  outcome.paths = ens.paths;

  {
    auto out = open_output(outcome.directory / "paths_summary.csv");
    write_ensemble_csv(out, ens, dim);
  }
  if (dump) {
    for (std::size_t i = 0; i < ens.paths.size(); ++i) {
      const fs::path file = outcome.directory / ("trajectory_" + std::to_string(i) + ".csv");
      auto out = open_output(file);
      write_trajectory_csv(out, ens.paths[i], spec.domain, spec.penalty);
      outcome.trajectory_files.push_back(file);
    }
  }
  if (options.write_metadata) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ordered_json extra;
    extra["n"] = spec.penalty_index();
    extra["count"] = count;
    extra["dump"] = dump;
    extra["failures"] = ens.failures;
    write_metadata(outcome.directory, "paths", config, options, wall, extra);
  }
  return outcome;
}

//---------------------------------------------------------------------------//
// Writers
//---------------------------------------------------------------------------//

void write_ensemble_csv(std::ostream& out, const Ensemble& ensemble, int dim) {
  out << "path,seed";
  for (int i = 1; i <= dim; ++i) out << ",x" << i;
  for (int i = 1; i <= dim; ++i) out << ",L" << i;
  out << ",l,min_phi,exit_time,status,split_steps\n";
  for (std::size_t p = 0; p < ensemble.paths.size(); ++p) {
    const PathRecord& r = ensemble.paths[p];
    out << p << ',' << r.seed;
    for (int i = 0; i < dim; ++i) out << ',' << (r.final_state.size() == dim ? num(r.final_state[i]) : "nan");
    for (int i = 0; i < dim; ++i) out << ',' << (r.L.size() == dim ? num(r.L[i]) : "nan");
    out << ',' << num(r.l) << ',' << num(r.min_phi) << ',' << (r.exit_time ? num(*r.exit_time) : "")
        << ',' << to_string(r.status) << ',' << r.split_steps << '\n';
  }
}

void write_reference_csv(std::ostream& out, const ReferenceEnsemble& ensemble, int dim) {
  out << "path,seed";
  for (int i = 1; i <= dim; ++i) out << ",z" << i;
  out << ",local_time,weighted_local_time,min_phi,status\n";
  for (std::size_t p = 0; p < ensemble.paths.size(); ++p) {
    const ReflectedPathRecord& r = ensemble.paths[p];
    out << p << ',' << r.seed;
    for (int i = 0; i < dim; ++i) out << ',' << (r.final_state.size() == dim ? num(r.final_state[i]) : "nan");
    out << ',' << num(r.local_time_final) << ',' << num(r.weighted_local_time) << ',' << num(r.min_phi)
        << ',' << to_string(r.status) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const PathRecord& path, const Domain& domain,
                          const std::optional<PenaltyField>& penalty) {
  const int dim = domain.dimension();
  out << "t";
  for (int i = 1; i <= dim; ++i) out << ",x" << i;
  out << ",phi,norm_f\n";
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    const Point& x = path.states[k];
    out << num(path.times[k]);
    for (int i = 0; i < dim; ++i) out << ',' << num(x[i]);
    double norm_f = 0.0;
    if (penalty) {
      try {
        norm_f = penalty->evaluate(x).magnitude;
      } catch (const Error&) {
        norm_f = std::numeric_limits<double>::quiet_NaN();
      }
    }
    out << ',' << num(domain.signed_distance(x)) << ',' << num(norm_f) << '\n';
  }
}

}  // namespace penref
