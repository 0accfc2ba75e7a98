#ifndef PENREF_EXPERIMENT_HPP_
#define PENREF_EXPERIMENT_HPP_
//! \file experiment.hpp
//! Config-driven runners behind the command line tool, plus the CSV and
//! JSON writers they use.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "penref/config.hpp"
#include "penref/diagnostics.hpp"
#include "penref/integrator.hpp"
#include "penref/penalty.hpp"
#include "penref/reference.hpp"

namespace penref {

//! Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitVerdictFail = 1, kExitConfigError = 2, kExitRuntime = 3 };

struct RunOptions {
  std::filesystem::path output;         //!< empty: config value, else a timestamped directory
  unsigned workers = 0;                 //!< 0: hardware concurrency
  std::optional<std::uint64_t> seed;    //!< overrides integrator.master_seed
  std::optional<std::size_t> count;     //!< paths runner only
  std::optional<bool> dump;             //!< paths runner only
  bool write_metadata = true;
};

//! "<prefix>-YYYYmmdd-HHMMSS" under `root`.
std::filesystem::path timestamped_directory(const std::filesystem::path& root,
                                            const std::string& prefix);

//! Output directory from the options, then the config, then a timestamp.
std::filesystem::path resolve_output(const RunOptions& options, const ExperimentConfig& config,
                                     const std::string& prefix);

//! Seed of the reference ensemble when the config leaves it open.
std::uint64_t default_reference_seed(std::uint64_t master_seed);

std::string build_version();

//---------------------------------------------------------------------------//
// Certification
//---------------------------------------------------------------------------//

struct EmulationCell {
  int n = 0;
  double band = 0.0;
  double threshold = 0.0;
  EmulationResult result;
};

struct FloorCell {
  int n = 0;
  double level = 0.0;
  double floor = 0.0;
  double schedule = 0.0;  //!< g_n(level)
  bool dominated = false;
};

struct CertificationReport {
  std::string family;
  SingularityReport singularity;
  std::vector<EmulationCell> emulation;
  std::vector<FloorCell> floor;
  double max_defect = 0.0;  //!< over applicable cells
  bool spike = false;
  bool vanishing = false;
  bool emulation_pass = false;
  bool floor_pass = false;

  bool pass() const { return spike && vanishing && emulation_pass && floor_pass; }
};

//! Certifiers over the config's n-grid. Pure given the config.
CertificationReport certify(const ExperimentConfig& config);

//! Writes certification.json and certification_rows.csv into `dir`.
void write_certification(const std::filesystem::path& dir, const ExperimentConfig& config,
                         const CertificationReport& report);

struct CertifyOutcome {
  CertificationReport report;
  std::filesystem::path directory;
};

CertifyOutcome run_certify(const ExperimentConfig& config, const RunOptions& options);

//---------------------------------------------------------------------------//
// Convergence
//---------------------------------------------------------------------------//

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ConvergenceOutcome {
  std::vector<ConvergenceRow> rows;
  std::vector<CheckResult> checks;
  std::size_t failures = 0;  //!< aborted penalized and reference paths
  std::filesystem::path directory;

  bool pass() const;
};

//! Apply the config's optional thresholds to a finished table.
std::vector<CheckResult> convergence_checks(const ConvergeChecks& checks,
                                            const std::vector<ConvergenceRow>& rows);

//! Penalized ensembles over the n-grid and the reference ensemble. Writes
//! convergence.csv, reference.csv, ensemble_n<N>.csv and metadata.json.
ConvergenceOutcome run_convergence(const ExperimentConfig& config, const RunOptions& options);

//---------------------------------------------------------------------------//
// Trajectories
//---------------------------------------------------------------------------//

struct PathsOutcome {
  std::vector<PathRecord> paths;
  std::vector<std::filesystem::path> trajectory_files;
  std::filesystem::path directory;
};

//! Paths at the largest n of the grid. Writes paths_summary.csv and, when
//! dumping, trajectory_<i>.csv per path.
PathsOutcome run_paths(const ExperimentConfig& config, const RunOptions& options);

//---------------------------------------------------------------------------//
// Writers
//---------------------------------------------------------------------------//

void write_ensemble_csv(std::ostream& out, const Ensemble& ensemble, int dim);
void write_reference_csv(std::ostream& out, const ReferenceEnsemble& ensemble, int dim);
//! Rows t, x1..xd, phi, norm_f.
void write_trajectory_csv(std::ostream& out, const PathRecord& path, const Domain& domain,
                          const std::optional<PenaltyField>& penalty);

}  // namespace penref

#endif  // PENREF_EXPERIMENT_HPP_
