// penref: certify penalty families, run convergence studies, dump paths.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "penref/config.hpp"
#include "penref/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--workers", c.workers, "worker threads, 0 = all cores");
  cmd->add_option("--seed", c.seed, "master seed, overrides the config");
}

penref::RunOptions options_of(const Common& c) {
  penref::RunOptions o;
  o.output = c.out;
  o.workers = c.workers;
  o.seed = c.seed;
  return o;
}

int certify(const Common& c) {
  const auto config = penref::load_config(c.config);
  const auto outcome = penref::run_certify(config, options_of(c));
  const auto& r = outcome.report;
  std::cout << "spike        " << (r.spike ? "PASS" : "FAIL") << "\n"
            << "singularity  " << (r.vanishing ? "PASS" : "FAIL") << "\n"
            << "emulation    " << (r.emulation_pass ? "PASS" : "FAIL") << "  max defect " << r.max_defect << "\n"
            << "floor        " << (r.floor_pass ? "PASS" : "FAIL") << "\n"
            << "verdict      " << (r.pass() ? "PASS" : "FAIL") << "\n"
            << "output       " << outcome.directory.string() << "\n";
  return r.pass() ? penref::kExitOk : penref::kExitVerdictFail;
}

int converge(const Common& c) {
  const auto config = penref::load_config(c.config);
  const auto outcome = penref::run_convergence(config, options_of(c));
  penref::write_convergence_csv(std::cout, outcome.rows,
                                static_cast<int>(config.integrator.initial_point.size()));
  for (const auto& check : outcome.checks)
    std::cout << check.name << ": " << (check.pass ? "PASS" : "FAIL") << "  " << check.detail << "\n";
  if (outcome.failures > 0) std::cout << "aborted paths: " << outcome.failures << "\n";
  std::cout << "output: " << outcome.directory.string() << "\n";
  return outcome.pass() ? penref::kExitOk : penref::kExitVerdictFail;
}

int paths(const Common& c, std::optional<std::size_t> count, std::optional<bool> dump) {
  const auto config = penref::load_config(c.config);
  auto options = options_of(c);
  options.count = count;
  options.dump = dump;
  const auto outcome = penref::run_paths(config, options);
  std::size_t failed = 0;
  for (const auto& p : outcome.paths)
    if (!p.ok()) ++failed;
  std::cout << outcome.paths.size() << " paths, " << outcome.trajectory_files.size()
            << " trajectory files, " << failed << " aborted\n"
            << "output: " << outcome.directory.string() << "\n";
  return failed == 0 ? penref::kExitOk : penref::kExitVerdictFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized approximation of reflected diffusions"};
  app.require_subcommand(1);

  Common certify_opts, converge_opts, paths_opts;
  auto* certify_cmd = app.add_subcommand("certify", "check a penalty family against the convergence hypotheses");
  add_common(certify_cmd, certify_opts);
  auto* converge_cmd = app.add_subcommand("converge", "penalized ensembles over the n-grid against a reference");
  add_common(converge_cmd, converge_opts);
  auto* paths_cmd = app.add_subcommand("paths", "simulate and dump individual trajectories");
  add_common(paths_cmd, paths_opts);
  std::optional<std::size_t> count;
  bool dump = false, no_dump = false;
  paths_cmd->add_option("--count", count, "number of paths");
  auto* dump_flag = paths_cmd->add_flag("--dump", dump, "write trajectory files");
  paths_cmd->add_flag("--no-dump", no_dump, "summary only")->excludes(dump_flag);

  CLI11_PARSE(app, argc, argv);

  try {
    if (certify_cmd->parsed()) return certify(certify_opts);
    if (converge_cmd->parsed()) return converge(converge_opts);
    std::optional<bool> dump_choice;
    if (dump) dump_choice = true;
    if (no_dump) dump_choice = false;
    return paths(paths_opts, count, dump_choice);
  } catch (const penref::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return penref::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return penref::kExitRuntime;
  }
}
