#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "penref/experiment.hpp"

namespace penref {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig shipped(const std::string& name) {
  return load_config(std::string(PENREF_SOURCE_DIR "/configs/") + name);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("penref_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small_halfspace() {
  ExperimentConfig c = shipped("halfspace_oblique.json");
  c.integrator.dt = 1e-2;
  c.integrator.paths = 200;
  c.penalty.n_grid = {4, 16};
  return c;
}

RunOptions options_at(const fs::path& dir, unsigned workers = 1) {
  RunOptions o;
  o.output = dir;
  o.workers = workers;
  return o;
}

TEST(Certify, ExponentialPasses) {
  const auto r = certify(shipped("certify_exponential.json"));
  EXPECT_TRUE(r.spike);
  EXPECT_TRUE(r.vanishing);
  EXPECT_TRUE(r.emulation_pass);
  EXPECT_TRUE(r.floor_pass);
  EXPECT_LE(r.max_defect, 1e-10);
  EXPECT_TRUE(r.pass());
}

TEST(Certify, ConstantFailsSpike) {
  const auto r = certify(shipped("certify_constant.json"));
  EXPECT_FALSE(r.spike);
  EXPECT_FALSE(r.pass());
}

TEST(Certify, ObliqueProjectionFailsEmulation) {
  const auto r = certify(shipped("certify_projection_oblique.json"));
  EXPECT_FALSE(r.emulation_pass);
  EXPECT_NEAR(r.max_defect, std::hypot(1 / std::sqrt(2.0), 1 - 1 / std::sqrt(2.0)), 1e-3);
}

TEST(Certify, ScaledBumpPasses) {
  const auto r = certify(shipped("certify_scaled_bump.json"));
  EXPECT_TRUE(r.spike);
  EXPECT_TRUE(r.vanishing);
  EXPECT_TRUE(r.emulation_pass);
}

TEST(Certify, WritesReport) {
  const fs::path dir = scratch("certify");
  const auto outcome = run_certify(shipped("certify_exponential.json"), options_at(dir));
  EXPECT_EQ(outcome.directory, dir);
  const auto j = nlohmann::json::parse(read_file(dir / "certification.json"));
  EXPECT_EQ(j["verdict"], "PASS");
  EXPECT_TRUE(fs::exists(dir / "certification_rows.csv"));
  const auto meta = nlohmann::json::parse(read_file(dir / "metadata.json"));
  EXPECT_EQ(meta["command"], "certify");
  EXPECT_TRUE(meta.contains("version"));
  fs::remove_all(dir);
}

TEST(Converge, ByteIdenticalAcrossWorkers) {
  const auto c = small_halfspace();
  const fs::path a = scratch("converge_a"), b = scratch("converge_b");
  const auto ra = run_convergence(c, options_at(a, 1));
  const auto rb = run_convergence(c, options_at(b, 8));
  for (const char* f : {"convergence.csv", "reference.csv", "ensemble_n4.csv", "ensemble_n16.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  }
  ASSERT_EQ(ra.rows.size(), 2u);
  EXPECT_EQ(ra.rows[0].n, 4);
  EXPECT_EQ(ra.rows[0].paths, 200u);
  const auto meta = nlohmann::json::parse(read_file(a / "metadata.json"));
  EXPECT_EQ(meta["master_seed"], c.integrator.master_seed);
  EXPECT_TRUE(meta.contains("reference_seed"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Converge, SeedOverrideChangesOutput) {
  const auto c = small_halfspace();
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  run_convergence(c, options_at(a));
  RunOptions o = options_at(b);
  o.seed = 12345;
  run_convergence(c, o);
  EXPECT_NE(read_file(a / "ensemble_n4.csv"), read_file(b / "ensemble_n4.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Converge, RequiresReference) {
  auto c = small_halfspace();
  c.reference.kind = "none";
  EXPECT_THROW(run_convergence(c, options_at(scratch("noref"))), ConfigError);
}

TEST(Converge, Checks) {
  ConvergeChecks checks;
  checks.final_ks_max = 0.05;
  checks.final_min_phi_prob = 0.9;
  checks.monotone_sigmas = 2.0;
  ConvergenceRow a, b;
  a.n = 4;
  a.ks = {0.2, 0.1};
  a.ks_phi = 0.1;
  a.ks_std_error = 0.01;
  a.min_phi_prob = 0.5;
  a.min_phi_std_error = 0.01;
  b = a;
  b.n = 16;
  b.ks = {0.03, 0.04};
  b.ks_phi = 0.02;
  b.min_phi_prob = 0.95;
  auto results = convergence_checks(checks, {a, b});
  for (const auto& r : results) EXPECT_TRUE(r.pass) << r.name << " " << r.detail;
  b.ks[1] = 0.2;
  results = convergence_checks(checks, {a, b});
  bool any_fail = false;
  for (const auto& r : results) any_fail |= !r.pass;
  EXPECT_TRUE(any_fail);
}

TEST(Paths, CountAndDump) {
  auto c = small_halfspace();
  const fs::path dir = scratch("paths");
  RunOptions o = options_at(dir);
  o.count = 3;
  o.dump = true;
  const auto outcome = run_paths(c, o);
  ASSERT_EQ(outcome.trajectory_files.size(), 3u);
  std::set<std::uint64_t> seeds;
  for (const auto& p : outcome.paths) seeds.insert(p.seed);
  EXPECT_EQ(seeds.size(), 3u);
  const std::string traj = read_file(outcome.trajectory_files[0]);
  EXPECT_EQ(traj.substr(0, traj.find('\n')), "t,x1,x2,phi,norm_f");
  EXPECT_TRUE(fs::exists(dir / "paths_summary.csv"));
  fs::remove_all(dir);

  o.dump = false;
  const auto summary = run_paths(c, o);
  EXPECT_TRUE(summary.trajectory_files.empty());
  EXPECT_TRUE(fs::exists(dir / "paths_summary.csv"));
  EXPECT_FALSE(fs::exists(dir / "trajectory_0.csv"));
  fs::remove_all(dir);
}

TEST(Paths, PenaltyOffIsFreeEuler) {
  auto c = small_halfspace();
  c.penalty.family = "none";
  const fs::path dir = scratch("free");
  RunOptions o = options_at(dir);
  o.count = 1;
  o.dump = true;
  const auto outcome = run_paths(c, o);
  ASSERT_EQ(outcome.paths.size(), 1u);
  ModelSpec spec = make_model_spec(c, c.penalty.n_grid.back());
  spec.penalty.reset();
  const PathRecord free = simulate_path(spec, outcome.paths[0].seed);
  EXPECT_TRUE(free.final_state == outcome.paths[0].final_state);
  EXPECT_EQ(outcome.paths[0].l, 0.0);
  fs::remove_all(dir);
}

TEST(Output, TimestampedDirectory) {
  const auto p = timestamped_directory("results", "converge");
  const std::string name = p.filename().string();
  EXPECT_EQ(name.rfind("converge-", 0), 0u);
  EXPECT_EQ(name.size(), std::string("converge-YYYYmmdd-HHMMSS").size());
}

}  // namespace
}  // namespace penref
