#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "penref/integrator.hpp"
#include "penref/reference.hpp"
#include "penref/rng.hpp"

namespace penref {
namespace {

const Domain kHalf = Domain::half_space(2, 1, 0.0);

ReferenceSpec half_spec(Vector drift, Matrix sigma, double dt, double horizon = 1.0) {
  ReferenceSpec spec{kHalf, CoefficientField::constant(std::move(drift), std::move(sigma)),
                     make_vector({0, 0.5}), horizon, dt, 1};
  return spec;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

TEST(Skorokhod, Examples) {
  const std::vector<double> x{0.0, -0.5, 0.2, -1.0, 0.5};
  const auto r = skorokhod_halfline(x);
  const std::vector<double> l{0.0, 0.5, 0.5, 1.0, 1.0};
  const std::vector<double> z{0.0, 0.0, 0.7, 0.0, 1.5};
  for (std::size_t k = 0; k < x.size(); ++k) {
    EXPECT_DOUBLE_EQ(r.local_time[k], l[k]);
    EXPECT_DOUBLE_EQ(r.reflected[k], z[k]);
  }
}

TEST(Skorokhod, NoContact) {
  const std::vector<double> x{1.0, 2.0, 0.5, 3.0};
  const auto r = skorokhod_halfline(x);
  for (std::size_t k = 0; k < x.size(); ++k) {
    EXPECT_EQ(r.local_time[k], 0.0);
    EXPECT_EQ(r.reflected[k], x[k]);
  }
}

TEST(Skorokhod, RejectsNegativeStart) {
  const std::vector<double> bad{-0.1, 1.0};
  EXPECT_THROW(skorokhod_halfline(bad), InvalidArgument);
  EXPECT_THROW(skorokhod_halfline(std::vector<double>{}), InvalidArgument);
}

// Recursive form z_k = max(z_{k-1} + dx_k, 0) of the discrete map.
TEST(Skorokhod, MatchesRecursionOnRandomWalks) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> step(0.0, 0.3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x{0.4};
    for (int k = 0; k < 300; ++k) x.push_back(x.back() + step(gen));
    const auto r = skorokhod_halfline(x);
    double z = x[0], l = 0.0;
    for (std::size_t k = 1; k < x.size(); ++k) {
      const double trial_z = z + (x[k] - x[k - 1]);
      if (trial_z < 0) l -= trial_z;
      z = std::max(trial_z, 0.0);
      ASSERT_NEAR(r.reflected[k], z, 1e-12);
      ASSERT_NEAR(r.local_time[k], l, 1e-12);
    }
  }
}

TEST(Skorokhod, Properties) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> step(0.0, 1.0);
  std::vector<double> x{0.0};
  for (int k = 0; k < 2000; ++k) x.push_back(x.back() + step(gen));
  const auto r = skorokhod_halfline(x);
  for (std::size_t k = 0; k < x.size(); ++k) {
    EXPECT_GE(r.reflected[k], 0.0);
    EXPECT_DOUBLE_EQ(r.reflected[k], x[k] + r.local_time[k]);
    if (k > 0) {
      EXPECT_GE(r.local_time[k], r.local_time[k - 1]);
      if (r.local_time[k] > r.local_time[k - 1]) EXPECT_NEAR(r.reflected[k], 0.0, 1e-12);
    }
  }
}

TEST(HalfspaceRbm, FarFromBoundaryIsFree) {
  const ReferenceSpec spec{kHalf, CoefficientField::constant(make_vector({0, 0}), identity(2) * 0.01),
                           make_vector({0, 5.0}), 1.0, 1e-3, 1};
  const auto p = halfspace_oblique_rbm(spec, make_vector({0, 1}), 3);
  EXPECT_EQ(p.local_time_final, 0.0);
  for (double l : p.local_time) EXPECT_EQ(l, 0.0);
  EXPECT_GT(p.min_phi, 4.0);
}

TEST(HalfspaceRbm, ObliqueIdentity) {
  const ReferenceSpec spec = half_spec(make_vector({0.3, -0.2}), identity(2), 1e-3);
  const Vector r = make_vector({1, 1});
  const auto p = halfspace_oblique_rbm(spec, r, 42);
  ASSERT_TRUE(p.ok());
  ASSERT_EQ(p.states.size(), spec.steps() + 1);
  // Rebuild the free Euler path from the shared noise stream.
  const double h = spec.step_size();
  const Vector drift_step = make_vector({0.3, -0.2}) * h;
  const Matrix sigma = identity(2) * std::sqrt(h);
  Point free = spec.initial;
  double buf[2];
  for (std::size_t k = 0; k < spec.steps(); ++k) {
    step_noise(42, k, std::span<double>(buf, 2));
    free += drift_step + sigma * make_vector({buf[0], buf[1]});
    const Point& z = p.states[k + 1];
    const double l = p.local_time[k + 1];
    EXPECT_NEAR((z - free - r * l).norm(), 0.0, 1e-12);
    EXPECT_NEAR(z[0] - free[0], l, 1e-12);
    EXPECT_GE(z[1], -1e-12);
  }
  EXPECT_GT(p.local_time_final, 0.0);
  EXPECT_NEAR(p.weighted_local_time, std::sqrt(2.0) * p.local_time_final, 1e-12);
}

TEST(HalfspaceRbm, Rejections) {
  const ReferenceSpec spec = half_spec(make_vector({0, 0}), identity(2), 1e-3);
  EXPECT_THROW(halfspace_oblique_rbm(spec, make_vector({1, 0.5}), 1), InvalidReflection);
  EXPECT_THROW(halfspace_oblique_rbm(spec, make_vector({1, 1, 1}), 1), DimensionMismatch);
  ReferenceSpec ball = spec;
  ball.domain = Domain::ball(make_vector({0, 0}), 1.0);
  ball.initial = make_vector({0, 0});
  EXPECT_THROW(halfspace_oblique_rbm(ball, make_vector({0, 1}), 1), InvalidArgument);
}

TEST(HalfspaceRbm, SharesNoiseWithIntegrator) {
  const ReferenceSpec spec = half_spec(make_vector({0, 0}), identity(2), 1e-3, 0.05);
  const ModelSpec free{kHalf, spec.coefficients, std::nullopt, spec.initial, spec.horizon, spec.dt,
                       StoppingRegion::everywhere(), 0.0, std::nullopt, 1};
  const auto p = halfspace_oblique_rbm(spec, make_vector({0, 1}), 9);
  const auto q = simulate_path(free, 9);
  ASSERT_EQ(p.states.size(), q.states.size());
  for (std::size_t k = 0; k < p.states.size(); ++k)
    EXPECT_NEAR((p.states[k] - q.states[k] - make_vector({0, 1}) * p.local_time[k]).norm(), 0.0,
                1e-12);
}

// E[l(T)] for driftless BM started at height c in the upper half-space:
// l(T) = (sup -W - c)^+, sup -W ~ |N(0,T)|. Discrete monitoring shifts the
// barrier by 0.5826 sqrt(dt).
TEST(HalfspaceRbm, MeanLocalTimeMatchesClosedForm) {
  const double dt = 1e-3;
  const ReferenceSpec spec = half_spec(make_vector({0, 0}), identity(2), dt);
  ReferenceSpec quiet = spec;
  quiet.record_stride = 0;
  const auto e = simulate_reference_batch(quiet, ReferenceKind::skorokhod_halfspace,
                                          make_vector({0, 1}), 20000, 123);
  double sum = 0.0, sum2 = 0.0;
  for (const auto& p : e.paths) {
    sum += p.local_time_final;
    sum2 += p.local_time_final * p.local_time_final;
  }
  const double n = static_cast<double>(e.paths.size());
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  const double c = 0.5 + 0.5826 * std::sqrt(dt);
  const double expected = 2.0 * (normal_pdf(c) - c * (1.0 - normal_cdf(c)));
  EXPECT_NEAR(2.0 * (normal_pdf(0.5) - 0.5 * (1.0 - normal_cdf(0.5))), 0.395593, 1e-6);
  EXPECT_NEAR(mean, expected, 4.0 * se) << "se " << se;
}

TEST(ProjectionScheme, EqualsSkorokhodOnHalfspace) {
  const ReferenceSpec spec = half_spec(make_vector({0.1, -0.5}), identity(2), 1e-3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = projection_scheme(spec, seed);
    const auto b = halfspace_oblique_rbm(spec, make_vector({0, 1}), seed);
    ASSERT_EQ(a.states.size(), b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      ASSERT_NEAR((a.states[k] - b.states[k]).norm(), 0.0, 1e-12);
      ASSERT_NEAR(a.local_time[k], b.local_time[k], 1e-12);
    }
    EXPECT_NEAR(a.weighted_local_time, b.weighted_local_time, 1e-12);
  }
}

TEST(ProjectionScheme, BallShortHorizonHasNoContact) {
  const ReferenceSpec spec{Domain::ball(make_vector({0, 0}), 1.0),
                           CoefficientField::constant(make_vector({0, 0}), identity(2)),
                           make_vector({0, 0}), 1e-3, 1e-5, 0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = projection_scheme(spec, seed);
    EXPECT_EQ(p.local_time_final, 0.0);
    EXPECT_GT(p.min_phi, 0.8);
  }
}

TEST(ProjectionScheme, ContainmentAndSupport) {
  const Domain ball = Domain::ball(make_vector({0, 0}), 1.0);
  const ReferenceSpec spec{ball, CoefficientField::constant(make_vector({0.5, 0}), identity(2)),
                           make_vector({0.5, 0}), 1.0, 1e-3, 1};
  int touched = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = projection_scheme(spec, seed);
    ASSERT_TRUE(p.ok());
    EXPECT_GE(p.min_phi, -1e-9);
    if (p.local_time_final > 0.0) ++touched;
    for (std::size_t k = 1; k < p.states.size(); ++k) {
      EXPECT_GE(ball.signed_distance(p.states[k]), -1e-9);
      ASSERT_GE(p.local_time[k], p.local_time[k - 1]);
      if (p.local_time[k] > p.local_time[k - 1])
        EXPECT_NEAR(ball.signed_distance(p.states[k]), 0.0, 1e-9);
    }
  }
  EXPECT_GE(touched, 5);
}

// Minimality: any other pushing l' that keeps x + l' >= 0 dominates l.
TEST(Skorokhod, Minimality) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> step(0.0, 0.5);
  std::uniform_real_distribution<double> extra(0.0, 0.2);
  std::vector<double> x{0.1};
  for (int k = 0; k < 500; ++k) x.push_back(x.back() + step(gen));
  const auto r = skorokhod_halfline(x);
  double other = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    other = std::max(other + extra(gen), -x[k]);
    EXPECT_GE(other, r.local_time[k] - 1e-12);
  }
}

TEST(ReferenceBatch, ReproducibleAcrossWorkers) {
  ReferenceSpec spec = half_spec(make_vector({0, 0}), identity(2), 1e-3);
  spec.record_stride = 0;
  const auto a = simulate_reference_batch(spec, ReferenceKind::projection, make_vector({0, 1}), 64, 77, 1);
  const auto b = simulate_reference_batch(spec, ReferenceKind::projection, make_vector({0, 1}), 64, 77, 8);
  ASSERT_EQ(a.paths.size(), 64u);
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    EXPECT_EQ(a.paths[i].seed, derive_seed(77, i));
    EXPECT_TRUE(a.paths[i].final_state == b.paths[i].final_state);
    EXPECT_EQ(a.paths[i].local_time_final, b.paths[i].local_time_final);
  }
}

TEST(ReferenceKind, Names) {
  EXPECT_EQ(parse_reference_kind("projection"), ReferenceKind::projection);
  EXPECT_EQ(parse_reference_kind("skorokhod_halfspace"), ReferenceKind::skorokhod_halfspace);
  EXPECT_STREQ(to_string(ReferenceKind::projection), "projection");
  EXPECT_THROW(parse_reference_kind("euler"), InvalidArgument);
}

TEST(ProjectionScheme, CoarseStepFails) {
  const ReferenceSpec spec{Domain::ball(make_vector({0, 0}), 1.0),
                           CoefficientField::constant(make_vector({0, 0}), identity(2) * 5.0),
                           make_vector({0.9, 0}), 1.0, 0.5, 1};
  bool failed = false;
  for (std::uint64_t seed = 0; seed < 50 && !failed; ++seed) {
    const auto p = projection_scheme(spec, seed);
    if (!p.ok()) {
      failed = true;
      EXPECT_NE(p.message.find("dt too coarse"), std::string::npos) << p.message;
    }
  }
  EXPECT_TRUE(failed);
}

}  // namespace
}  // namespace penref
