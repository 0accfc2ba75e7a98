#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "penref/penalty.hpp"
#include "penref/rng.hpp"

namespace penref {
namespace {

ReflectionField oblique_halfspace() {
  const Domain h = Domain::half_space(2, 1, 0.0);
  return normalize_reflection(ReflectionField::constant_raw(make_vector({1, 1})), h);
}

ReflectionField ball_normal() {
  return normalize_reflection(ReflectionField::normal_raw(), Domain::ball(make_vector({0, 0}), 1.0));
}

TEST(Schedule, Examples) {
  EXPECT_DOUBLE_EQ(eval_schedule(PenaltySchedule::exponential(2), 0.0), 4.0);
  EXPECT_DOUBLE_EQ(
      eval_schedule(PenaltySchedule::scaled_bump(BumpProfile::indicator_0_1, 2.0, 1.0, 3), 0.5), 0.0);
  EXPECT_DOUBLE_EQ(
      eval_schedule(PenaltySchedule::scaled_bump(BumpProfile::indicator_0_1, 2.0, 1.0, 3), 0.2), 9.0);
  EXPECT_NEAR(eval_schedule(PenaltySchedule::projection(5), -0.2), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(eval_schedule(PenaltySchedule::projection(5), 0.2), 0.0);
}

TEST(Schedule, BumpExponentsValidated) {
  EXPECT_THROW(PenaltySchedule::scaled_bump(BumpProfile::indicator_0_1, 1.0, 1.0, 2), InvalidArgument);
  EXPECT_THROW(PenaltySchedule::scaled_bump(BumpProfile::indicator_0_1, 2.0, 0.0, 2), InvalidArgument);
  EXPECT_THROW(PenaltySchedule::exponential(0), InvalidArgument);
}

TEST(Schedule, Nonnegative) {
  const std::vector<PenaltySchedule> all = {
      PenaltySchedule::exponential(7), PenaltySchedule::projection(7),
      PenaltySchedule::scaled_bump(BumpProfile::indicator_0_1, 2, 1, 7),
      PenaltySchedule::scaled_bump(BumpProfile::indicator_m1_0, 2, 1, 7),
      PenaltySchedule::scaled_bump(BumpProfile::exp_decay, 2.5, 1, 7)};
  for (const auto& g : all)
    for (double s = -2.0; s <= 2.0; s += 0.01) ASSERT_GE(g(s), 0.0);
}

TEST(PenaltyFieldEval, HalfSpaceOblique) {
  const PenaltyField f(PenaltySchedule::exponential(2), oblique_halfspace());
  const Vector v = eval_penalty_field(f, make_vector({0, 0.5}));
  const double g = 4.0 * std::exp(-1.0);
  EXPECT_NEAR(v[0], g, 1e-14);
  EXPECT_NEAR(v[1], g, 1e-14);
  EXPECT_NEAR(v[0], 1.4715, 1e-4);
}

TEST(PenaltyFieldEval, BallNormal) {
  const PenaltyField f(PenaltySchedule::exponential(1), ball_normal());
  const Vector v = eval_penalty_field(f, make_vector({0.9, 0}));
  EXPECT_NEAR(v[0], -std::exp(-0.1), 1e-14);
  EXPECT_NEAR(v[1], 0.0, 1e-15);
  EXPECT_NEAR(v[0], -0.9048, 1e-4);
}

TEST(PenaltyFieldEval, ZeroBeyondCutoff) {
  const PenaltyField f(PenaltySchedule::exponential(1), ball_normal());
  EXPECT_DOUBLE_EQ(f.cutoff(), 0.5);
  const Vector v = eval_penalty_field(f, make_vector({0.1, 0.1}));
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], 0.0);
  // The center has no unique foot point, but lies beyond the cutoff.
  EXPECT_EQ(eval_penalty_field(f, make_vector({0, 0})).norm(), 0.0);
}

TEST(PenaltyFieldEval, ProjectionPenaltyIsProjectionDisplacement) {
  const PenaltyField f(PenaltySchedule::projection(10), ball_normal(), PenaltyDirection::inward_normal);
  const Domain& d = f.domain();
  const Point x = make_vector({0.9, 0.9});
  const Vector expected = 10.0 * (d.project_to_closure(x) - x);
  EXPECT_LE((eval_penalty_field(f, x) - expected).norm(), 1e-13);
}

TEST(SpikeIntegral, ClosedForms) {
  for (int n : {1, 3, 10}) {
    for (double eps : {0.05, 0.2}) {
      EXPECT_NEAR(spike_integral(PenaltySchedule::exponential(n), eps),
                  n * (std::exp(n * eps) - std::exp(-n * eps)), 1e-12 * n * std::exp(n * eps));
      EXPECT_NEAR(spike_integral(PenaltySchedule::projection(n), eps), n * eps * eps / 2, 1e-15);
    }
  }
  const auto bump = PenaltySchedule::scaled_bump(BumpProfile::indicator_0_1, 2, 1, 8);
  EXPECT_DOUBLE_EQ(spike_integral(bump, 0.2), 8.0);
  EXPECT_DOUBLE_EQ(spike_integral(PenaltySchedule::constant(1.0, 5), 0.1), 0.2);
}

TEST(SpikeIntegral, QuadratureAgrees) {
  const std::vector<PenaltySchedule> all = {
      PenaltySchedule::exponential(16), PenaltySchedule::projection(16),
      PenaltySchedule::scaled_bump(BumpProfile::indicator_0_1, 2, 1, 16),
      PenaltySchedule::scaled_bump(BumpProfile::indicator_m1_0, 2, 1, 16),
      PenaltySchedule::scaled_bump(BumpProfile::exp_decay, 2, 1, 16)};
  for (const auto& g : all) {
    for (double eps : {0.01, 0.05, 0.1}) {
      const double exact = spike_integral(g, eps);
      EXPECT_NEAR(spike_integral_numeric(g, eps), exact, 1e-6 * std::abs(exact) + 1e-300)
          << to_string(g.family());
    }
  }
}

TEST(SpikeIntegral, NondecreasingInN) {
  for (auto make : {+[](int n) { return PenaltySchedule::exponential(n); },
                    +[](int n) { return PenaltySchedule::projection(n); },
                    +[](int n) { return PenaltySchedule::scaled_bump(BumpProfile::indicator_0_1, 2, 1, n); },
                    +[](int n) { return PenaltySchedule::scaled_bump(BumpProfile::exp_decay, 2, 1, n); }}) {
    for (double eps : {0.05, 0.1}) {
      double prev = 0.0;
      for (int n = 1; n <= 256; n *= 2) {
        const double v = spike_integral(make(n), eps);
        ASSERT_GE(v, prev);
        prev = v;
      }
    }
  }
}

std::vector<int> range_grid(int lo, int hi) {
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

std::vector<double> s_grid() {
  std::vector<double> s;
  for (int k = 1; k <= 10; ++k) s.push_back(0.1 * k);
  return s;
}

TEST(Singularity, ExponentialPasses) {
  const auto report = singularity_report(PenaltySchedule::exponential(1), range_grid(1, 64), s_grid());
  EXPECT_TRUE(report.vanishing);
  EXPECT_TRUE(report.spike);
  EXPECT_TRUE(report.pass());
  // sup over the grid is n^2 e^{-0.1 n}
  for (const auto& row : report.rows)
    EXPECT_NEAR(row.sup_on_grid, row.n * row.n * std::exp(-0.1 * row.n), 1e-12 * row.n * row.n);
}

TEST(Singularity, ProjectionPasses) {
  const auto report = singularity_report(PenaltySchedule::projection(1), range_grid(1, 64), s_grid());
  for (const auto& row : report.rows) EXPECT_EQ(row.sup_on_grid, 0.0);
  EXPECT_TRUE(report.pass());
}

TEST(Singularity, ConstantFails) {
  const auto report = singularity_report(PenaltySchedule::constant(1.0, 1), range_grid(1, 64), s_grid());
  EXPECT_FALSE(report.spike);
  EXPECT_FALSE(report.pass());
}

TEST(Emulation, ConstructedFieldIsExact) {
  const std::vector<PenaltyField> fields = {
      PenaltyField(PenaltySchedule::exponential(16), oblique_halfspace()),
      PenaltyField(PenaltySchedule::exponential(16),
                   normalize_reflection(ReflectionField::normal_tangent_raw(0.5),
                                        Domain::ellipsoid(make_vector({0, 0}), make_vector({2, 1})))),
      PenaltyField(PenaltySchedule::scaled_bump(BumpProfile::exp_decay, 2, 1, 16),
                   normalize_reflection(ReflectionField::normal_tangent_raw(-1.0),
                                        Domain::annulus(make_vector({0, 0}), 1.0, 2.0)))};
  for (const auto& f : fields) {
    const auto r = emulation_defect(f, 0.1, 1.0, 5000, 21);
    ASSERT_TRUE(r.applicable);
    EXPECT_LE(r.defect, 1e-10);
  }
}

TEST(Emulation, ProjectionPenaltyWithObliqueReflection) {
  const PenaltyField f(PenaltySchedule::projection(64), oblique_halfspace(), PenaltyDirection::inward_normal);
  const auto r = emulation_defect(f, 0.1, 1.0, 5000, 22);
  ASSERT_TRUE(r.applicable);
  const double closed_form = std::hypot(1 / std::sqrt(2.0), 1 - 1 / std::sqrt(2.0));
  EXPECT_NEAR(r.defect, closed_form, 1e-12);
  EXPECT_NEAR(r.defect, 0.7654, 1e-3);
}

TEST(Emulation, ProjectionPenaltyWithNormalReflection) {
  const PenaltyField f(PenaltySchedule::projection(64), ball_normal(), PenaltyDirection::inward_normal);
  const auto r = emulation_defect(f, 0.1, 1.0, 5000, 23);
  ASSERT_TRUE(r.applicable);
  EXPECT_LE(r.defect, 1e-8);
}

TEST(Emulation, EmptyRestrictionIsNotApplicable) {
  const PenaltyField f(PenaltySchedule::projection(1), ball_normal(), PenaltyDirection::inward_normal);
  const auto r = emulation_defect(f, 0.01, 100.0, 1000, 24);
  EXPECT_FALSE(r.applicable);
  EXPECT_EQ(r.accepted, 0u);
}

TEST(Floor, HalfSpaceClosedForm) {
  const PenaltyField f(PenaltySchedule::exponential(8), oblique_halfspace());
  for (double s : {-0.1, 0.0, 0.05, 0.3}) {
    const double expected = 64 * std::exp(-8 * s) * std::sqrt(2.0);
    EXPECT_NEAR(boundary_floor(f, s, 500, 31), expected, 1e-6 * expected);
  }
}

TEST(Floor, EmptyLevelSet) {
  const PenaltyField f(PenaltySchedule::exponential(8), ball_normal());
  EXPECT_EQ(boundary_floor(f, 2.0, 100, 32), std::numeric_limits<double>::infinity());
}

TEST(PenaltyProperty, FloorDomination) {
  const std::vector<PenaltyField> fields = {
      PenaltyField(PenaltySchedule::exponential(4), ball_normal()),
      PenaltyField(PenaltySchedule::exponential(32),
                   normalize_reflection(ReflectionField::normal_tangent_raw(0.5),
                                        Domain::ellipsoid(make_vector({0, 0}), make_vector({2, 1})))),
      PenaltyField(PenaltySchedule::scaled_bump(BumpProfile::exp_decay, 2, 1, 16),
                   normalize_reflection(ReflectionField::normal_tangent_raw(1.5),
                                        Domain::annulus(make_vector({0, 0}), 1.0, 2.0)))};
  for (const auto& f : fields)
    for (double s : {-0.2, -0.05, 0.0, 0.05, 0.2})
      EXPECT_GE(boundary_floor(f, s, 2000, 33), f.schedule()(s) * (1 - 1e-9) - 1e-9);
}

TEST(PenaltyProperty, DirectionExactness) {
  const Domain e = Domain::ellipsoid(make_vector({0, 0}), make_vector({2, 1}));
  const ReflectionField r = normalize_reflection(ReflectionField::normal_tangent_raw(0.5), e);
  const PenaltyField f(PenaltySchedule::exponential(8), r);
  RandomStream rng(34);
  for (int i = 0; i < 5000; ++i) {
    const Point p = e.sample_boundary(rng);
    const Point x = p + (rng.uniform() - 0.5) * 0.4 * e.inward_normal(p);
    const Vector v = f(x);
    if (v.norm() == 0.0) continue;
    ASSERT_LE((v.normalized() - unit_direction_extension(r, e, x)).norm(), 1e-12);
  }
}

TEST(PenaltyProperty, VanishingInside) {
  const Domain b = Domain::ball(make_vector({0, 0}), 1.0);
  const ReflectionField r = normalize_reflection(ReflectionField::normal_raw(), b);
  for (auto make : {+[](int n) { return PenaltySchedule::exponential(n); },
                    +[](int n) { return PenaltySchedule::scaled_bump(BumpProfile::indicator_0_1, 2, 1, n); },
                    +[](int n) { return PenaltySchedule::projection(n); }}) {
    std::vector<double> maxima;
    for (int n = 1; n <= 256; n *= 2) {
      const PenaltyField f(make(n), r);
      RandomStream rng(35);
      double m = 0.0;
      for (int i = 0; i < 500; ++i) {
        const Point p = b.sample_boundary(rng);
        const Point x = p + (0.2 + 0.25 * rng.uniform()) * b.inward_normal(p);
        m = std::max(m, f(x).norm());
      }
      maxima.push_back(m);
    }
    EXPECT_LT(maxima.back(), 1e-6 * std::max(1.0, *std::max_element(maxima.begin(), maxima.end())));
  }
}

}  // namespace
}  // namespace penref
