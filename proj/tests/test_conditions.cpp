#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "thetaem/conditions.hpp"

using namespace thetaem;

namespace {

const PolyModelParams kCubic{-2.0, -2.0, 2.0, 3.0, 2.0};

GridSpec small_grid() {
  GridSpec g;
  g.n_x = 41;
  g.n_t = 5;
  return g;
}

}  // namespace

TEST(ConditionIds, RoundTrip) {
  for (auto id : {ConditionId::PolyDecay, ConditionId::ExpDecay, ConditionId::OneSidedLipschitz,
                  ConditionId::GrowthPoly, ConditionId::GrowthExp, ConditionId::LocalLipschitz}) {
    EXPECT_EQ(parse_condition_id(to_string(id)), id);
  }
  EXPECT_THROW(parse_condition_id("c9"), std::invalid_argument);
}

TEST(Grid, PointsAndTimes) {
  GridSpec g;
  g.n_x = 5;
  g.x_min = 1e-2;
  g.x_max = 1e2;
  const auto pts = grid_points(g, 1);
  ASSERT_EQ(pts.size(), 11u);
  EXPECT_EQ(pts[0][0], 0.0);
  EXPECT_DOUBLE_EQ(pts[1][0], -1e-2);
  EXPECT_DOUBLE_EQ(pts[5][0], -1e2);
  EXPECT_NEAR(pts[8][0], 1.0, 1e-12);
  EXPECT_EQ(grid_points(g, 2).size(), 1u + 3u * 2u * 5u);
  const auto ts = grid_times(g);
  EXPECT_EQ(ts.front(), 0.0);
  EXPECT_EQ(ts.back(), 100.0);
}

TEST(CheckCondition, CubicExpDecayHolds) {
  const auto m = make_poly_model(kCubic);
  ConditionConstants c;
  c.C = 4.0;
  for (double x_max : {1.0, 1e3}) {
    GridSpec g;
    g.x_max = x_max;
    const auto r = check_condition(*m, ConditionId::ExpDecay, c, g);
    EXPECT_TRUE(r.holds) << "margin " << r.margin;
    EXPECT_LE(r.margin, 0.0);
  }
}

TEST(CheckCondition, CubicOneSidedLipschitzWithLEqualsA) {
  const auto m = make_poly_model(kCubic);
  ConditionConstants c;
  c.L = kCubic.a;
  const auto r = check_condition(*m, ConditionId::OneSidedLipschitz, c, small_grid());
  EXPECT_TRUE(r.holds);
}

TEST(CheckCondition, ZeroModelViolatesExpDecay) {
  const auto m = make_zero_model();
  ConditionConstants c;
  c.C = 0.5;
  const auto r = check_condition(*m, ConditionId::ExpDecay, c, small_grid());
  EXPECT_FALSE(r.holds);
  EXPECT_GT(r.margin, 0.0);
  ASSERT_EQ(r.worst_x.size(), 1u);
  EXPECT_NE(r.worst_x[0], 0.0);
}

TEST(CheckCondition, TimeDecayPolyDecayHolds) {
  const auto m = make_time_decay_model(3.0, 1.0, 2.0);
  ConditionConstants c;
  c.K1 = 3.0;
  c.C = 1.0;
  const auto r = check_condition(*m, ConditionId::PolyDecay, c, GridSpec{});
  EXPECT_TRUE(r.holds);
  EXPECT_LE(r.margin, 0.0);
}

TEST(CheckCondition, GrowthBounds) {
  const auto lin = make_linear_model(-3.0, 1.0);
  ConditionConstants c;
  c.K = 3.0;
  EXPECT_TRUE(check_condition(*lin, ConditionId::GrowthExp, c, small_grid()).holds);
  c.K = 2.9;
  EXPECT_FALSE(check_condition(*lin, ConditionId::GrowthExp, c, small_grid()).holds);

  // The γ = 1 time-decay drift is (-(1+t)^{1/2} - 2K1)x / (2(1+t)).
  const auto td = make_time_decay_model(3.0, 1.0, 1.0);
  c.K = 3.5;
  EXPECT_TRUE(check_condition(*td, ConditionId::GrowthPoly, c, GridSpec{}).holds);
  EXPECT_THROW(check_condition(*td, ConditionId::GrowthPoly, ConditionConstants{}, GridSpec{}),
               std::invalid_argument);
}

TEST(CheckCondition, NonFiniteOutputIsViolation) {
  CallableModel bad(
      1, 1,
      [](std::span<const double> x, double, std::span<double> out) {
        out[0] = x[0] > 10.0 ? std::nan("") : -x[0];
      },
      [](std::span<const double>, double, std::span<double> out) { out[0] = 0.0; }, "bad");
  ConditionConstants c;
  c.C = 1.0;
  const auto r = check_condition(bad, ConditionId::ExpDecay, c, small_grid());
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(r.margin, std::numeric_limits<double>::infinity());
  EXPECT_GT(r.worst_x[0], 10.0);
}

TEST(CheckCondition, LocalLipschitzSampled) {
  const auto m = make_poly_model(kCubic);
  GridSpec g = small_grid();
  g.x_max = 10.0;
  const auto r = check_condition(*m, ConditionId::LocalLipschitz, ConditionConstants{}, g);
  EXPECT_TRUE(r.holds);
  ConditionConstants c;
  c.K = 1.0;
  EXPECT_FALSE(check_condition(*m, ConditionId::LocalLipschitz, c, g).holds);
}

// Refining the grid (n -> 2n - 1 shares every old point) never flips a
// violated report to holding, and the worst margin never decreases.
TEST(CheckConditionProperty, GridRefinementIsMonotone) {
  const auto m = make_poly_model({-1.0, 0.5, 1.5, 2.0, 1.0});
  ConditionConstants c;
  c.C = 1.0;
  c.K1 = 2.0;
  c.L = -1.0;
  for (auto id : {ConditionId::ExpDecay, ConditionId::PolyDecay, ConditionId::OneSidedLipschitz}) {
    GridSpec coarse;
    coarse.n_x = 11;
    coarse.n_t = 3;
    coarse.x_max = 10.0;
    GridSpec fine = coarse;
    fine.n_x = 2 * coarse.n_x - 1;
    fine.n_t = 2 * coarse.n_t - 1;
    const auto rc = check_condition(*m, id, c, coarse);
    const auto rf = check_condition(*m, id, c, fine);
    EXPECT_GE(rf.margin, rc.margin) << to_string(id);
    if (!rc.holds) {
      EXPECT_FALSE(rf.holds) << to_string(id);
    }
  }
}

TEST(CheckConditionProperty, SmallerCKeepsExpDecay) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> a_dist(-5.0, -0.1);
  std::uniform_real_distribution<double> c_dist(0.1, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    // a < 0, q = 2γ - 1, 2b + c^2 <= 0 gives condition c2 with C = -2a.
    const double a = a_dist(rng);
    const double cc = c_dist(rng);
    const double b = -cc * cc / 2.0 - 0.1;
    const auto m = make_poly_model({a, b, cc, 3.0, 2.0});
    GridSpec g = small_grid();
    ConditionConstants c;
    c.C = -2.0 * a;
    ASSERT_TRUE(check_condition(*m, ConditionId::ExpDecay, c, g).holds);
    for (double frac : {0.9, 0.5, 1e-3}) {
      c.C = -2.0 * a * frac;
      EXPECT_TRUE(check_condition(*m, ConditionId::ExpDecay, c, g).holds);
    }
  }
}

TEST(CheckConditionProperty, NonPositiveBGivesOneSidedLipschitzA) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> q_dist(1.0, 4.0);
  for (int trial = 0; trial < 10; ++trial) {
    PolyModelParams p{u(rng), -std::abs(u(rng)), 1.0, q_dist(rng), 1.0};
    const auto m = make_poly_model(p);
    ConditionConstants c;
    c.L = p.a;
    GridSpec g = small_grid();
    g.x_max = 50.0;
    g.n_t = 1;
    EXPECT_TRUE(check_condition(*m, ConditionId::OneSidedLipschitz, c, g).holds)
        << "a=" << p.a << " b=" << p.b << " q=" << p.q;
  }
}

TEST(TheoremInequality, CubicExponentialForm) {
  const auto m = make_poly_model(kCubic);
  ConditionConstants c;
  c.C = 4.0;
  GridSpec g;
  g.x_max = 10.0;
  const auto r = check_theorem_inequality(*m, DecayForm::Exponential, 1.0, 0.01, 0.5, c, g);
  EXPECT_TRUE(r.holds) << r.margin;
}

TEST(TheoremInequality, ZeroModelExponentialFormViolated) {
  const auto m = make_zero_model();
  ConditionConstants c;
  c.C = 2.0;
  for (double theta : {0.0, 0.5, 1.0}) {
    const auto r =
        check_theorem_inequality(*m, DecayForm::Exponential, theta, 0.1, 0.3, c, small_grid());
    EXPECT_FALSE(r.holds);
  }
}

TEST(TheoremInequality, TimeDecayPolynomialForm) {
  const auto m = make_time_decay_model(3.0, 1.0, 2.0);
  ConditionConstants c;
  c.K1 = 3.0;
  c.C = 1.0;
  GridSpec g;
  g.x_max = 5.0;
  const auto r = check_theorem_inequality(*m, DecayForm::Polynomial, 1.0, 0.001, 1.0, c, g);
  EXPECT_TRUE(r.holds) << r.margin;
}

TEST(TheoremInequality, RejectsEpsilonOutOfRange) {
  const auto m = make_zero_model();
  ConditionConstants c;
  c.K1 = 3.0;
  EXPECT_THROW(check_theorem_inequality(*m, DecayForm::Polynomial, 1, 0.1, 2.0, c, small_grid()),
               std::invalid_argument);
  EXPECT_THROW(check_theorem_inequality(*m, DecayForm::Exponential, 1, 0.1, 1.0, c, small_grid()),
               std::invalid_argument);
}
