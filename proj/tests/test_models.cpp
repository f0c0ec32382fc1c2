#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "thetaem/models.hpp"

using namespace thetaem;

namespace {

double drift(const SdeModel& m, double x, double t = 0.0) {
  double in[] = {x};
  double out[] = {0.0};
  m.drift(in, t, out);
  return out[0];
}

double diffusion(const SdeModel& m, double x, double t = 0.0) {
  double in[] = {x};
  double out[] = {0.0};
  m.diffusion(in, t, out);
  return out[0];
}

}  // namespace

TEST(PolyModel, HandEvaluatedPoints) {
  const auto m = make_poly_model({-2.0, -2.0, 2.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(drift(*m, 1.0), -4.0);
  EXPECT_DOUBLE_EQ(diffusion(*m, 1.0), 2.0);

  const auto m2 = make_poly_model({-1.0, -1.0, 1.0, 2.0, 1.0});
  EXPECT_DOUBLE_EQ(drift(*m2, 2.0), -6.0);
  EXPECT_DOUBLE_EQ(drift(*m2, -2.0), 6.0);
}

TEST(PolyModel, VanishesAtOrigin) {
  for (double q : {0.3, 1.0, 2.0, 3.0}) {
    for (double g : {0.5, 0.75, 1.0, 2.0}) {
      const auto m = make_poly_model({-1.5, 0.7, 1.3, q, g});
      EXPECT_EQ(drift(*m, 0.0, 2.0), 0.0);
      EXPECT_EQ(diffusion(*m, 0.0, 2.0), 0.0);
    }
  }
}

TEST(PolyModel, SublinearDriftIsOdd) {
  const auto m = make_poly_model({1.0, 0.5, 1.0, 0.5, 0.75});
  for (double x : {1e-8, 0.3, 4.0}) EXPECT_DOUBLE_EQ(drift(*m, -x), -drift(*m, x));
  EXPECT_TRUE(std::isfinite(drift(*m, 1e-300)));
}

TEST(PolyModel, RejectsOutsideDomain) {
  EXPECT_THROW(make_poly_model({0, 0, 1, 0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(make_poly_model({0, 0, 1, 2.0, 0.49}), std::invalid_argument);
}

TEST(TimeDecayModel, HandEvaluatedPoints) {
  const auto m = make_time_decay_model(2.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(diffusion(*m, 0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(drift(*m, 1.0, 0.0), -2.5);
}

TEST(TimeDecayModel, DriftDiffusionIdentity) {
  for (double K1 : {1.5, 3.0, 5.0}) {
    for (double C : {0.2, 1.0, 7.0}) {
      for (double gamma : {1.0, 1.5, 2.0, 3.0}) {
        const auto m = make_time_decay_model(K1, C, gamma);
        for (double t : {0.0, 0.3, 10.0, 1e3}) {
          for (double x : {-50.0, -2.0, -1e-3, 0.0, 0.7, 3.0, 20.0}) {
            const double f = drift(*m, x, t);
            const double g = diffusion(*m, x, t);
            const double lhs = 2.0 * x * f + g * g;
            const double rhs = C * std::pow(1.0 + t, -K1) - 2.0 * K1 / (1.0 + t) * x * x;
            const double scale = std::abs(2.0 * x * f) + g * g;
            EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::max(scale, std::abs(rhs)))
                << "K1=" << K1 << " C=" << C << " gamma=" << gamma << " x=" << x << " t=" << t;
          }
        }
      }
    }
  }
}

TEST(TimeDecayModel, RejectsOutsideDomain) {
  EXPECT_THROW(make_time_decay_model(1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_time_decay_model(2.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_time_decay_model(2.0, 1.0, 0.9), std::invalid_argument);
}

TEST(CallableModel, ForwardsToCallables) {
  CallableModel m(
      2, 1,
      [](std::span<const double> x, double t, std::span<double> out) {
        out[0] = -x[0] + t;
        out[1] = -2.0 * x[1];
      },
      [](std::span<const double> x, double, std::span<double> out) {
        out[0] = x[0];
        out[1] = 0.5;
      },
      "custom");
  EXPECT_EQ(m.state_dim(), 2u);
  EXPECT_EQ(m.noise_dim(), 1u);
  EXPECT_EQ(m.label(), "custom");
  double x[] = {1.0, 3.0};
  double f[2];
  double g[2];
  m.drift(x, 0.5, f);
  m.diffusion(x, 0.5, g);
  EXPECT_DOUBLE_EQ(f[0], -0.5);
  EXPECT_DOUBLE_EQ(f[1], -6.0);
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
}

TEST(SimpleModels, ZeroAndLinear) {
  const auto z = make_zero_model();
  EXPECT_EQ(drift(*z, 5.0), 0.0);
  EXPECT_EQ(diffusion(*z, 5.0), 0.0);
  const auto l = make_linear_model(-1.0, 0.5);
  EXPECT_DOUBLE_EQ(drift(*l, 2.0), -2.0);
  EXPECT_DOUBLE_EQ(diffusion(*l, 2.0), 1.0);
}
