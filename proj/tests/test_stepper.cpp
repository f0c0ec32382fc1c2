#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "thetaem/stepper.hpp"

using namespace thetaem;

namespace {

std::unique_ptr<SdeModel> decay_model() { return make_linear_model(-1.0, 0.0); }

const PolyModelParams kCubic{-2.0, -2.0, 2.0, 3.0, 2.0};

double bisect(double lo, double hi, auto&& g) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(FMap, Examples) {
  const auto zero = make_zero_model();
  for (double theta : {0.0, 0.5, 1.0}) {
    const double x[] = {2.5};
    EXPECT_EQ(f_map(*zero, x, 1.0, theta, 0.3)[0], 2.5);
  }
  const auto m = decay_model();
  const double one[] = {1.0};
  EXPECT_DOUBLE_EQ(f_map(*m, one, 0.0, 1.0, 0.1)[0], 1.1);
  EXPECT_EQ(f_map(*m, one, 0.0, 0.0, 0.1)[0], 1.0);
}

TEST(ImplicitSolve, Examples) {
  SchemeConfig cfg;
  cfg.theta = 1.0;
  cfg.dt = 0.1;
  const double b[] = {1.0};
  EXPECT_EQ(implicit_solve(*make_zero_model(), b, 0.1, 1.0, 0.1, cfg)[0], 1.0);
  EXPECT_NEAR(implicit_solve(*decay_model(), b, 0.1, 1.0, 0.1, cfg)[0], 1.0 / 1.1, 2e-12);
}

TEST(ImplicitSolve, CubicAgainstBisection) {
  const auto m = make_poly_model(kCubic);
  SchemeConfig cfg;
  cfg.dt = 0.01;
  const double b[] = {1.0};
  const double x = implicit_solve(*m, b, 0.01, 1.0, 0.01, cfg)[0];
  const double ref = bisect(0.0, 1.0, [](double y) { return y + 0.01 * (2 * y + 2 * y * y * y) - 1; });
  EXPECT_NEAR(x, ref, 1e-13);
  EXPECT_NEAR(x, 0.96288739036137463, 1e-13);
  EXPECT_LT(std::abs(x + 0.01 * (2 * x + 2 * x * x * x) - 1.0), 1e-12);
}

TEST(ImplicitSolve, LargeArgumentsConverge) {
  const auto m = make_poly_model(kCubic);
  SchemeConfig cfg;
  cfg.dt = 0.01;
  for (double bv : {-1e6, -300.0, 1e-9, 50.0, 1e8}) {
    const double b[] = {bv};
    const double x = implicit_solve(*m, b, 0.0, 1.0, 0.01, cfg)[0];
    const double r = x + 0.01 * (2 * x + 2 * x * x * x) - bv;
    const double scale = std::abs(bv) + std::abs(x) + 0.01 * std::abs(2 * x + 2 * x * x * x);
    EXPECT_LE(std::abs(r), 1e-12 * scale) << bv;
  }
}

TEST(ImplicitSolve, ReportsNonConvergence) {
  // f(x) = x^2 + 1 with θΔt = 1: x - x^2 - 1 = b has no real root for b = 0.
  CallableModel m(
      1, 1, [](std::span<const double> x, double, std::span<double> o) { o[0] = x[0] * x[0] + 1; },
      [](std::span<const double>, double, std::span<double> o) { o[0] = 0; }, "no-root");
  SchemeConfig cfg;
  cfg.dt = 1.0;
  const double b[] = {0.0};
  EXPECT_THROW(implicit_solve(m, b, 0.0, 1.0, 1.0, cfg), NonConvergence);
  EXPECT_THROW(implicit_solve(m, b, 0.0, 0.0, 1.0, cfg), std::invalid_argument);
}

TEST(Step, DeterministicClosedForms) {
  SchemeConfig cfg;
  cfg.dt = 0.1;
  const double x0[] = {1.0};
  cfg.theta = 1.0;
  const auto implicit = simulate_path(*decay_model(), x0, cfg, 10);
  // Each solve carries the relative Newton tolerance.
  EXPECT_NEAR(implicit.states[10], 0.38554328942953175, 1e-12);
  for (int k = 0; k <= 10; ++k) EXPECT_NEAR(implicit.states[k], std::pow(1.1, -k), 1e-12);

  cfg.theta = 0.0;
  const auto explicit_path = simulate_path(*decay_model(), x0, cfg, 10);
  for (int k = 0; k <= 10; ++k) {
    EXPECT_NEAR(explicit_path.states[k], std::pow(0.9, k), 1e-15);
    if (k < 10) EXPECT_EQ(explicit_path.diagnostics[k].newton_iterations, 0);
  }
}

TEST(Step, ZeroModelStaysPut) {
  SchemeConfig cfg;
  cfg.seed = 99;
  const double x0[] = {-3.25};
  const auto p = simulate_path(*make_zero_model(), x0, cfg, 5);
  for (double v : p.states) EXPECT_EQ(v, -3.25);
}

TEST(Step, ExplicitMatchesFormula) {
  const auto m = make_poly_model(kCubic);
  SchemeConfig cfg;
  cfg.theta = 0.0;
  cfg.dt = 0.01;
  cfg.seed = 5;
  auto state = make_path_state(std::vector<double>{0.7}, 3, cfg);
  StepWorkspace ws(1, 1);
  double dB[1];
  state.stream.increment(0, cfg.dt, dB);
  const double x = 0.7;
  const double expect = x + (-2 * x - 2 * x * x * x) * 0.01 + 2 * x * x * dB[0];
  step(*m, state, cfg, ws);
  EXPECT_EQ(state.x[0], expect);
  EXPECT_EQ(state.k, 1u);
}

TEST(Step, FRecursionAndSquaredExpansion) {
  const auto m = make_poly_model(kCubic);
  for (double theta : {0.0, 0.3, 0.6, 1.0}) {
    SchemeConfig cfg;
    cfg.theta = theta;
    cfg.dt = 0.01;
    cfg.seed = 17;
    StepWorkspace ws(1, 1);
    for (std::uint64_t path = 0; path < 20; ++path) {
      auto state = make_path_state(std::vector<double>{1.5}, path, cfg);
      for (int k = 0; k < 200; ++k) {
        const double x = state.x[0];
        const double t = static_cast<double>(state.k) * cfg.dt;
        double dB[1];
        state.stream.increment(state.k, cfg.dt, dB);
        const double f = -2 * x - 2 * x * x * x;
        const double g = 2 * x * x;
        const double Fk = x - theta * cfg.dt * f;
        const auto diag = step(*m, state, cfg, ws);
        ASSERT_TRUE(state.active());
        const double y = state.x[0];
        const double Fk1 = f_map(*m, std::vector<double>{y}, t + cfg.dt, theta, cfg.dt)[0];
        const double b = Fk + f * cfg.dt + g * dB[0];
        EXPECT_LE(std::abs(Fk1 - b), 4 * cfg.newton_tol * std::abs(b));

        const double M = martingale_term(*m, std::vector<double>{x}, t, theta, cfg.dt, dB);
        EXPECT_DOUBLE_EQ(M, diag.martingale);
        const double drift_part = (2 * x * f + g * g + (1 - 2 * theta) * f * f * cfg.dt) * cfg.dt;
        const double lhs = b * b - Fk * Fk - drift_part - M;
        const double scale = b * b + Fk * Fk + std::abs(drift_part) + std::abs(M);
        EXPECT_LE(std::abs(lhs), 1e-9 * scale);
      }
    }
  }
}

TEST(Step, MartingaleHasZeroMean) {
  const auto m = make_poly_model(kCubic);
  const double x[] = {1.0};
  const double dt = 0.01;
  BrownianStream s(3, 0);
  const int n = 100000;
  double sum = 0, sq = 0;
  double dB[1];
  for (int i = 0; i < n; ++i) {
    s.increment(static_cast<std::uint64_t>(i), dt, dB);
    const double M = martingale_term(*m, x, 0.0, 1.0, dt, dB);
    sum += M;
    sq += M * M;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sq / n - mean * mean) * n / (n - 1));
  EXPECT_LE(std::abs(mean), 5 * sd / std::sqrt(n));
}

TEST(Step, DivergedPathsFreeze) {
  const auto m = make_poly_model({-1.0, -1.0, 1.0, 2.0, 1.0});
  SchemeConfig cfg;
  cfg.theta = 0.0;
  cfg.dt = 0.01;
  cfg.divergence_threshold = 1e50;
  const double x0[] = {1e4};
  const auto p = simulate_path(*m, x0, cfg, 30);
  EXPECT_EQ(p.status, PathStatus::Diverged);
  const double frozen = p.states[p.frozen_at];
  EXPECT_LE(std::abs(frozen), 1e50);
  for (std::size_t k = p.frozen_at; k < p.states.size(); ++k) EXPECT_EQ(p.states[k], frozen);
}

TEST(SimulatePath, Contract) {
  const auto m = make_poly_model(kCubic);
  SchemeConfig cfg;
  cfg.seed = 123;
  const double x0[] = {1.0};
  EXPECT_THROW(simulate_path(*m, x0, cfg, 0), std::invalid_argument);
  const auto a = simulate_path(*m, x0, cfg, 100, 4);
  const auto b = simulate_path(*m, x0, cfg, 100, 4);
  EXPECT_EQ(a.states, b.states);
  const auto c = simulate_path(*m, x0, cfg, 100, 5);
  EXPECT_NE(a.states, c.states);

  const auto det = decay_model();
  SchemeConfig other = cfg;
  other.seed = 999;
  EXPECT_EQ(simulate_path(*det, x0, cfg, 20).states, simulate_path(*det, x0, other, 20).states);
}

TEST(SchemeConfig, Validation) {
  SchemeConfig cfg;
  cfg.theta = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.theta = 1.0;
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.dt = 0.5;
  EXPECT_NO_THROW(cfg.validate(-3.0));
  EXPECT_THROW(cfg.validate(2.0), std::invalid_argument);
  EXPECT_NO_THROW(cfg.validate(1.9));
}
