#include "thetaem/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace thetaem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative roundoff allowance applied to the sum of term magnitudes.
constexpr double kRoundoff = 64.0 * std::numeric_limits<double>::epsilon();

double abs_dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::abs(u[i] * v[i]);
  return s;
}

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm_sq(std::span<const double> u) { return dot(u, u); }

bool all_finite(std::span<const double> u) {
  for (double v : u) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void validate_grid(const GridSpec& g) {
  if (!(g.x_min > 0.0) || !(g.x_max >= g.x_min)) {
    throw std::invalid_argument("grid: need 0 < x_min <= x_max");
  }
  if (g.n_x == 0 || g.n_t == 0) {
    throw std::invalid_argument("grid: point counts must be positive");
  }
  if (!(g.t_min >= 0.0) || !(g.t_max >= g.t_min)) {
    throw std::invalid_argument("grid: need 0 <= t_min <= t_max");
  }
}

// Tracks the worst (largest) margin seen so far.
class WorstTracker {
 public:
  explicit WorstTracker(std::string name) { report_.condition = std::move(name); }

  void observe(double lhs, double rhs, double scale, std::span<const double> x, double t,
               std::span<const double> y = {}) {
    ++report_.samples;
    double margin = lhs - rhs - kRoundoff * scale;
    if (std::isnan(margin)) margin = kInf;
    if (!seen_ || margin > report_.margin) {
      seen_ = true;
      report_.margin = margin;
      report_.worst_x.assign(x.begin(), x.end());
      report_.worst_y.assign(y.begin(), y.end());
      report_.worst_t = t;
      report_.worst_lhs = lhs;
      report_.worst_rhs = rhs;
    }
  }

  ConditionReport finish() {
    if (!seen_) report_.margin = -kInf;
    report_.holds = report_.margin <= 0.0;
    return std::move(report_);
  }

 private:
  ConditionReport report_;
  bool seen_ = false;
};

struct PointEval {
  std::vector<double> f;
  std::vector<double> g;
  bool finite = true;
};

PointEval evaluate(const SdeModel& model, std::span<const double> x, double t) {
  PointEval e;
  e.f.assign(model.state_dim(), 0.0);
  e.g.assign(model.state_dim() * model.noise_dim(), 0.0);
  model.drift(x, t, e.f);
  model.diffusion(x, t, e.g);
  e.finite = all_finite(e.f) && all_finite(e.g);
  return e;
}

double require_K1(const ConditionConstants& c) {
  if (!c.K1 || !(*c.K1 > 1.0)) {
    throw std::invalid_argument("condition constants: K1 > 1 required");
  }
  return *c.K1;
}

double require_C(const ConditionConstants& c) {
  if (!(c.C > 0.0)) throw std::invalid_argument("condition constants: C > 0 required");
  return c.C;
}

double require_K(const ConditionConstants& c) {
  if (!c.K || !(*c.K > 0.0)) throw std::invalid_argument("condition constants: K > 0 required");
  return *c.K;
}

}  // namespace

ConditionId parse_condition_id(std::string_view name) {
  if (name == "c1" || name == "poly-decay") return ConditionId::PolyDecay;
  if (name == "c2" || name == "exp-decay") return ConditionId::ExpDecay;
  if (name == "c3" || name == "one-sided-lipschitz") return ConditionId::OneSidedLipschitz;
  if (name == "growth-poly") return ConditionId::GrowthPoly;
  if (name == "growth-exp") return ConditionId::GrowthExp;
  if (name == "local-lipschitz") return ConditionId::LocalLipschitz;
  throw std::invalid_argument("unknown condition id '" + std::string(name) + "'");
}

std::string_view to_string(ConditionId id) {
  switch (id) {
    case ConditionId::PolyDecay: return "c1";
    case ConditionId::ExpDecay: return "c2";
    case ConditionId::OneSidedLipschitz: return "c3";
    case ConditionId::GrowthPoly: return "growth-poly";
    case ConditionId::GrowthExp: return "growth-exp";
    case ConditionId::LocalLipschitz: return "local-lipschitz";
  }
  return "?";
}

std::vector<double> grid_times(const GridSpec& grid) {
  validate_grid(grid);
  std::vector<double> ts(grid.n_t);
  for (std::size_t j = 0; j < grid.n_t; ++j) {
    ts[j] = grid.n_t == 1 ? grid.t_min
                          : grid.t_min + (grid.t_max - grid.t_min) * static_cast<double>(j) /
                                             static_cast<double>(grid.n_t - 1);
  }
  return ts;
}

std::vector<std::vector<double>> grid_points(const GridSpec& grid, std::size_t d) {
  validate_grid(grid);
  if (d == 0) throw std::invalid_argument("grid_points: dimension must be positive");

  std::vector<double> mags(grid.n_x);
  const double lo = std::log(grid.x_min);
  const double hi = std::log(grid.x_max);
  for (std::size_t i = 0; i < grid.n_x; ++i) {
    mags[i] = grid.n_x == 1 ? grid.x_min
                            : std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                                static_cast<double>(grid.n_x - 1));
  }
  // Pin the end points so nested grids share them exactly.
  mags.front() = grid.x_min;
  mags.back() = grid.x_max;

  std::vector<std::vector<double>> directions;
  for (std::size_t axis = 0; axis < d; ++axis) {
    std::vector<double> e(d, 0.0);
    e[axis] = 1.0;
    directions.push_back(e);
  }
  if (d > 1) directions.emplace_back(d, 1.0 / std::sqrt(static_cast<double>(d)));

  std::vector<std::vector<double>> points;
  if (grid.include_zero) points.emplace_back(d, 0.0);
  for (const auto& dir : directions) {
    for (double sign : {-1.0, 1.0}) {
      for (double m : mags) {
        std::vector<double> p(d);
        for (std::size_t i = 0; i < d; ++i) p[i] = sign * m * dir[i];
        points.push_back(std::move(p));
      }
    }
  }
  return points;
}

ConditionReport check_condition(const SdeModel& model, ConditionId id,
                                const ConditionConstants& constants, const GridSpec& grid) {
  const std::size_t d = model.state_dim();
  const auto points = grid_points(grid, d);
  const auto times = grid_times(grid);
  WorstTracker tracker{std::string(to_string(id))};

  switch (id) {
    case ConditionId::PolyDecay:
    case ConditionId::ExpDecay: {
      const bool poly = id == ConditionId::PolyDecay;
      const double K1 = poly ? require_K1(constants) : 0.0;
      const double C = require_C(constants);
      for (double t : times) {
        for (const auto& x : points) {
          const auto e = evaluate(model, x, t);
          const double lhs = e.finite ? 2.0 * dot(x, e.f) + norm_sq(e.g) : kInf;
          const double x_sq = norm_sq(x);
          const double head = poly ? C * std::pow(1.0 + t, -K1) : 0.0;
          const double tail = (poly ? K1 / (1.0 + t) : C) * x_sq;
          const double scale = e.finite ? 2.0 * abs_dot(x, e.f) + norm_sq(e.g) + head + tail : 0.0;
          tracker.observe(lhs, head - tail, scale, x, t);
        }
      }
      break;
    }
    case ConditionId::GrowthPoly:
    case ConditionId::GrowthExp: {
      const double K = require_K(constants);
      const bool poly = id == ConditionId::GrowthPoly;
      for (double t : times) {
        for (const auto& x : points) {
          const auto e = evaluate(model, x, t);
          const double lhs = e.finite ? std::sqrt(norm_sq(e.f)) : kInf;
          const double factor = poly ? K / std::sqrt(1.0 + t) : K;
          const double rhs = factor * std::sqrt(norm_sq(x));
          tracker.observe(lhs, rhs, e.finite ? lhs + rhs : 0.0, x, t);
        }
      }
      break;
    }
    case ConditionId::OneSidedLipschitz: {
      // All pairs of grid points at each time.
      std::vector<PointEval> evals(points.size());
      for (double t : times) {
        for (std::size_t i = 0; i < points.size(); ++i) evals[i] = evaluate(model, points[i], t);
        for (std::size_t i = 0; i < points.size(); ++i) {
          for (std::size_t j = i + 1; j < points.size(); ++j) {
            double lhs = kInf;
            double dist_sq = 0.0;
            double inner = 0.0;
            double scale = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              const double dx = points[i][c] - points[j][c];
              dist_sq += dx * dx;
              inner += dx * (evals[i].f[c] - evals[j].f[c]);
              scale += std::abs(dx) * (std::abs(evals[i].f[c]) + std::abs(evals[j].f[c]));
            }
            if (evals[i].finite && evals[j].finite) {
              lhs = inner;
            } else {
              scale = 0.0;
            }
            scale += std::abs(constants.L) * dist_sq;
            tracker.observe(lhs, constants.L * dist_sq, scale, points[i], t, points[j]);
          }
        }
      }
      break;
    }
    case ConditionId::LocalLipschitz: {
      // Difference quotients between consecutive grid points.
      const double bound = constants.K ? *constants.K : kInf;
      for (double t : times) {
        for (std::size_t i = 0; i + 1 < points.size(); ++i) {
          const auto& x = points[i];
          const auto& y = points[i + 1];
          const auto ex = evaluate(model, x, t);
          const auto ey = evaluate(model, y, t);
          double dist_sq = 0.0;
          for (std::size_t c = 0; c < d; ++c) dist_sq += (x[c] - y[c]) * (x[c] - y[c]);
          if (dist_sq == 0.0) continue;
          double q = kInf;
          if (ex.finite && ey.finite) {
            double df = 0.0;
            double dg = 0.0;
            for (std::size_t c = 0; c < ex.f.size(); ++c) df += std::pow(ex.f[c] - ey.f[c], 2);
            for (std::size_t c = 0; c < ex.g.size(); ++c) dg += std::pow(ex.g[c] - ey.g[c], 2);
            q = std::sqrt(std::max(df, dg) / dist_sq);
          }
          // Without a bound only non-finite quotients count as violations.
          const double rhs = std::isfinite(q) && !std::isfinite(bound) ? kInf : bound;
          tracker.observe(q, rhs, 0.0, x, t, y);
        }
      }
      break;
    }
  }
  return tracker.finish();
}

ConditionReport check_theorem_inequality(const SdeModel& model, DecayForm form, double theta,
                                         double dt, double epsilon,
                                         const ConditionConstants& constants,
                                         const GridSpec& grid) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0,1]");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const double C = require_C(constants);
  double K1 = 0.0;
  if (form == DecayForm::Polynomial) {
    K1 = require_K1(constants);
    if (!(epsilon > 0.0 && epsilon < K1 - 1.0)) {
      throw std::invalid_argument("epsilon must lie in (0, K1-1)");
    }
  } else if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0,1)");
  }

  const std::size_t d = model.state_dim();
  const auto points = grid_points(grid, d);
  const auto times = grid_times(grid);
  WorstTracker tracker{form == DecayForm::Polynomial ? "poly-inequality" : "exp-inequality"};
  std::vector<double> F(d);

  for (double t : times) {
    for (const auto& x : points) {
      const auto e = evaluate(model, x, t);
      double lhs = kInf;
      double rhs = 0.0;
      double scale = 0.0;
      if (e.finite) {
        const double f_sq = norm_sq(e.f);
        const double step_term = (1.0 - 2.0 * theta) * dt * f_sq;
        lhs = 2.0 * dot(x, e.f) + norm_sq(e.g) + step_term;
        for (std::size_t c = 0; c < d; ++c) F[c] = x[c] - theta * dt * e.f[c];
        const double F_sq = norm_sq(F);
        const double head = form == DecayForm::Polynomial ? C * std::pow(1.0 + t, -K1) : 0.0;
        const double tail = form == DecayForm::Polynomial ? (K1 - epsilon) / (1.0 + t) * F_sq
                                                          : C * (1.0 - epsilon) * F_sq;
        rhs = head - tail;
        scale = 2.0 * abs_dot(x, e.f) + norm_sq(e.g) + std::abs(step_term) + head + tail;
      }
      tracker.observe(lhs, rhs, scale, x, t);
    }
  }
  return tracker.finish();
}

}  // namespace thetaem
