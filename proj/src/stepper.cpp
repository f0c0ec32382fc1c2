#include "thetaem/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace thetaem {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

bool finite_and_bounded(std::span<const double> v, double threshold) {
  for (double e : v) {
    if (!std::isfinite(e) || std::abs(e) > threshold) return false;
  }
  return true;
}

// r = x - θΔt f(x, t) - b
// r = F(x) - b. Returns |x| + θΔt|f(x)|, the size of the terms in F(x).
double residual(const SdeModel& model, std::span<const double> x, std::span<const double> b,
                double t, double theta_dt, std::span<double> f_buf, std::span<double> r) {
  model.drift(x, t, f_buf);
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - theta_dt * f_buf[i] - b[i];
  return norm(x) + theta_dt * norm(f_buf);
}

// In-place LU with partial pivoting; solves A z = rhs, overwriting rhs.
bool lu_solve(std::span<double> a, std::span<std::size_t> piv, std::span<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t p = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(a[row * n + col]) > std::abs(a[p * n + col])) p = row;
    }
    piv[col] = p;
    if (a[p * n + col] == 0.0 || !std::isfinite(a[p * n + col])) return false;
    if (p != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[p * n + j], a[col * n + j]);
      std::swap(rhs[p], rhs[col]);
    }
    for (std::size_t row = col + 1; row < n; ++row) {
      const double m = a[row * n + col] / a[col * n + col];
      a[row * n + col] = m;
      for (std::size_t j = col + 1; j < n; ++j) a[row * n + j] -= m * a[col * n + j];
      rhs[row] -= m * rhs[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * rhs[j];
    rhs[i] = s / a[i * n + i];
  }
  return true;
}

}  // namespace

void SchemeConfig::validate() const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0,1]");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("newton tolerance must be > 0");
  if (newton_max_iter < 1) throw std::invalid_argument("newton max iterations must be >= 1");
  if (!(divergence_threshold > 0.0)) {
    throw std::invalid_argument("divergence threshold must be > 0");
  }
}

void SchemeConfig::validate(double one_sided_lipschitz) const {
  validate();
  if (theta > 0.0 && one_sided_lipschitz > 0.0 && !(dt < 1.0 / (theta * one_sided_lipschitz))) {
    throw std::invalid_argument("dt must be < 1/(theta L) for a well-posed implicit step");
  }
}

StepWorkspace::StepWorkspace(std::size_t d_, std::size_t m_)
    : d(d_), m(m_), f(d_), g(d_ * m_), dB(m_), b(d_), r(d_), trial(d_), f_plus(d_),
      f_minus(d_), x_next(d_), jac(d_ * d_), delta(d_), pivot(d_) {}

void f_map(const SdeModel& model, std::span<const double> x, double t, double theta, double dt,
           std::span<double> out) {
  model.drift(x, t, out);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - theta * dt * out[i];
}

std::vector<double> f_map(const SdeModel& model, std::span<const double> x, double t,
                          double theta, double dt) {
  std::vector<double> out(x.size());
  f_map(model, x, t, theta, dt, out);
  return out;
}

SolveResult implicit_solve(const SdeModel& model, std::span<const double> b, double t_next,
                           double theta, double dt, double tol, int max_iter,
                           std::span<double> x, StepWorkspace& ws) {
  const std::size_t d = b.size();
  const double theta_dt = theta * dt;
  // Relative to the magnitudes in F(x) - b, so tiny right-hand sides are
  // solved as accurately as large ones.
  const double b_norm = norm(b);
  std::copy(b.begin(), b.end(), x.begin());

  SolveResult result;
  double target = tol * (b_norm + residual(model, x, b, t_next, theta_dt, ws.f, ws.r));
  double r_norm = norm(ws.r);

  while (true) {
    result.residual = r_norm;
    if (r_norm <= target) {
      result.converged = true;
      return result;
    }
    if (!std::isfinite(r_norm) || result.iterations >= max_iter) return result;

    // Jacobian of F: I - θΔt Df, central differences.
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = x[j];
      const double h = std::max(1e-7, 1e-7 * std::abs(xj));
      x[j] = xj + h;
      model.drift(x, t_next, ws.f_plus);
      x[j] = xj - h;
      model.drift(x, t_next, ws.f_minus);
      x[j] = xj;
      for (std::size_t i = 0; i < d; ++i) {
        const double dfdx = (ws.f_plus[i] - ws.f_minus[i]) / (2.0 * h);
        ws.jac[i * d + j] = (i == j ? 1.0 : 0.0) - theta_dt * dfdx;
      }
    }
    for (std::size_t i = 0; i < d; ++i) ws.delta[i] = -ws.r[i];
    ++result.iterations;
    if (!lu_solve(ws.jac, ws.pivot, ws.delta)) return result;

    // Damped update: halve the step until the residual decreases.
    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving <= 30; ++halving) {
      for (std::size_t i = 0; i < d; ++i) ws.trial[i] = x[i] + lambda * ws.delta[i];
      const double trial_target =
          tol * (b_norm + residual(model, ws.trial, b, t_next, theta_dt, ws.f, ws.r));
      const double trial_norm = norm(ws.r);
      if (trial_norm < r_norm || trial_norm <= trial_target) {
        std::copy(ws.trial.begin(), ws.trial.end(), x.begin());
        r_norm = trial_norm;
        target = trial_target;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      // Stagnation: restore the residual of the current iterate and stop.
      target = tol * (b_norm + residual(model, x, b, t_next, theta_dt, ws.f, ws.r));
      result.residual = norm(ws.r);
      result.converged = result.residual <= target;
      return result;
    }
  }
}

std::vector<double> implicit_solve(const SdeModel& model, std::span<const double> b,
                                   double t_next, double theta, double dt,
                                   const SchemeConfig& config) {
  if (!(theta > 0.0)) throw std::invalid_argument("implicit_solve requires theta > 0");
  StepWorkspace ws(model.state_dim(), model.noise_dim());
  std::vector<double> x(b.size());
  const auto res = implicit_solve(model, b, t_next, theta, dt, config.newton_tol,
                                  config.newton_max_iter, x, ws);
  if (!res.converged) {
    throw NonConvergence("implicit solve did not converge after " +
                         std::to_string(res.iterations) + " iterations (residual " +
                         std::to_string(res.residual) + ")");
  }
  return x;
}

double martingale_term(const SdeModel& model, std::span<const double> x, double t, double theta,
                       double dt, std::span<const double> dB) {
  const std::size_t d = model.state_dim();
  const std::size_t m = model.noise_dim();
  std::vector<double> f(d), g(d * m);
  model.drift(x, t, f);
  model.diffusion(x, t, g);
  double gdB_sq = 0.0, g_sq = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double gdB = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      gdB += g[i * m + j] * dB[j];
      g_sq += g[i * m + j] * g[i * m + j];
    }
    gdB_sq += gdB * gdB;
    // 2<F + fΔt, gΔB> with F = x - θΔt f
    cross += (x[i] + (1.0 - theta) * dt * f[i]) * gdB;
  }
  return gdB_sq - g_sq * dt + 2.0 * cross;
}

PathState make_path_state(std::span<const double> x0, std::uint64_t path,
                          const SchemeConfig& config) {
  PathState s;
  s.x.assign(x0.begin(), x0.end());
  s.stream = BrownianStream(config.seed, path);
  if (!finite_and_bounded(s.x, config.divergence_threshold)) s.status = PathStatus::Diverged;
  return s;
}

StepDiagnostics step(const SdeModel& model, PathState& state, const SchemeConfig& config,
                     StepWorkspace& ws) {
  StepDiagnostics diag;
  if (!state.active()) return diag;

  const std::size_t d = ws.d;
  const std::size_t m = ws.m;
  const double dt = config.dt;
  const double theta = config.theta;
  const double t = static_cast<double>(state.k) * dt;

  state.stream.increment(state.k, dt, ws.dB);
  model.drift(state.x, t, ws.f);
  model.diffusion(state.x, t, ws.g);

  // b = X_k + (1-θ) f Δt + g ΔB, the explicit predictor.
  double gdB_sq = 0.0, g_sq = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double gdB = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      gdB += ws.g[i * m + j] * ws.dB[j];
      g_sq += ws.g[i * m + j] * ws.g[i * m + j];
    }
    ws.b[i] = state.x[i] + (1.0 - theta) * ws.f[i] * dt + gdB;
    gdB_sq += gdB * gdB;
    cross += (state.x[i] + (1.0 - theta) * dt * ws.f[i]) * gdB;
  }
  diag.martingale = gdB_sq - g_sq * dt + 2.0 * cross;

  if (theta == 0.0) {
    if (!finite_and_bounded(ws.b, config.divergence_threshold)) {
      state.status = PathStatus::Diverged;
      return diag;
    }
    std::copy(ws.b.begin(), ws.b.end(), state.x.begin());
    ++state.k;
    return diag;
  }

  if (!finite_and_bounded(ws.b, config.divergence_threshold)) {
    state.status = PathStatus::Diverged;
    return diag;
  }
  const auto res = implicit_solve(model, ws.b, t + dt, theta, dt, config.newton_tol,
                                  config.newton_max_iter, ws.x_next, ws);
  diag.newton_iterations = res.iterations;
  diag.residual = res.residual;
  if (!res.converged) {
    state.status = PathStatus::Failed;
    return diag;
  }
  if (!finite_and_bounded(ws.x_next, config.divergence_threshold)) {
    state.status = PathStatus::Diverged;
    return diag;
  }
  std::copy(ws.x_next.begin(), ws.x_next.end(), state.x.begin());
  ++state.k;
  return diag;
}

PathTrajectory simulate_path(const SdeModel& model, std::span<const double> x0,
                             const SchemeConfig& config, std::uint64_t n_steps,
                             std::uint64_t path) {
  if (n_steps == 0) throw std::invalid_argument("simulate_path: n_steps must be >= 1");
  if (x0.size() != model.state_dim()) {
    throw std::invalid_argument("simulate_path: x0 dimension does not match the model");
  }
  config.validate();

  const std::size_t d = model.state_dim();
  StepWorkspace ws(d, model.noise_dim());
  PathState state = make_path_state(x0, path, config);

  PathTrajectory traj;
  traj.path = path;
  traj.states.reserve((n_steps + 1) * d);
  traj.diagnostics.reserve(n_steps);
  traj.states.insert(traj.states.end(), state.x.begin(), state.x.end());
  if (!state.active()) {
    traj.status = state.status;
  }
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    if (state.active()) {
      traj.diagnostics.push_back(step(model, state, config, ws));
      if (!state.active()) {
        traj.status = state.status;
        traj.frozen_at = k;
      }
    } else {
      traj.diagnostics.push_back(StepDiagnostics{});
    }
    traj.states.insert(traj.states.end(), state.x.begin(), state.x.end());
  }
  return traj;
}

}  // namespace thetaem
