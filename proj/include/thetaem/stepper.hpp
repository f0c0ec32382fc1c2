#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "thetaem/models.hpp"
#include "thetaem/random.hpp"

namespace thetaem {

/// Parameters of the θ-Euler-Maruyama scheme
///
///   X_{k+1} = X_k + [(1-θ) f(X_k, kΔt) + θ f(X_{k+1}, (k+1)Δt)] Δt + g(X_k, kΔt) ΔB_k.
struct SchemeConfig {
  double theta = 1.0;
  double dt = 0.01;
  double newton_tol = 1e-12;  ///< relative: |F(x) - b| <= tol (|b| + |x| + θΔt|f(x)|)
  int newton_max_iter = 50;
  std::uint64_t seed = 0;
  double divergence_threshold = 1e150;

  /// Throws std::invalid_argument unless 0 <= theta <= 1, dt > 0 and the
  /// solver settings are positive.
  void validate() const;
  /// As validate(), and additionally requires dt < 1/(theta L) when
  /// theta > 0 and L > 0.
  void validate(double one_sided_lipschitz) const;
};

enum class PathStatus : std::uint8_t {
  Active,
  Diverged,  ///< |X| exceeded the divergence threshold or became non-finite
  Failed,    ///< implicit solve did not converge
};

struct PathState {
  std::uint64_t k = 0;
  std::vector<double> x;
  PathStatus status = PathStatus::Active;
  BrownianStream stream{0, 0};

  bool active() const { return status == PathStatus::Active; }
};

struct StepDiagnostics {
  int newton_iterations = 0;
  double residual = 0.0;    ///< |F(X_{k+1}, t_{k+1}) - b|
  double martingale = 0.0;  ///< M_k of the squared F-recursion
};

/// Thrown by implicit_solve on request; step() reports it through PathStatus.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

/// Scratch buffers for one worker. Reusing a workspace keeps the stepping
/// loop free of allocations.
struct StepWorkspace {
  StepWorkspace(std::size_t d, std::size_t m);

  std::size_t d;
  std::size_t m;
  std::vector<double> f;        // d
  std::vector<double> g;        // d*m, row-major
  std::vector<double> dB;       // m
  std::vector<double> b;        // d
  std::vector<double> r;        // d
  std::vector<double> trial;    // d
  std::vector<double> f_plus;   // d
  std::vector<double> f_minus;  // d
  std::vector<double> x_next;   // d
  std::vector<double> jac;      // d*d
  std::vector<double> delta;    // d
  std::vector<std::size_t> pivot;
};

/// F(x,t) = x - θΔt f(x,t), written to `out`.
void f_map(const SdeModel& model, std::span<const double> x, double t, double theta, double dt,
           std::span<double> out);
std::vector<double> f_map(const SdeModel& model, std::span<const double> x, double t,
                          double theta, double dt);

/// Solves F(x, t_next) = b for x by damped Newton with a central-difference
/// Jacobian, starting from x = b. On return `x` holds the last iterate.
SolveResult implicit_solve(const SdeModel& model, std::span<const double> b, double t_next,
                           double theta, double dt, double tol, int max_iter,
                           std::span<double> x, StepWorkspace& ws);

/// Allocating form; throws NonConvergence when the iteration budget runs out.
std::vector<double> implicit_solve(const SdeModel& model, std::span<const double> b,
                                   double t_next, double theta, double dt,
                                   const SchemeConfig& config);

/// M_k = |gΔB|^2 - |g|^2 Δt + 2<F(X_k), gΔB> + 2<f Δt, gΔB>.
double martingale_term(const SdeModel& model, std::span<const double> x, double t, double theta,
                       double dt, std::span<const double> dB);

/// Initial state of path `path` under `config`.
PathState make_path_state(std::span<const double> x0, std::uint64_t path,
                          const SchemeConfig& config);

/// Advances `state` by one θ-EM step. Inactive paths are left untouched.
/// A path whose new state is non-finite or exceeds the divergence threshold
/// is flagged Diverged; a failed implicit solve flags it Failed. In both
/// cases the state keeps the last accepted value.
StepDiagnostics step(const SdeModel& model, PathState& state, const SchemeConfig& config,
                     StepWorkspace& ws);

struct PathTrajectory {
  std::uint64_t path = 0;
  std::vector<double> states;  ///< (n+1) × d, row-major; rows after a freeze repeat the last value
  std::vector<StepDiagnostics> diagnostics;
  PathStatus status = PathStatus::Active;
  std::uint64_t frozen_at = 0;  ///< step index of the freeze when status != Active
};

/// Runs n_steps steps of path `path` from x0. Throws std::invalid_argument
/// for n_steps == 0.
PathTrajectory simulate_path(const SdeModel& model, std::span<const double> x0,
                             const SchemeConfig& config, std::uint64_t n_steps,
                             std::uint64_t path = 0);

}  // namespace thetaem
