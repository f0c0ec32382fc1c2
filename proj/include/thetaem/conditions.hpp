#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thetaem/models.hpp"

namespace thetaem {

/// Constants appearing in the stability conditions.
///
/// `L <= 0` is allowed and means the one-sided Lipschitz bound imposes no
/// step-size restriction on the implicit solve.
struct ConditionConstants {
  std::optional<double> K1;  ///< polynomial decay constant, > 1
  double C = 1.0;            ///< drift dominance constant, > 0
  double L = 0.0;            ///< one-sided Lipschitz constant
  std::optional<double> K;   ///< linear growth constant, > 0
};

enum class ConditionId {
  PolyDecay,         ///< 2<x,f> + |g|^2 <= C(1+t)^{-K1} - K1 (1+t)^{-1} |x|^2
  ExpDecay,          ///< 2<x,f> + |g|^2 <= -C |x|^2
  OneSidedLipschitz, ///< <x-y, f(x)-f(y)> <= L |x-y|^2
  GrowthPoly,        ///< |f| <= K (1+t)^{-1/2} |x|
  GrowthExp,         ///< |f| <= K |x|
  LocalLipschitz,    ///< sampled difference quotients of f and g
};

/// Parses "c1", "c2", "c3", "growth-poly", "growth-exp", "local-lipschitz".
ConditionId parse_condition_id(std::string_view name);
std::string_view to_string(ConditionId id);

/// Sampling box for condition checks.
///
/// |x| magnitudes are log-spaced in [x_min, x_max] and taken with both signs;
/// x = 0 is added when `include_zero` is set. In dimension d > 1 every
/// magnitude is applied along ±e_i and ±(1,...,1)/sqrt(d).
struct GridSpec {
  double x_min = 1e-6;
  double x_max = 1e3;
  std::size_t n_x = 201;
  double t_min = 0.0;
  double t_max = 100.0;
  std::size_t n_t = 51;
  bool include_zero = true;
};

/// Outcome of a grid check. `margin` is LHS - RHS - τ·S at the worst
/// point, where S is the sum of the magnitudes of the terms on both sides
/// and τ = 64 ulp absorbs cancellation error; the condition holds iff
/// margin <= 0.
struct ConditionReport {
  std::string condition;
  bool holds = true;
  double margin = 0.0;
  std::vector<double> worst_x;
  std::vector<double> worst_y;  ///< second point, pairwise conditions only
  double worst_t = 0.0;
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
  std::size_t samples = 0;
};

/// Enumerates the state points of `grid` for a model of dimension d.
std::vector<std::vector<double>> grid_points(const GridSpec& grid, std::size_t d);
std::vector<double> grid_times(const GridSpec& grid);

/// Evaluates a stability condition on every grid point (or pair of points
/// for the pairwise conditions) and reports the largest violation.
/// Non-finite model output counts as a violation with margin +inf.
ConditionReport check_condition(const SdeModel& model, ConditionId id,
                                const ConditionConstants& constants, const GridSpec& grid);

enum class DecayForm { Polynomial, Exponential };

/// Checks the step-dependent inequality used by the stability proofs,
///
///   2<x,f> + |g|^2 + (1-2θ)Δt |f|^2 <= C(1+t)^{-K1} - (K1-ε)(1+t)^{-1} |F|^2  (polynomial)
///   2<x,f> + |g|^2 + (1-2θ)Δt |f|^2 <= -C(1-ε) |F|^2                          (exponential)
///
/// with F(x,t) = x - θΔt f(x,t).
ConditionReport check_theorem_inequality(const SdeModel& model, DecayForm form, double theta,
                                         double dt, double epsilon,
                                         const ConditionConstants& constants,
                                         const GridSpec& grid);

}  // namespace thetaem
