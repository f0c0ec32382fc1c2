#pragma once

#include <string_view>

#include "thetaem/conditions.hpp"

namespace thetaem {

/// Stability results with an explicit step-size condition.
enum class StabilityTheorem {
  PolyImplicit,  ///< polynomial mean-square decay, 1/2 < θ <= 1
  PolyExplicit,  ///< polynomial mean-square decay, 0 <= θ <= 1/2, needs growth constant K
  ExpImplicit,   ///< exponential mean-square decay, 1/2 < θ <= 1
  ExpExplicit,   ///< exponential mean-square decay, 0 <= θ <= 1/2, needs growth constant K
};

/// Parses "poly-implicit", "poly-explicit", "exp-implicit", "exp-explicit".
StabilityTheorem parse_theorem(std::string_view name);
std::string_view to_string(StabilityTheorem theorem);
bool is_polynomial(StabilityTheorem theorem);

/// Largest step size for which the chosen stability result's proof applies.
/// 1/(θL) is +inf when L <= 0 or θ = 0. Throws std::invalid_argument when θ,
/// ε or the constants are outside the theorem's range.
double recommend_dt(StabilityTheorem theorem, double theta, double epsilon,
                    const ConditionConstants& constants);

}  // namespace thetaem
