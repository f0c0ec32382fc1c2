#include "thetaem/step_size.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace thetaem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lipschitz_limit(double theta, double L) {
  return (theta > 0.0 && L > 0.0) ? 1.0 / (theta * L) : kInf;
}

}  // namespace

StabilityTheorem parse_theorem(std::string_view name) {
  if (name == "poly-implicit") return StabilityTheorem::PolyImplicit;
  if (name == "poly-explicit") return StabilityTheorem::PolyExplicit;
  if (name == "exp-implicit") return StabilityTheorem::ExpImplicit;
  if (name == "exp-explicit") return StabilityTheorem::ExpExplicit;
  throw std::invalid_argument("unknown theorem id '" + std::string(name) + "'");
}

std::string_view to_string(StabilityTheorem theorem) {
  switch (theorem) {
    case StabilityTheorem::PolyImplicit: return "poly-implicit";
    case StabilityTheorem::PolyExplicit: return "poly-explicit";
    case StabilityTheorem::ExpImplicit: return "exp-implicit";
    case StabilityTheorem::ExpExplicit: return "exp-explicit";
  }
  return "?";
}

bool is_polynomial(StabilityTheorem theorem) {
  return theorem == StabilityTheorem::PolyImplicit || theorem == StabilityTheorem::PolyExplicit;
}

double recommend_dt(StabilityTheorem theorem, double theta, double epsilon,
                    const ConditionConstants& constants) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0,1]");

  const bool implicit =
      theorem == StabilityTheorem::PolyImplicit || theorem == StabilityTheorem::ExpImplicit;
  if (implicit && !(theta > 0.5)) {
    throw std::invalid_argument("theorem inapplicable at theta <= 1/2 (requires theta > 1/2)");
  }
  if (!implicit && theta > 0.5) {
    throw std::invalid_argument("theorem requires 0 <= theta <= 1/2");
  }

  double K1 = 0.0;
  if (is_polynomial(theorem)) {
    if (!constants.K1 || !(*constants.K1 > 1.0)) throw std::invalid_argument("K1 > 1 required");
    K1 = *constants.K1;
    if (!(epsilon > 0.0 && epsilon < K1 - 1.0)) {
      throw std::invalid_argument("epsilon must lie in (0, K1-1)");
    }
  } else {
    if (!(constants.C > 0.0)) throw std::invalid_argument("C > 0 required");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  }
  double K = 0.0;
  if (!implicit) {
    if (!constants.K || !(*constants.K > 0.0)) {
      throw std::invalid_argument("linear growth constant K required for theta <= 1/2");
    }
    K = *constants.K;
  }

  const double C = constants.C;
  const double lip = lipschitz_limit(theta, constants.L);
  const double th2 = theta * theta;

  switch (theorem) {
    case StabilityTheorem::PolyImplicit:
      return std::min(lip, (2.0 * theta - 1.0) * std::min(epsilon, 1.0) /
                               (K1 * (K1 - epsilon) * th2));

    case StabilityTheorem::PolyExplicit: {
      // Largest dt with K^2 [(1-2θ) dt + (K1-ε) θ^2 dt^2] + 2 K K1 θ dt <= ε.
      const double qa = K * K * (K1 - epsilon) * th2;
      const double qb = K * K * (1.0 - 2.0 * theta) + 2.0 * K * K1 * theta;
      const double root = qa > 0.0
                              ? 2.0 * epsilon / (qb + std::sqrt(qb * qb + 4.0 * qa * epsilon))
                              : epsilon / qb;
      return std::min(lip, root);
    }

    case StabilityTheorem::ExpImplicit:
      return std::min({lip, epsilon * (2.0 * theta - 1.0) / (C * (1.0 - epsilon) * th2),
                       1.0 / (C * (1.0 - epsilon))});

    case StabilityTheorem::ExpExplicit: {
      const double middle =
          theta > 0.0 ? (K * (1.0 - 2.0 * theta) + 2.0 * C * theta * (1.0 - epsilon)) /
                            (K * C * (1.0 - epsilon) * th2)
                      : kInf;
      const double last =
          C * epsilon /
          (2.0 * (K * K * (1.0 - 2.0 * theta) + 2.0 * K * C * theta * (1.0 - epsilon)));
      return std::min({lip, middle, last});
    }
  }
  return 0.0;
}

}  // namespace thetaem
