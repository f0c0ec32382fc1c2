#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace thetaem {

/// ln Γ(x) for x > 0 (Lanczos, g = 7, with reflection below 1/2).
double log_gamma(double x);

/// ln(Γ(x + eta) / Γ(x)).
double log_gamma_ratio(double x, double eta);

/// Finite product ∏_{i=a}^{b} (1 - αδ / (1 + (i+β)δ)) and its closed form
/// as a ratio of gamma functions.
struct GammaProductSpec {
  std::int64_t a = 0;
  std::int64_t b = 0;
  double alpha = 1.0;
  double beta = 0.0;
  double delta = 0.5;

  /// Throws std::invalid_argument unless 0 <= a <= b, α > 0, β >= 0 and 0 < αδ < 1.
  void validate() const;
};

double gamma_product_lhs(const GammaProductSpec& spec);

/// Γ(b+1+1/δ+β-α)/Γ(b+1+1/δ+β) · Γ(a+1/δ+β)/Γ(a+1/δ+β-α), evaluated in log space.
double gamma_product_rhs(const GammaProductSpec& spec);

enum class BoundSide { Less, Greater };

struct GammaRatioBound {
  double ratio = 0.0;  ///< Γ(x+η)/Γ(x)
  double bound = 0.0;  ///< x^η
  BoundSide side = BoundSide::Less;
  double log_ratio = 0.0;
  double log_bound = 0.0;

  /// True when the asserted strict inequality holds (compared in log space).
  bool holds() const {
    return side == BoundSide::Less ? log_ratio < log_bound : log_ratio > log_bound;
  }
};

/// Γ(x+η)/Γ(x) against x^η: the ratio is below x^η for 0 < η < 1 and above
/// it for η > 1. Throws std::invalid_argument for x <= 0, η <= 0 or η == 1.
GammaRatioBound gamma_ratio_bounds(double x, double eta);

struct BoundCurve {
  std::vector<std::uint64_t> k;
  std::vector<double> t;
  std::vector<double> bound;
};

/// Upper bound on E|X_k|^2 under the polynomial decay condition for θ > 1/2:
///   2^{K1-ε} (|F(x0,0)|^2 + C 2^{K1-ε} + Cθ) (kΔt + 1)^{-(K1-ε)+1}.
/// Requires 0 < ε < K1 - 1.
BoundCurve polynomial_bound_curve(double x0_F_sq, double C, double K1, double epsilon,
                                  double theta, double dt, std::uint64_t k_max);

struct ExponentialBoundCurves {
  BoundCurve geometric;  ///< |F(x0,0)|^2 (1 - C(1-ε)Δt)^k
  BoundCurve envelope;   ///< |F(x0,0)|^2 exp(-C(1-ε) kΔt)
};

/// Requires 0 < ε < 1 and C(1-ε)Δt < 1.
ExponentialBoundCurves exponential_bound_curve(double x0_F_sq, double C, double epsilon,
                                               double dt, std::uint64_t k_max);

/// Summary of a sweep over one of the fixed verification grids.
struct GridCheck {
  std::size_t points = 0;
  std::size_t failures = 0;
  double worst = 0.0;  ///< largest relative error (product) or smallest log gap (ratio)
  bool passed() const { return points > 0 && failures == 0; }
};

/// Product identity over 0 <= a <= b <= 200, δ ∈ {0.5, 0.1, 0.02, 0.005},
/// α ∈ {1.3, 1.9, 2.7} with αδ < 1, β ∈ {0, 0.5, 1.5}; a point fails when
/// |lhs - rhs| / lhs > tol.
GridCheck verify_product_grid(double tol = 1e-10);

/// Strict ratio bounds over x ∈ {0.1, 0.5, 1, 2, 10, 100, 1e4} and
/// η ∈ {0.1, 0.5, 0.9, 1.1, 2, 3.7}.
GridCheck verify_ratio_grid();

}  // namespace thetaem
