#include "thetaem/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace thetaem {

namespace {

constexpr double kLanczosG = 7.0;
constexpr double kLanczosCoeff[] = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// Tail of the Stirling series, ln Γ(x) - [(x-1/2) ln x - x + ln(2π)/2].
double stirling_tail(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12.0 -
                inv2 * (1.0 / 360.0 -
                        inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("log_gamma: argument must be finite and > 0");
  }
  if (x < 0.5) {
    // Γ(x)Γ(1-x) = π / sin(πx)
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double sum = kLanczosCoeff[0];
  for (int i = 1; i < 9; ++i) sum += kLanczosCoeff[i] / (z + static_cast<double>(i));
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

double log_gamma_ratio(double x, double eta) {
  if (x >= 20.0 && x + eta >= 20.0) {
    // Difference of Stirling expansions, arranged so the O(x ln x) parts
    // cancel analytically:
    //   (x-1/2) ln(1+η/x) + η ln(x+η) - η + tail(x+η) - tail(x)
    return (x - 0.5) * std::log1p(eta / x) + eta * std::log(x + eta) - eta +
           (stirling_tail(x + eta) - stirling_tail(x));
  }
  return log_gamma(x + eta) - log_gamma(x);
}

void GammaProductSpec::validate() const {
  if (a < 0 || b < a) throw std::invalid_argument("gamma product: need 0 <= a <= b");
  if (!(alpha > 0.0)) throw std::invalid_argument("gamma product: alpha must be > 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("gamma product: beta must be >= 0");
  if (!(delta > 0.0 && alpha * delta < 1.0)) {
    throw std::invalid_argument("gamma product: need 0 < delta < 1/alpha");
  }
}

double gamma_product_lhs(const GammaProductSpec& spec) {
  spec.validate();
  double product = 1.0;
  for (std::int64_t i = spec.a; i <= spec.b; ++i) {
    product *= 1.0 - spec.alpha * spec.delta /
                         (1.0 + (static_cast<double>(i) + spec.beta) * spec.delta);
  }
  return product;
}

double gamma_product_rhs(const GammaProductSpec& spec) {
  spec.validate();
  const double inv_delta = 1.0 / spec.delta;
  const double upper = static_cast<double>(spec.b) + 1.0 + inv_delta + spec.beta;
  const double lower = static_cast<double>(spec.a) + inv_delta + spec.beta;
  if (!(upper - spec.alpha > 0.0) || !(lower - spec.alpha > 0.0)) {
    throw std::invalid_argument("gamma product: non-positive gamma argument");
  }
  const double log_value = -log_gamma_ratio(upper - spec.alpha, spec.alpha) +
                           log_gamma_ratio(lower - spec.alpha, spec.alpha);
  return std::exp(log_value);
}

GammaRatioBound gamma_ratio_bounds(double x, double eta) {
  if (!(x > 0.0)) throw std::invalid_argument("gamma_ratio_bounds: x must be > 0");
  if (!(eta > 0.0)) throw std::invalid_argument("gamma_ratio_bounds: eta must be > 0");
  if (eta == 1.0) {
    throw std::invalid_argument("gamma_ratio_bounds: eta = 1 is the equality case");
  }
  GammaRatioBound r;
  r.log_ratio = log_gamma_ratio(x, eta);
  r.log_bound = eta * std::log(x);
  r.ratio = std::exp(r.log_ratio);
  r.bound = std::exp(r.log_bound);
  r.side = eta < 1.0 ? BoundSide::Less : BoundSide::Greater;
  return r;
}

BoundCurve polynomial_bound_curve(double x0_F_sq, double C, double K1, double epsilon,
                                  double theta, double dt, std::uint64_t k_max) {
  if (!(K1 > 1.0)) throw std::invalid_argument("polynomial bound: K1 must be > 1");
  if (!(epsilon > 0.0 && epsilon < K1 - 1.0)) {
    throw std::invalid_argument("polynomial bound: epsilon must lie in (0, K1-1)");
  }
  if (!(C > 0.0) || !(dt > 0.0) || !(x0_F_sq >= 0.0)) {
    throw std::invalid_argument("polynomial bound: need C > 0, dt > 0, |F(x0,0)|^2 >= 0");
  }
  const double rate = K1 - epsilon;
  const double scale = std::pow(2.0, rate);
  const double front = scale * (x0_F_sq + C * scale + C * theta);

  BoundCurve curve;
  curve.k.reserve(k_max + 1);
  curve.t.reserve(k_max + 1);
  curve.bound.reserve(k_max + 1);
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    const double t = static_cast<double>(k) * dt;
    curve.k.push_back(k);
    curve.t.push_back(t);
    curve.bound.push_back(front * std::pow(t + 1.0, 1.0 - rate));
  }
  return curve;
}

ExponentialBoundCurves exponential_bound_curve(double x0_F_sq, double C, double epsilon,
                                               double dt, std::uint64_t k_max) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("exponential bound: epsilon must lie in (0,1)");
  }
  if (!(C > 0.0) || !(dt > 0.0) || !(x0_F_sq >= 0.0)) {
    throw std::invalid_argument("exponential bound: need C > 0, dt > 0, |F(x0,0)|^2 >= 0");
  }
  const double rate = C * (1.0 - epsilon);
  if (!(rate * dt < 1.0)) {
    throw std::invalid_argument("exponential bound: need C(1-epsilon)dt < 1");
  }
  ExponentialBoundCurves out;
  const double log_factor = std::log1p(-rate * dt);
  for (auto* c : {&out.geometric, &out.envelope}) {
    c->k.reserve(k_max + 1);
    c->t.reserve(k_max + 1);
    c->bound.reserve(k_max + 1);
  }
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    const double kd = static_cast<double>(k);
    const double t = kd * dt;
    out.geometric.k.push_back(k);
    out.geometric.t.push_back(t);
    out.geometric.bound.push_back(x0_F_sq * std::exp(kd * log_factor));
    out.envelope.k.push_back(k);
    out.envelope.t.push_back(t);
    out.envelope.bound.push_back(x0_F_sq * std::exp(-rate * t));
  }
  return out;
}

GridCheck verify_product_grid(double tol) {
  GridCheck out;
  for (double delta : {0.5, 0.1, 0.02, 0.005}) {
    for (double alpha : {1.3, 1.9, 2.7}) {
      if (!(alpha * delta < 1.0)) continue;
      for (double beta : {0.0, 0.5, 1.5}) {
        for (std::int64_t a = 0; a <= 200; ++a) {
          for (std::int64_t b = a; b <= 200; ++b) {
            const GammaProductSpec spec{a, b, alpha, beta, delta};
            const double lhs = gamma_product_lhs(spec);
            const double err = std::abs(lhs - gamma_product_rhs(spec)) / lhs;
            ++out.points;
            if (!(err <= tol)) ++out.failures;
            if (!(err <= out.worst)) out.worst = err;
          }
        }
      }
    }
  }
  return out;
}

GridCheck verify_ratio_grid() {
  GridCheck out;
  out.worst = std::numeric_limits<double>::infinity();
  for (double x : {0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1e4}) {
    for (double eta : {0.1, 0.5, 0.9, 1.1, 2.0, 3.7}) {
      const auto r = gamma_ratio_bounds(x, eta);
      const double gap = r.side == BoundSide::Less ? r.log_bound - r.log_ratio
                                                   : r.log_ratio - r.log_bound;
      ++out.points;
      if (!r.holds()) ++out.failures;
      out.worst = std::min(out.worst, gap);
    }
  }
  return out;
}

}  // namespace thetaem
