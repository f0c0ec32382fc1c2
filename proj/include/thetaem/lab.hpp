#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "thetaem/ensemble.hpp"
#include "thetaem/models.hpp"
#include "thetaem/stepper.hpp"

namespace thetaem {

/// Per-step Monte Carlo estimates of E|X_k|^2 over the paths still active.
struct MomentSeries {
  double dt = 0.0;
  std::uint64_t n_paths = 0;
  std::vector<std::uint64_t> k;
  std::vector<double> t;
  std::vector<double> moment;
  std::vector<double> stderr_;
  std::vector<std::uint64_t> n_alive;
  std::vector<std::uint64_t> n_frozen;  ///< diverged + failed, nondecreasing
  bool truncated = false;               ///< every path froze before the last step

  std::size_t size() const { return moment.size(); }
};

/// Ensemble estimate of E|X_k|^2 for k = 0..n_steps (OpenMP over paths).
/// Requires n_paths >= 2.
MomentSeries estimate_moments(const SdeModel& model, std::span<const double> x0,
                              const SchemeConfig& config, std::uint64_t n_steps,
                              std::uint64_t n_paths, const EnsembleOptions& options = {});

/// Path-by-path serial reference for estimate_moments. Same estimator,
/// different summation order; kept for cross-checking the parallel kernel.
MomentSeries estimate_moments_serial(const SdeModel& model, std::span<const double> x0,
                                     const SchemeConfig& config, std::uint64_t n_steps,
                                     std::uint64_t n_paths);

enum class RateAxis {
  LogTime,     ///< ln E|X_k|^2 against ln(1 + kΔt): polynomial decay
  LinearTime,  ///< ln E|X_k|^2 against kΔt: exponential decay
};

struct RateEstimate {
  RateAxis axis = RateAxis::LinearTime;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t first = 0;  ///< first series index in the fit window
  std::size_t last = 0;   ///< last series index in the fit window (inclusive)
  bool degenerate = false;  ///< non-positive moments in the window; slope = -inf
};

/// Least-squares slope of ln E|X_k|^2 over the last `window_fraction` of the
/// series. Throws std::invalid_argument when fewer than 10 points fall in
/// the window.
RateEstimate fit_rate(const MomentSeries& series, RateAxis axis, double window_fraction = 0.5);

/// Ordinary least squares fit of y on x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Per-path slope of ln|X_k| against kΔt over the tail window.
struct ExponentSummary {
  std::vector<double> exponents;  ///< -inf for paths that reached exactly 0; NaN for frozen paths
  double max = 0.0;               ///< over paths with a valid exponent
  double median = 0.0;
  std::uint64_t n_valid = 0;
  std::uint64_t n_frozen = 0;
};

ExponentSummary estimate_as_exponent(const SdeModel& model, std::span<const double> x0,
                                     const SchemeConfig& config, std::uint64_t n_steps,
                                     std::uint64_t n_paths, double window_fraction = 0.5,
                                     const EnsembleOptions& options = {});

/// Which growth regime of the explicit scheme is being demonstrated.
enum class DivergenceRegime {
  Superlinear,  ///< q > 1, q > γ: thresholds 2^{k+3/(q-1)} / (|b|Δt)^{1/(q-1)}
  Sublinear,    ///< 0 < q < 1, 1/2 <= γ < 1, |b| < a: thresholds r^k
};

std::string_view to_string(DivergenceRegime regime);
DivergenceRegime parse_divergence_regime(std::string_view name);

struct DivergenceReport {
  DivergenceRegime regime = DivergenceRegime::Superlinear;
  std::uint64_t horizon = 0;         ///< last step index checked (K or k_horizon)
  std::vector<double> thresholds;    ///< threshold for k = 1..horizon
  std::uint64_t n_paths = 0;
  std::uint64_t survivors = 0;
  double p_hat = 0.0;
  double p_stderr = 0.0;
  double bound = 0.0;      ///< analytic lower bound on the survival probability
  double log_bound = 0.0;
  double alpha = 0.0;
  double x1 = 0.0;         ///< initial value X_1
  std::uint64_t k0 = 0;    ///< sublinear regime only
  double log_head = 0.0;   ///< sublinear regime only: sum of log-probabilities for k < k0
};

/// Survival-above-thresholds experiment for the classical Euler-Maruyama
/// scheme (θ = 0 is forced) on the polynomial model. X_1 starts at the
/// first threshold times `x1_multiple` (>= 1).
DivergenceReport divergence_superlinear(const PolyModelParams& params, double dt,
                                        std::uint64_t K, std::uint64_t n_paths,
                                        double x1_multiple, std::uint64_t seed,
                                        const EnsembleOptions& options = {});

/// Analytic constant α = 2^{(q-γ)(q+2)/(q-1)} / (2|c|) · min(1, (q-γ) ln 2).
double superlinear_alpha(double q, double gamma, double c);

DivergenceReport divergence_sublinear(const PolyModelParams& params, double dt,
                                      std::uint64_t k_horizon, std::uint64_t n_paths,
                                      double x1_multiple, std::uint64_t seed,
                                      const EnsembleOptions& options = {});

}  // namespace thetaem
