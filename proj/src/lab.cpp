#include "thetaem/lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace thetaem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_run_args(const SdeModel& model, std::span<const double> x0, std::uint64_t n_steps) {
  if (n_steps == 0) throw std::invalid_argument("n_steps must be >= 1");
  if (x0.size() != model.state_dim()) {
    throw std::invalid_argument("x0 dimension does not match the model");
  }
}

// Drops trailing entries with no active path and flags the truncation.
void finish_series(MomentSeries& s, std::uint64_t n_steps) {
  while (!s.n_alive.empty() && s.n_alive.back() == 0) {
    s.k.pop_back();
    s.t.pop_back();
    s.moment.pop_back();
    s.stderr_.pop_back();
    s.n_alive.pop_back();
    s.n_frozen.pop_back();
    s.truncated = true;
  }
  if (s.k.empty() || s.k.back() < n_steps) s.truncated = true;
}

std::size_t window_start(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("fit window fraction must lie in (0,1]");
  }
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - fraction)));
}

double binomial_stderr(double p, std::uint64_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

MomentSeries estimate_moments(const SdeModel& model, std::span<const double> x0,
                              const SchemeConfig& config, std::uint64_t n_steps,
                              std::uint64_t n_paths, const EnsembleOptions& options) {
  check_run_args(model, x0, n_steps);
  if (n_paths < 2) throw std::invalid_argument("estimate_moments needs n_paths >= 2");

  MomentSeries s;
  s.dt = config.dt;
  s.n_paths = n_paths;
  run_ensemble(model, x0, config, n_steps, n_paths, options, [&](const EnsembleView& view) {
    const auto stats = squared_norm_stats(view.paths);
    s.k.push_back(view.k);
    s.t.push_back(static_cast<double>(view.k) * config.dt);
    s.moment.push_back(stats.mean);
    s.stderr_.push_back(stats.stderr_);
    s.n_alive.push_back(stats.n_active);
    s.n_frozen.push_back(n_paths - stats.n_active);
  });
  finish_series(s, n_steps);
  return s;
}

MomentSeries estimate_moments_serial(const SdeModel& model, std::span<const double> x0,
                                     const SchemeConfig& config, std::uint64_t n_steps,
                                     std::uint64_t n_paths) {
  check_run_args(model, x0, n_steps);
  config.validate();
  if (n_paths < 2) throw std::invalid_argument("estimate_moments needs n_paths >= 2");

  // Welford accumulators per step.
  const std::size_t n = n_steps + 1;
  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  std::vector<std::uint64_t> count(n, 0);
  StepWorkspace ws(model.state_dim(), model.noise_dim());

  auto accumulate = [&](std::size_t k, std::span<const double> x) {
    double sq = 0.0;
    for (double v : x) sq += v * v;
    ++count[k];
    const double delta = sq - mean[k];
    mean[k] += delta / static_cast<double>(count[k]);
    m2[k] += delta * (sq - mean[k]);
  };

  for (std::uint64_t p = 0; p < n_paths; ++p) {
    PathState state = make_path_state(x0, p, config);
    if (!state.active()) continue;
    accumulate(0, state.x);
    for (std::uint64_t k = 1; k <= n_steps; ++k) {
      step(model, state, config, ws);
      if (!state.active()) break;
      accumulate(k, state.x);
    }
  }

  MomentSeries s;
  s.dt = config.dt;
  s.n_paths = n_paths;
  for (std::size_t k = 0; k < n; ++k) {
    s.k.push_back(k);
    s.t.push_back(static_cast<double>(k) * config.dt);
    s.n_alive.push_back(count[k]);
    s.n_frozen.push_back(n_paths - count[k]);
    if (count[k] == 0) {
      s.moment.push_back(kNaN);
      s.stderr_.push_back(kNaN);
      continue;
    }
    const double c = static_cast<double>(count[k]);
    s.moment.push_back(mean[k]);
    s.stderr_.push_back(count[k] > 1 ? std::sqrt(m2[k] / (c - 1.0) / c) : 0.0);
  }
  // Keep only the prefix before the first step with no active paths.
  const auto first_empty = std::find(s.n_alive.begin(), s.n_alive.end(), 0u);
  const auto keep = static_cast<std::size_t>(first_empty - s.n_alive.begin());
  s.k.resize(keep);
  s.t.resize(keep);
  s.moment.resize(keep);
  s.stderr_.resize(keep);
  s.n_alive.resize(keep);
  s.n_frozen.resize(keep);
  finish_series(s, n_steps);
  return s;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw std::invalid_argument("fit_line needs at least 3 paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: abscissae are all equal");

  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += e * e;
  }
  fit.slope_stderr = std::sqrt(sse / (n - 2.0) / sxx);
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

RateEstimate fit_rate(const MomentSeries& series, RateAxis axis, double window_fraction) {
  const std::size_t n = series.size();
  const std::size_t first = window_start(n, window_fraction);
  if (n < 10 || n - first < 10) {
    throw std::invalid_argument("fit_rate needs at least 10 points in the fit window");
  }

  RateEstimate est;
  est.axis = axis;
  est.first = first;
  est.last = n - 1;

  std::vector<double> xs, ys;
  xs.reserve(n - first);
  ys.reserve(n - first);
  for (std::size_t i = first; i < n; ++i) {
    const double m = series.moment[i];
    if (!(m > 0.0)) {
      est.degenerate = true;
      est.slope = -kInf;
      est.slope_stderr = 0.0;
      return est;
    }
    const double t = series.t[i];
    xs.push_back(axis == RateAxis::LogTime ? std::log1p(t) : t);
    ys.push_back(std::log(m));
  }
  const auto fit = fit_line(xs, ys);
  est.slope = fit.slope;
  est.slope_stderr = fit.slope_stderr;
  est.intercept = fit.intercept;
  est.r_squared = fit.r_squared;
  return est;
}

ExponentSummary estimate_as_exponent(const SdeModel& model, std::span<const double> x0,
                                     const SchemeConfig& config, std::uint64_t n_steps,
                                     std::uint64_t n_paths, double window_fraction,
                                     const EnsembleOptions& options) {
  check_run_args(model, x0, n_steps);
  if (n_paths == 0) throw std::invalid_argument("estimate_as_exponent needs n_paths >= 1");
  const std::uint64_t first = window_start(n_steps + 1, window_fraction);
  if (n_steps + 1 - first < 2) throw std::invalid_argument("exponent window too short");
  const double t0 = static_cast<double>(first) * config.dt;

  struct Sums {
    double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
    bool zero = false;
  };
  std::vector<Sums> sums(n_paths);
  std::vector<PathStatus> final_status(n_paths, PathStatus::Active);

  run_ensemble(model, x0, config, n_steps, n_paths, options, [&](const EnsembleView& view) {
    for (std::size_t p = 0; p < view.paths.size(); ++p) {
      const auto& path = view.paths[p];
      final_status[p] = path.status;
      if (view.k < first || !path.active()) continue;
      double sq = 0.0;
      for (double v : path.x) sq += v * v;
      auto& s = sums[p];
      if (sq == 0.0) {
        s.zero = true;
        continue;
      }
      const double t = static_cast<double>(view.k) * config.dt - t0;
      const double y = 0.5 * std::log(sq);
      s.n += 1;
      s.st += t;
      s.sy += y;
      s.stt += t * t;
      s.sty += t * y;
    }
  });

  ExponentSummary out;
  out.exponents.resize(n_paths, kNaN);
  std::vector<double> valid;
  for (std::uint64_t p = 0; p < n_paths; ++p) {
    if (final_status[p] != PathStatus::Active) {
      ++out.n_frozen;
      continue;
    }
    const auto& s = sums[p];
    double e;
    if (s.zero) {
      e = -kInf;
    } else {
      const double den = s.n * s.stt - s.st * s.st;
      e = den > 0.0 ? (s.n * s.sty - s.st * s.sy) / den : kNaN;
    }
    out.exponents[p] = e;
    if (!std::isnan(e)) valid.push_back(e);
  }
  out.n_valid = valid.size();
  if (valid.empty()) {
    out.max = kNaN;
    out.median = kNaN;
    return out;
  }
  std::sort(valid.begin(), valid.end());
  out.max = valid.back();
  const std::size_t mid = valid.size() / 2;
  out.median = valid.size() % 2 == 1 ? valid[mid] : 0.5 * (valid[mid - 1] + valid[mid]);
  if (std::isnan(out.median)) out.median = -kInf;  // -inf + -inf pairs
  return out;
}

std::string_view to_string(DivergenceRegime regime) {
  return regime == DivergenceRegime::Superlinear ? "superlinear" : "sublinear";
}

DivergenceRegime parse_divergence_regime(std::string_view name) {
  if (name == "superlinear") return DivergenceRegime::Superlinear;
  if (name == "sublinear") return DivergenceRegime::Sublinear;
  throw std::invalid_argument("unknown divergence regime '" + std::string(name) + "'");
}

double superlinear_alpha(double q, double gamma, double c) {
  const double qg = q - gamma;
  return std::exp2(qg * (q + 2.0) / (q - 1.0)) / (2.0 * std::abs(c)) *
         std::min(1.0, qg * std::numbers::ln2);
}

namespace {

// Simulates the explicit scheme from X_1 = x1 and counts paths with
// |X_k| >= thresholds[k-1] for every k = 1..thresholds.size(). Frozen
// (overflowed) paths exceed every finite threshold and stay survivors.
std::uint64_t count_survivors(const PolyModelParams& params, double dt, double x1,
                              const std::vector<double>& thresholds, std::uint64_t n_paths,
                              std::uint64_t seed, const EnsembleOptions& options) {
  const auto model = make_poly_model(params);
  SchemeConfig config;
  config.theta = 0.0;
  config.dt = dt;
  config.seed = seed;

  std::vector<char> alive(n_paths, 1);
  const std::uint64_t horizon = thresholds.size();
  const double x_init[] = {x1};
  run_ensemble(
      *model, x_init, config, horizon - 1, n_paths, options,
      [&](const EnsembleView& view) {
        const double threshold = thresholds[view.k - 1];
        for (std::size_t p = 0; p < view.paths.size(); ++p) {
          const auto& path = view.paths[p];
          if (!alive[p] || path.status == PathStatus::Diverged) continue;
          if (!(std::abs(path.x[0]) >= threshold)) alive[p] = 0;
        }
      },
      /*first_step=*/1);
  return static_cast<std::uint64_t>(std::count(alive.begin(), alive.end(), 1));
}

void validate_common(double dt, std::uint64_t horizon, std::uint64_t n_paths,
                     double x1_multiple) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  if (!(x1_multiple >= 1.0)) throw std::invalid_argument("x1 multiple must be >= 1");
}

}  // namespace

DivergenceReport divergence_superlinear(const PolyModelParams& params, double dt,
                                        std::uint64_t K, std::uint64_t n_paths,
                                        double x1_multiple, std::uint64_t seed,
                                        const EnsembleOptions& options) {
  validate_common(dt, K, n_paths, x1_multiple);
  if (!(params.q > 1.0)) throw std::invalid_argument("superlinear regime requires q > 1");
  if (!(params.q > params.gamma)) {
    throw std::invalid_argument("superlinear regime requires q > gamma");
  }
  if (!(params.gamma >= 0.5)) throw std::invalid_argument("gamma must be >= 1/2");
  if (params.b == 0.0) throw std::invalid_argument("superlinear regime requires b != 0");
  if (!(std::abs(params.a) * dt <= 1.0)) {
    throw std::invalid_argument("superlinear regime requires |a| dt <= 1");
  }

  DivergenceReport r;
  r.regime = DivergenceRegime::Superlinear;
  r.horizon = K;
  r.n_paths = n_paths;
  const double inv_q1 = 1.0 / (params.q - 1.0);
  const double log2_base = -std::log2(std::abs(params.b) * dt) * inv_q1;
  r.thresholds.reserve(K);
  for (std::uint64_t k = 1; k <= K; ++k) {
    r.thresholds.push_back(std::exp2(static_cast<double>(k) + 3.0 * inv_q1 + log2_base));
  }
  r.x1 = r.thresholds.front() * x1_multiple;

  r.alpha = params.c == 0.0 ? kInf : superlinear_alpha(params.q, params.gamma, params.c);
  r.log_bound = -4.0 * std::exp(-r.alpha / std::sqrt(dt));
  r.bound = std::exp(r.log_bound);

  r.survivors = count_survivors(params, dt, r.x1, r.thresholds, n_paths, seed, options);
  r.p_hat = static_cast<double>(r.survivors) / static_cast<double>(n_paths);
  r.p_stderr = binomial_stderr(r.p_hat, n_paths);
  return r;
}

DivergenceReport divergence_sublinear(const PolyModelParams& params, double dt,
                                      std::uint64_t k_horizon, std::uint64_t n_paths,
                                      double x1_multiple, std::uint64_t seed,
                                      const EnsembleOptions& options) {
  validate_common(dt, k_horizon, n_paths, x1_multiple);
  if (!(params.q > 0.0 && params.q < 1.0)) {
    throw std::invalid_argument("sublinear regime requires 0 < q < 1");
  }
  if (!(params.gamma >= 0.5 && params.gamma < 1.0)) {
    throw std::invalid_argument("sublinear regime requires 1/2 <= gamma < 1");
  }
  if (!(std::abs(params.b) < params.a)) {
    throw std::invalid_argument("sublinear regime requires |b| < a");
  }

  DivergenceReport r;
  r.regime = DivergenceRegime::Sublinear;
  r.horizon = k_horizon;
  r.n_paths = n_paths;

  const double r_base = 1.0 + 0.5 * (params.a - std::abs(params.b)) * dt;
  const double log_r = std::log(r_base);
  const double one_minus_gamma = 1.0 - params.gamma;
  const double noise_scale = std::abs(params.c) * std::sqrt(dt);
  r.alpha = (r_base - 1.0) * std::pow(r_base, one_minus_gamma) *
            std::min(1.0, one_minus_gamma * log_r) / noise_scale;
  if (!(r.alpha > 0.0)) {
    throw std::invalid_argument(
        "sublinear regime: alpha <= 0 (gamma too close to 1 or dt too small); bound degenerates");
  }

  // z_k = (r-1) r^{k(1-γ)} / (|c| sqrt(dt)); k0 = smallest k >= 1 with z_k >= 2.
  auto z = [&](std::uint64_t k) {
    return (r_base - 1.0) * std::exp(static_cast<double>(k) * one_minus_gamma * log_r) /
           noise_scale;
  };
  std::uint64_t k0 = 1;
  if (z(1) < 2.0) {
    const double z0 = (r_base - 1.0) / noise_scale;
    const double est = std::ceil(std::log(2.0 / z0) / (one_minus_gamma * log_r));
    if (!(est < 1e8)) {
      throw std::invalid_argument("sublinear regime: k0 exceeds 1e8, bound not computable");
    }
    k0 = static_cast<std::uint64_t>(std::max(1.0, est));
    while (k0 > 1 && z(k0 - 1) >= 2.0) --k0;
    while (z(k0) < 2.0) ++k0;
  }
  r.k0 = k0;
  double head = 0.0;
  for (std::uint64_t k = 1; k < k0; ++k) {
    head += std::log(std::erf(z(k) / std::numbers::sqrt2));
  }
  r.log_head = head;
  const double tail = std::exp(-static_cast<double>(k0) * r.alpha);
  r.log_bound = head - 2.0 * tail / (1.0 - tail);
  r.bound = std::exp(r.log_bound);

  r.thresholds.reserve(k_horizon);
  for (std::uint64_t k = 1; k <= k_horizon; ++k) {
    r.thresholds.push_back(std::exp(static_cast<double>(k) * log_r));
  }
  r.x1 = r.thresholds.front() * x1_multiple;
  r.survivors = count_survivors(params, dt, r.x1, r.thresholds, n_paths, seed, options);
  r.p_hat = static_cast<double>(r.survivors) / static_cast<double>(n_paths);
  r.p_stderr = binomial_stderr(r.p_hat, n_paths);
  return r;
}

}  // namespace thetaem
