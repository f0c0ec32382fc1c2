#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "thetaem/models.hpp"
#include "thetaem/stepper.hpp"

namespace thetaem {

/// Worker settings for ensemble runs. Results never depend on `workers`.
struct EnsembleOptions {
  int workers = 0;  ///< 0: OpenMP default
};

/// Read-only view of all paths after step k (so X_k is current).
struct EnsembleView {
  std::uint64_t k = 0;
  std::span<const PathState> paths;
};

/// Runs `n_paths` independent θ-EM paths for `n_steps` steps, invoking
/// `observe` after initialisation (k = first_step) and after every step.
/// Paths advance in parallel; `observe` runs on the calling thread.
/// Stops early once every path is frozen. Returns the number of steps taken.
///
/// `first_step` is the index of the initial state: paths start at
/// X_{first_step} = x0 with time first_step·Δt.
std::uint64_t run_ensemble(const SdeModel& model, std::span<const double> x0,
                           const SchemeConfig& config, std::uint64_t n_steps,
                           std::uint64_t n_paths, const EnsembleOptions& options,
                           const std::function<void(const EnsembleView&)>& observe,
                           std::uint64_t first_step = 0);

/// Pairwise (cascade) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

/// Mean and standard error of |X_k|^2 over active paths, per step.
struct SquaredNormStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n_active = 0;
};

/// Reduces over the active paths in path order, so the result is
/// independent of the number of workers that produced the states.
SquaredNormStats squared_norm_stats(std::span<const PathState> paths);

}  // namespace thetaem
