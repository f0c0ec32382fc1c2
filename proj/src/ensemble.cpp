#include "thetaem/ensemble.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace thetaem {

namespace {

int resolve_workers(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

}  // namespace

std::uint64_t run_ensemble(const SdeModel& model, std::span<const double> x0,
                           const SchemeConfig& config, std::uint64_t n_steps,
                           std::uint64_t n_paths, const EnsembleOptions& options,
                           const std::function<void(const EnsembleView&)>& observe,
                           std::uint64_t first_step) {
  config.validate();
  if (n_paths == 0) throw std::invalid_argument("ensemble needs at least one path");
  if (x0.size() != model.state_dim()) {
    throw std::invalid_argument("x0 dimension does not match the model");
  }

  std::vector<PathState> paths;
  paths.reserve(n_paths);
  for (std::uint64_t p = 0; p < n_paths; ++p) {
    paths.push_back(make_path_state(x0, p, config));
    paths.back().k = first_step;
  }
  observe(EnsembleView{first_step, paths});

  const int workers = resolve_workers(options.workers);
  const auto n = static_cast<std::int64_t>(n_paths);
  const std::size_t d = model.state_dim();
  const std::size_t m = model.noise_dim();

  std::uint64_t taken = 0;
  for (std::uint64_t s = 0; s < n_steps; ++s) {
    std::int64_t active = 0;
#pragma omp parallel num_threads(workers) reduction(+ : active)
    {
      StepWorkspace ws(d, m);
#pragma omp for schedule(static)
      for (std::int64_t p = 0; p < n; ++p) {
        auto& path = paths[static_cast<std::size_t>(p)];
        if (path.active()) {
          step(model, path, config, ws);
          if (path.active()) ++active;
        }
      }
    }
    ++taken;
    observe(EnsembleView{first_step + taken, paths});
    if (active == 0) break;
  }
  return taken;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 64;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SquaredNormStats squared_norm_stats(std::span<const PathState> paths) {
  thread_local std::vector<double> values;
  values.clear();
  for (const auto& p : paths) {
    if (!p.active()) continue;
    double sq = 0.0;
    for (double v : p.x) sq += v * v;
    values.push_back(sq);
  }
  SquaredNormStats stats;
  stats.n_active = values.size();
  if (values.empty()) {
    stats.mean = std::nan("");
    stats.stderr_ = std::nan("");
    return stats;
  }
  const double n = static_cast<double>(values.size());
  stats.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    for (double& v : values) v = (v - stats.mean) * (v - stats.mean);
    const double var = pairwise_sum(values) / (n - 1.0);
    stats.stderr_ = std::sqrt(var / n);
  }
  return stats;
}

}  // namespace thetaem
