#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace thetaem {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Stateless: the output is a pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Inverse of the standard normal CDF, p in (0,1).
double normal_quantile(double p);

/// Gaussian increments keyed by (seed, path). Draw `step` is a pure function
/// of (seed, path, step), independent of how paths are scheduled.
class BrownianStream {
 public:
  BrownianStream(std::uint64_t seed, std::uint64_t path);

  /// Fills `out` with independent N(0, dt) samples for step k.
  void increment(std::uint64_t step, double dt, std::span<double> out) const;

  /// Standard normal draws for step k.
  void standard_normals(std::uint64_t step, std::span<double> out) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t path() const { return path_; }

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
  std::array<std::uint32_t, 2> key_;
};

}  // namespace thetaem
