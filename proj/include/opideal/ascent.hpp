#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace opideal {

struct AscentConfig {
  std::size_t restarts = 64;
  std::size_t steps = 500;
  double step_size = 0.1;
  /// Stop a restart once the relative gain of an accepted step drops below this.
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// Smooth surrogate on the complex unit sphere. Returns the value at `a` and,
/// when `grad` is non-null, writes the real gradient (2 d/d conj(a)).
using SmoothObjective = std::function<double(const Eigen::VectorXcd& a, Eigen::VectorXcd* grad)>;
/// Exact objective used to score iterates; the reported maximum is always a
/// value of this function at an explicit point.
using ExactObjective = std::function<double(const Eigen::VectorXcd& a)>;

struct AscentResult {
  double value = 0.0;
  Eigen::VectorXcd argmax;
  std::size_t restart = 0;
  std::size_t iterations = 0;
};

/// Projected gradient ascent with backtracking on the unit sphere of C^dim,
/// restarted from seeded random points. Restart r uses substream (seed, r);
/// the best restart is selected in index order.
AscentResult sphere_ascent(std::size_t dim, const SmoothObjective& smooth, const ExactObjective& exact,
                           const AscentConfig& cfg);

}  // namespace opideal
