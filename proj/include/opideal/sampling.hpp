#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>

#include <Eigen/Core>

namespace opideal {

/// Real: g ~ N(0,1). Complex: g = (x + iy)/sqrt(2), so E|g|^2 = 1 in both cases.
enum class GaussianKind { Real, Complex };

struct SamplingConfig {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  GaussianKind gaussian = GaussianKind::Real;
  unsigned threads = 0;
  /// Substream granularity; part of the reproducibility contract.
  std::size_t chunk_size = 1024;
  /// Substream family, so different estimators under one seed stay independent.
  std::uint64_t stream = 0;
  /// Skip closed-form shortcuts and always sample.
  bool force_sampling = false;
};

struct MomentSummary {
  double mean = 0.0;
  double std_error = 0.0;  ///< standard error of the mean
  std::size_t samples = 0;
};

/// Mean of fn(g) over Gaussian vectors g of length `dim`. For real Gaussians
/// the imaginary part of g is zero. Deterministic in (cfg.seed, cfg.stream,
/// cfg.chunk_size, cfg.samples) for any thread count.
MomentSummary gaussian_mean(const SamplingConfig& cfg, std::size_t dim,
                            const std::function<double(const Eigen::VectorXcd&)>& fn);

/// Value and stderr of sqrt(E[q]) from a summary of q (delta method).
inline std::pair<double, double> root_of_mean(const MomentSummary& s) {
  const double value = std::sqrt(std::max(0.0, s.mean));
  const double se = value > 0.0 ? s.std_error / (2.0 * value) : 0.0;
  return {value, se};
}

}  // namespace opideal
