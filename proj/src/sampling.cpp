#include "opideal/sampling.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "opideal/errors.hpp"
#include "opideal/parallel.hpp"

namespace opideal {

MomentSummary gaussian_mean(const SamplingConfig& cfg, std::size_t dim,
                            const std::function<double(const Eigen::VectorXcd&)>& fn) {
  if (cfg.samples < 2) throw DomainError("Monte Carlo needs at least 2 samples");
  if (cfg.chunk_size == 0) throw DomainError("chunk_size must be positive");
  const std::size_t chunks = (cfg.samples + cfg.chunk_size - 1) / cfg.chunk_size;

  struct Partial {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  std::vector<Partial> partial(chunks);
  const double complex_scale = std::sqrt(0.5);

  parallel_for(chunks, cfg.threads, [&](std::size_t c) {
    auto gen = substream(cfg.seed, cfg.stream, c);
    std::normal_distribution<double> normal;
    const std::size_t begin = c * cfg.chunk_size;
    const std::size_t end = std::min(cfg.samples, begin + cfg.chunk_size);
    Eigen::VectorXcd g(static_cast<Eigen::Index>(dim));
    Partial p;
    for (std::size_t s = begin; s < end; ++s) {
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (cfg.gaussian == GaussianKind::Real) {
          g(i) = normal(gen);
        } else {
          const double re = normal(gen);
          const double im = normal(gen);
          g(i) = std::complex<double>(re, im) * complex_scale;
        }
      }
      const double q = fn(g);
      p.sum += q;
      p.sum_sq += q * q;
    }
    partial[c] = p;
  });

  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& p : partial) {
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  const double n = static_cast<double>(cfg.samples);
  MomentSummary out;
  out.samples = cfg.samples;
  out.mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0));
  out.std_error = std::sqrt(var / n);
  return out;
}

}  // namespace opideal
