#include "opideal/ascent.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "opideal/errors.hpp"
#include "opideal/parallel.hpp"

namespace opideal {

namespace {

constexpr std::uint64_t kAscentStream = 0x5EA5CE17ULL;
constexpr int kMaxHalvings = 40;

Eigen::VectorXcd random_unit(std::size_t dim, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Eigen::VectorXcd a(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double re = normal(gen);
    const double im = normal(gen);
    a(i) = {re, im};
  }
  return a / a.norm();
}

AscentResult run_restart(std::size_t dim, const SmoothObjective& smooth, const ExactObjective& exact,
                         const AscentConfig& cfg, std::size_t restart) {
  auto gen = substream(cfg.seed, kAscentStream, restart);
  Eigen::VectorXcd a = random_unit(dim, gen);
  Eigen::VectorXcd grad(a.size());
  double value = smooth(a, &grad);

  AscentResult best;
  best.restart = restart;
  best.argmax = a;
  best.value = exact ? exact(a) : value;

  double t = cfg.step_size;
  std::size_t it = 0;
  for (; it < cfg.steps; ++it) {
    // Tangent component of the real gradient at a.
    const double radial = (a.adjoint() * grad)(0).real();
    Eigen::VectorXcd dir = grad - radial * a;
    const double dnorm = dir.norm();
    if (!(dnorm > 0.0) || !std::isfinite(dnorm)) break;
    dir /= dnorm;

    bool accepted = false;
    Eigen::VectorXcd next;
    Eigen::VectorXcd next_grad(a.size());
    double next_value = value;
    for (int h = 0; h < kMaxHalvings; ++h) {
      next = a + t * dir;
      next /= next.norm();
      next_value = smooth(next, &next_grad);
      if (std::isfinite(next_value) && next_value > value) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    const double gain = (next_value - value) / std::max(std::abs(value), 1e-300);
    a = std::move(next);
    grad = std::move(next_grad);
    value = next_value;
    const double scored = exact ? exact(a) : value;
    if (scored > best.value) {
      best.value = scored;
      best.argmax = a;
    }
    t = std::min(1.0, 1.5 * t);
    if (gain < cfg.tolerance) break;
  }
  best.iterations = it;
  return best;
}

}  // namespace

AscentResult sphere_ascent(std::size_t dim, const SmoothObjective& smooth, const ExactObjective& exact,
                           const AscentConfig& cfg) {
  if (dim == 0) throw DomainError("ascent dimension must be positive");
  if (cfg.restarts == 0) throw DomainError("ascent needs at least one restart");
  std::vector<AscentResult> results(cfg.restarts);
  parallel_for(cfg.restarts, cfg.threads,
               [&](std::size_t r) { results[r] = run_restart(dim, smooth, exact, cfg, r); });
  std::size_t winner = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    if (results[r].value > results[winner].value) winner = r;
  }
  return results[winner];
}

}  // namespace opideal
