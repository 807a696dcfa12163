#include "opideal/limit_order.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "opideal/errors.hpp"

namespace opideal {

std::string_view to_string(IdealTag t) noexcept {
  switch (t) {
    case IdealTag::Gamma: return "gamma";
    case IdealTag::Pi2: return "pi2";
    case IdealTag::Lambda: return "lambda";
  }
  return "gamma";
}

LimitOrderValue gamma_limit_order(Exponent u, Exponent v) {
  const double ru = u.recip();
  const double rv = v.recip();
  const double value = ru <= 0.5 ? rv : std::max(0.0, 0.5 + rv - ru);
  return {IdealTag::Gamma, u, v, value};
}

double theorem2_exponent(Exponent u, Exponent v) {
  if (u.recip() <= 0.5) return 0.5 + v.recip();
  return 0.5 + std::max(0.0, 0.5 + v.recip() - u.recip());
}

ExponentFit fit_exponent(std::vector<std::pair<double, double>> points) {
  if (points.size() < 3) throw DomainError("exponent fit needs at least 3 points");
  std::set<double> seen;
  for (const auto& [n, value] : points) {
    if (!(n > 0.0)) throw DomainError("exponent fit needs positive n");
    if (!(value > 0.0) || !std::isfinite(value)) throw DomainError("exponent fit needs positive finite values");
    if (!seen.insert(n).second) throw DomainError("exponent fit needs distinct n");
  }
  const double k = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [n, value] : points) {
    mx += std::log(n);
    my += std::log(value);
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, value] : points) {
    const double dx = std::log(n) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(value) - my);
  }
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [n, value] : points) {
    const double fitted = std::exp(fit.intercept + fit.slope * std::log(n));
    fit.max_rel_residual = std::max(fit.max_rel_residual, std::abs(fitted - value) / value);
  }
  fit.points = std::move(points);
  return fit;
}

ConvexityCheck corollary4_check(const LimitOrderPoint& p0, const LimitOrderPoint& p1, double theta,
                                const LimitOrderPoint& pt, double tolerance) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
  for (const auto* p : {&p0, &p1, &pt}) {
    if (p->u.recip() < 0.5) throw DomainError("convexity check requires 1 <= u <= 2 at every point");
  }
  auto consistent = [theta](Exponent a, Exponent b, Exponent t) {
    return std::abs((1.0 - theta) * a.recip() + theta * b.recip() - t.recip()) <= 1e-12;
  };
  if (!consistent(p0.u, p1.u, pt.u) || !consistent(p0.v, p1.v, pt.v)) {
    throw DomainError("interpolated exponents are not the reciprocal-linear combination of the endpoints");
  }
  ConvexityCheck c;
  c.lhs = pt.value;
  c.rhs = (1.0 - theta) * p0.value + theta * p1.value;
  c.slack = c.rhs - c.lhs;
  c.pass = c.slack >= -tolerance;
  return c;
}

LimitOrderTable limit_order_table(IdealTag ideal, const std::vector<Exponent>& u_grid,
                                  const std::vector<Exponent>& v_grid) {
  if (ideal == IdealTag::Lambda) throw DomainError("lambda limit orders are measured, not tabulated");
  LimitOrderTable t;
  t.ideal = ideal;
  t.u_grid = u_grid;
  t.v_grid = v_grid;
  t.values.resize(static_cast<Eigen::Index>(u_grid.size()), static_cast<Eigen::Index>(v_grid.size()));
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    for (std::size_t j = 0; j < v_grid.size(); ++j) {
      if (ideal == IdealTag::Pi2 && v_grid[j].recip() < 0.5) {
        throw DomainError("pi2 limit orders are tabulated only for v <= 2");
      }
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          gamma_limit_order(u_grid[i], v_grid[j]).value;
    }
  }
  return t;
}

}  // namespace opideal
