#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "opideal/exponent.hpp"

namespace opideal {

/// Ideals whose limit orders the library tabulates or measures.
///  Gamma: Gaussian-summing operators.  Pi2: 2-summing operators.
///  Lambda: B-summing operators for a character system (measured only).
enum class IdealTag { Gamma, Pi2, Lambda };

std::string_view to_string(IdealTag t) noexcept;

struct LimitOrderValue {
  IdealTag ideal = IdealTag::Gamma;
  Exponent u;
  Exponent v;
  double value = 0.0;
};

/// lambda(Pi_gamma, u, v) = 1/v for u >= 2, max(0, 1/2 + 1/v - 1/u) for u <= 2.
LimitOrderValue gamma_limit_order(Exponent u, Exponent v);

/// Exponent of pi_gamma(id: S_u^n -> S_v^n): 1/2 + 1/v for u >= 2,
/// 1/2 + max(0, 1/2 + 1/v - 1/u) for u <= 2.
double theorem2_exponent(Exponent u, Exponent v);

/// Least-squares line through (log n, log value).
struct ExponentFit {
  std::vector<std::pair<double, double>> points;
  double slope = 0.0;
  double intercept = 0.0;
  /// max |fitted - value| / value over the points.
  double max_rel_residual = 0.0;
};

ExponentFit fit_exponent(std::vector<std::pair<double, double>> points);

/// (u, v, lambda) triple fed to the convexity check.
struct LimitOrderPoint {
  Exponent u;
  Exponent v;
  double value = 0.0;
};

struct ConvexityCheck {
  double lhs = 0.0;  ///< value at the interpolated point
  double rhs = 0.0;  ///< (1 - theta) value0 + theta value1
  double slack = 0.0;
  bool pass = false;
};

/// lambda(u_t, v_t) <= (1 - t) lambda(u_0, v_0) + t lambda(u_1, v_1), for
/// u_0, u_1, u_t <= 2 and reciprocal-linear (u_t, v_t). Throws when the
/// hypotheses fail.
ConvexityCheck corollary4_check(const LimitOrderPoint& p0, const LimitOrderPoint& p1, double theta,
                                const LimitOrderPoint& pt, double tolerance = 0.0);

struct LimitOrderTable {
  IdealTag ideal = IdealTag::Gamma;
  std::vector<Exponent> u_grid;
  std::vector<Exponent> v_grid;
  Eigen::MatrixXd values;  ///< rows u, columns v
};

/// Closed-form table. Pi2 is available only for v <= 2, where its limit order
/// coincides with the Gaussian one.
LimitOrderTable limit_order_table(IdealTag ideal, const std::vector<Exponent>& u_grid,
                                  const std::vector<Exponent>& v_grid);

}  // namespace opideal
