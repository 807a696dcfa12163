#pragma once

#include <cstddef>
#include <string>

#include "opideal/exponent.hpp"
#include "opideal/norm_estimate.hpp"
#include "opideal/space.hpp"

namespace opideal {

/// 1/p_t = (1 - t)/p_0 + t/p_1, for t in (0, 1).
Exponent interp_exponent(Exponent e0, Exponent e1, double theta);

/// Inverse of interp_exponent; the target's reciprocal must lie strictly
/// between the endpoint reciprocals.
double theta_for_target(Exponent e0, Exponent e1, Exponent target);

/// [X_{e0}^n, X_{e1}^n]_theta for l_p or Schatten couples.
struct InterpolationCouple {
  SpaceKind kind = SpaceKind::Sequence;
  std::size_t dim = 1;
  Exponent e0;
  Exponent e1;
  double theta = 0.5;

  InterpolationCouple(SpaceKind kind, std::size_t dim, Exponent e0, Exponent e1, double theta);
  Exponent interpolated() const { return interp_exponent(e0, e1, theta); }
  SpaceDescriptor space0() const { return {kind, dim, e0}; }
  SpaceDescriptor space1() const { return {kind, dim, e1}; }
  SpaceDescriptor midpoint() const { return {kind, dim, interpolated()}; }
};

enum class DThetaKind { Exact, Finite };

/// Registered bound on d_theta for a couple class.
struct DThetaBound {
  std::string couple_class;
  DThetaKind kind = DThetaKind::Exact;
  double value = 1.0;
  std::string provenance;
};

/// Default value for the uniform [S_1, S_2] bound, whose numeric value is not known.
inline constexpr double kDefaultSchattenDTheta = 2.0;

/// Trivial couples give 1; l couples with p0, p1 <= 2 give sqrt(2);
/// [S_1, S_2] (either order) gives the configurable Finite bound.
/// Everything else is rejected.
DThetaBound dtheta_lookup(const InterpolationCouple& couple, double schatten_constant = kDefaultSchattenDTheta);

struct AuditReport {
  double lhs = 0.0;    ///< certified lower bound at the interpolated pair
  double rhs = 0.0;    ///< d_theta * U0^{1-theta} * U1^theta
  double slack = 0.0;  ///< rhs - lhs
  double sigma = 0.0;  ///< propagated standard error of the slack
  bool pass = false;
  double theta = 0.0;
  DThetaBound dtheta;

  /// "lhs <= rhs" with both sides printed.
  std::string inequality() const;
};

/// Checks pi_B(T: E_t -> F_t) <= d_theta pi_B(T: E_0 -> F_0)^{1-t} pi_B(T: E_1 -> F_1)^t.
/// The midpoint must be a lower-type estimate and the endpoints upper-type;
/// PASS iff slack >= -3 sigma.
AuditReport prop3_audit(const NormEstimate& midpoint_lower, const NormEstimate& end0_upper,
                        const NormEstimate& end1_upper, double theta, const DThetaBound& dtheta);

}  // namespace opideal
