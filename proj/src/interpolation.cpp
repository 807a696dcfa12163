#include "opideal/interpolation.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "opideal/errors.hpp"

namespace opideal {

namespace {

void require_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in the open interval (0, 1)");
}

bool is_one_or_two(Exponent e) { return e == Exponent::one() || e == Exponent::two(); }

}  // namespace

Exponent interp_exponent(Exponent e0, Exponent e1, double theta) {
  require_theta(theta);
  return Exponent::from_recip((1.0 - theta) * e0.recip() + theta * e1.recip());
}

double theta_for_target(Exponent e0, Exponent e1, Exponent target) {
  const double r0 = e0.recip();
  const double r1 = e1.recip();
  const double rt = target.recip();
  if (r0 == r1) throw DomainError("endpoint exponents coincide");
  const double theta = (r0 - rt) / (r0 - r1);
  if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError("target exponent " + target.to_string() + " is not strictly between " + e0.to_string() +
                      " and " + e1.to_string());
  }
  return theta;
}

InterpolationCouple::InterpolationCouple(SpaceKind kind_, std::size_t dim_, Exponent e0_, Exponent e1_,
                                         double theta_)
    : kind(kind_), dim(dim_), e0(e0_), e1(e1_), theta(theta_) {
  if (dim == 0) throw DomainError("couple dimension must be positive");
  require_theta(theta);
}

DThetaBound dtheta_lookup(const InterpolationCouple& couple, double schatten_constant) {
  if (couple.e0 == couple.e1) {
    return {"trivial couple", DThetaKind::Exact, 1.0, "X_theta = X_0 = X_1 isometrically"};
  }
  if (couple.kind == SpaceKind::Sequence) {
    if (couple.e0.recip() >= 0.5 && couple.e1.recip() >= 0.5) {
      return {"[l_p0, l_p1], p0, p1 <= 2", DThetaKind::Exact, std::sqrt(2.0),
              "uniform bound for l_p couples below 2"};
    }
    throw DomainError("no d_theta bound registered for l couples with an exponent above 2");
  }
  if (is_one_or_two(couple.e0) && is_one_or_two(couple.e1)) {
    if (!(schatten_constant >= 1.0) || !std::isfinite(schatten_constant)) {
      throw DomainError("the [S_1, S_2] d_theta constant must be a finite value >= 1");
    }
    return {"[S_1, S_2]", DThetaKind::Finite, schatten_constant,
            "finite uniform bound exists; numeric value is a configurable assumption"};
  }
  throw DomainError("no d_theta bound registered for Schatten couple [S_" + couple.e0.to_string() + ", S_" +
                    couple.e1.to_string() + "]");
}

std::string AuditReport::inequality() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.6g <= %.6g (slack %.3g, 3 sigma %.3g)", lhs, rhs, slack, 3.0 * sigma);
  return buf;
}

AuditReport prop3_audit(const NormEstimate& midpoint_lower, const NormEstimate& end0_upper,
                        const NormEstimate& end1_upper, double theta, const DThetaBound& dtheta) {
  require_theta(theta);
  if (!midpoint_lower.bounds_below()) {
    throw DomainError("midpoint estimate is " + std::string(to_string(midpoint_lower.cert)) +
                      "; an audit needs a lower-type value there");
  }
  for (const auto* e : {&end0_upper, &end1_upper}) {
    if (!e->bounds_above()) {
      throw DomainError("endpoint estimate is " + std::string(to_string(e->cert)) +
                        "; an audit needs upper-type values there");
    }
    if (!(e->value > 0.0)) throw DomainError("endpoint upper bounds must be positive");
  }
  AuditReport r;
  r.theta = theta;
  r.dtheta = dtheta;
  r.lhs = midpoint_lower.value;
  r.rhs = dtheta.value * std::pow(end0_upper.value, 1.0 - theta) * std::pow(end1_upper.value, theta);
  r.slack = r.rhs - r.lhs;
  const double s_l = midpoint_lower.stderr_or_zero();
  const double s_0 = (1.0 - theta) * r.rhs / end0_upper.value * end0_upper.stderr_or_zero();
  const double s_1 = theta * r.rhs / end1_upper.value * end1_upper.stderr_or_zero();
  r.sigma = std::sqrt(s_l * s_l + s_0 * s_0 + s_1 * s_1);
  r.pass = r.slack >= -3.0 * r.sigma;
  return r;
}

}  // namespace opideal
