#include "opideal/norm_estimate.hpp"

#include <cmath>

#include "opideal/errors.hpp"

namespace opideal {

std::string_view to_string(Certification c) noexcept {
  switch (c) {
    case Certification::Exact: return "exact";
    case Certification::CertifiedLower: return "lower";
    case Certification::CertifiedUpper: return "upper";
    case Certification::Sampled: return "sampled";
    case Certification::Heuristic: return "heuristic";
  }
  return "heuristic";
}

namespace {

NormEstimate make(double value, Certification c, std::optional<double> se, std::string method) {
  if (!std::isfinite(value)) throw DomainError("estimate value must be finite (" + method + ")");
  if (se && !(*se >= 0.0)) throw DomainError("stderr must be nonnegative (" + method + ")");
  NormEstimate e;
  e.value = value;
  e.cert = c;
  e.std_error = se;
  e.method = std::move(method);
  return e;
}

}  // namespace

NormEstimate NormEstimate::exact(double value, std::string method) {
  return make(value, Certification::Exact, std::nullopt, std::move(method));
}

NormEstimate NormEstimate::lower(double value, std::string method, std::optional<double> se) {
  return make(value, Certification::CertifiedLower, se, std::move(method));
}

NormEstimate NormEstimate::upper(double value, std::string method, std::optional<double> se) {
  return make(value, Certification::CertifiedUpper, se, std::move(method));
}

NormEstimate NormEstimate::sampled(double value, double se, std::string method) {
  return make(value, Certification::Sampled, se, std::move(method));
}

NormEstimate NormEstimate::heuristic(double value, std::string method, std::optional<double> se) {
  return make(value, Certification::Heuristic, se, std::move(method));
}

}  // namespace opideal
