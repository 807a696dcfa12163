#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace opideal {

/// How a measured value relates to the quantity it estimates.
///
/// `Sampled` is an unbiased Monte Carlo estimate of an exactly defined
/// quantity; it bounds the target in both directions up to its stderr.
enum class Certification { Exact, CertifiedLower, CertifiedUpper, Sampled, Heuristic };

std::string_view to_string(Certification c) noexcept;

/// The family (and optionally the coefficients) that realized an estimate.
struct Witness {
  std::string description;
  Eigen::VectorXcd coefficients;
};

/// Output of every estimator in the library.
struct NormEstimate {
  double value = 0.0;
  Certification cert = Certification::Heuristic;
  std::optional<double> std_error;
  std::string method;
  std::optional<Witness> witness;

  static NormEstimate exact(double value, std::string method);
  static NormEstimate lower(double value, std::string method, std::optional<double> se = {});
  static NormEstimate upper(double value, std::string method, std::optional<double> se = {});
  static NormEstimate sampled(double value, double se, std::string method);
  static NormEstimate heuristic(double value, std::string method, std::optional<double> se = {});

  /// True if the value may serve as a lower bound (within stderr).
  bool bounds_below() const noexcept {
    return cert == Certification::Exact || cert == Certification::CertifiedLower ||
           cert == Certification::Sampled;
  }
  /// True if the value may serve as an upper bound (within stderr).
  bool bounds_above() const noexcept {
    return cert == Certification::Exact || cert == Certification::CertifiedUpper ||
           cert == Certification::Sampled;
  }
  double stderr_or_zero() const noexcept { return std_error.value_or(0.0); }

  NormEstimate with_witness(Witness w) && {
    witness = std::move(w);
    return std::move(*this);
  }
};

}  // namespace opideal
