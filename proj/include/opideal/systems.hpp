#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "opideal/ascent.hpp"
#include "opideal/family.hpp"
#include "opideal/norm_estimate.hpp"
#include "opideal/sampling.hpp"
#include "opideal/space.hpp"

namespace opideal {

using Frequency = std::vector<std::int64_t>;

/// Z_{N_1} x ... x Z_{N_r} with the normalized counting measure.
class CharacterGroup {
 public:
  static CharacterGroup cyclic(std::int64_t order);
  static CharacterGroup product(std::vector<std::int64_t> factors);

  const std::vector<std::int64_t>& factors() const noexcept { return factors_; }
  std::size_t order() const noexcept { return order_; }
  /// Coordinates of the point with linear index `index` (first factor fastest).
  std::vector<std::int64_t> point(std::size_t index) const;
  /// gamma_k(x) = exp(2 pi i sum_j k_j x_j / N_j).
  cdouble character(const Frequency& k, std::size_t point_index) const;
  Frequency reduce(const Frequency& k) const;

  friend bool operator==(const CharacterGroup&, const CharacterGroup&) = default;

 private:
  std::vector<std::int64_t> factors_;
  std::size_t order_ = 1;
};

/// A finite set of distinct characters; the |Lambda| x |G| character table is
/// built once at construction and shared by copies.
class CharacterSet {
 public:
  CharacterSet(CharacterGroup group, std::vector<Frequency> freqs);
  /// Lambda subset of Z_N given by integer frequencies.
  static CharacterSet cyclic(std::int64_t order, const std::vector<std::int64_t>& freqs);
  /// {2^0, ..., 2^{m-1}} in Z_N.
  static CharacterSet lacunary(std::size_t m, std::int64_t order);
  /// All N characters of Z_N.
  static CharacterSet full(std::int64_t order);

  const CharacterGroup& group() const noexcept { return group_; }
  const std::vector<Frequency>& frequencies() const noexcept { return freqs_; }
  std::size_t size() const noexcept { return freqs_.size(); }
  /// Row i holds gamma_i evaluated at every group point.
  const Eigen::MatrixXcd& table() const noexcept { return *table_; }
  /// Characters i in [0, m).
  CharacterSet prefix(std::size_t m) const;
  std::string to_string() const;

 private:
  CharacterGroup group_;
  std::vector<Frequency> freqs_;
  std::shared_ptr<const Eigen::MatrixXcd> table_;
};

/// f = sum alpha_gamma gamma over a character set.
struct SpanElement {
  CharacterSet cset;
  Eigen::VectorXcd coeffs;

  /// f evaluated at every group point.
  Eigen::VectorXcd values() const;
};

/// ((1/|G|) sum_x |f(x)|^p)^{1/p}, or max_x |f(x)| for p = inf.
double lp_norm_of_span(const SpanElement& f, Exponent p);
/// Same, from coefficients over a character set.
double lp_norm_of_span(const CharacterSet& cset, const Eigen::VectorXcd& coeffs, Exponent p);

/// Gaussian (sampled) or character system (exact group average).
class OrthonormalSystem {
 public:
  static OrthonormalSystem gaussian(SamplingConfig sampling);
  static OrthonormalSystem characters(CharacterSet cset, unsigned threads = 0);

  bool is_gaussian() const noexcept { return std::holds_alternative<SamplingConfig>(kind_); }
  const SamplingConfig& sampling() const;
  const CharacterSet& character_set() const;
  unsigned threads() const noexcept;
  /// Largest family length the system can pair with (unbounded for Gaussian).
  std::size_t capacity() const noexcept;
  std::string to_string() const;

 private:
  struct Characters {
    CharacterSet cset;
    unsigned threads;
  };
  explicit OrthonormalSystem(std::variant<SamplingConfig, Characters> k) : kind_(std::move(k)) {}
  std::variant<SamplingConfig, Characters> kind_;
};

/// (integral ||sum_i b_i y_i||^2 dmu)^{1/2} with b_1..b_m the first m members of
/// the system. Characters: exact group average. Gaussian: Monte Carlo
/// (Sampled), or Exact when the codomain is Hilbert (= ||(y_i)||_F).
NormEstimate second_moment(const OrthonormalSystem& system, const VectorSystem& images);

/// Smoothing exponent for p = inf surrogates.
inline constexpr double kInfinitySurrogate = 64.0;

/// Best ||f||_p / ||f||_2 found by ascent on the coefficient sphere (CertifiedLower;
/// Exact 1 for p = 2). Witness holds the maximizing coefficients.
NormEstimate kp_constant_lower(const CharacterSet& cset, Exponent p, const AscentConfig& cfg = {});

/// Best sum|alpha| / ||Q||_inf found by ascent on a smoothed objective (CertifiedLower).
NormEstimate sidon_constant_lower(const CharacterSet& cset, const AscentConfig& cfg = {});

struct KpProfileRow {
  Exponent p;
  NormEstimate estimate;
  double ratio_to_sqrt_p = 0.0;
};

std::vector<KpProfileRow> kp_growth_profile(const CharacterSet& cset, const std::vector<Exponent>& p_grid,
                                            const AscentConfig& cfg = {});

/// x_i(h) = conj(gamma_i(h)) over the points h = j * floor(N/n), j < n, of a
/// cyclic group: the kernel family, one element per character, in l_u^n.
VectorSystem subgroup_kernel_family(const SpaceDescriptor& space, const CharacterSet& cset);

}  // namespace opideal
