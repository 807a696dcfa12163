#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace opideal {

/// An extended exponent u in [1, inf], stored by its reciprocal so that
/// u = inf is the exact value 0 and interpolation is linear arithmetic.
///
/// The conjugate reciprocal 1 - 1/u is computed once at construction and
/// dual() swaps the two, which makes duality an exact involution.
class Exponent {
 public:
  /// u = 2.
  Exponent() noexcept : recip_(0.5), conj_recip_(0.5) {}

  static Exponent from_value(double u);
  static Exponent from_recip(double recip);
  static Exponent infinity() noexcept { return Exponent(0.0, 1.0); }
  static Exponent one() noexcept { return Exponent(1.0, 0.0); }
  static Exponent two() noexcept { return Exponent(0.5, 0.5); }

  /// Accepts "inf", "infinity", integers, decimals and ratios such as "4/3".
  static Exponent parse(std::string_view text);

  double recip() const noexcept { return recip_; }
  double value() const noexcept;
  bool is_infinite() const noexcept { return recip_ == 0.0; }

  Exponent dual() const noexcept { return Exponent(conj_recip_, recip_); }

  std::string to_string() const;

  friend bool operator==(const Exponent& a, const Exponent& b) noexcept {
    return a.recip_ == b.recip_;
  }
  /// Orders by the exponent value u, i.e. reversed reciprocal order.
  friend std::partial_ordering operator<=>(const Exponent& a, const Exponent& b) noexcept {
    return b.recip_ <=> a.recip_;
  }

 private:
  Exponent(double recip, double conj_recip) noexcept : recip_(recip), conj_recip_(conj_recip) {}

  double recip_;
  double conj_recip_;
};

inline Exponent dual_exponent(Exponent e) noexcept { return e.dual(); }

}  // namespace opideal
