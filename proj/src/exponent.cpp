#include "opideal/exponent.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "opideal/errors.hpp"

namespace opideal {

namespace {

double parse_number(std::string_view text) {
  double out = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw DomainError("cannot parse exponent component '" + std::string(text) + "'");
  }
  return out;
}

}  // namespace

Exponent Exponent::from_value(double u) {
  if (std::isinf(u) && u > 0) return infinity();
  if (!(u >= 1.0)) throw DomainError("exponent must lie in [1, inf], got " + std::to_string(u));
  const double r = 1.0 / u;
  return Exponent(r, 1.0 - r);
}

Exponent Exponent::from_recip(double recip) {
  if (!(recip >= 0.0 && recip <= 1.0)) {
    throw DomainError("reciprocal exponent must lie in [0, 1], got " + std::to_string(recip));
  }
  return Exponent(recip, 1.0 - recip);
}

Exponent Exponent::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text == "inf" || text == "infinity" || text == "Inf" || text == "oo") return infinity();
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const double num = parse_number(text.substr(0, slash));
    const double den = parse_number(text.substr(slash + 1));
    if (!(num > 0.0) || !(den > 0.0)) throw DomainError("invalid ratio exponent '" + std::string(text) + "'");
    // 1/u = den/num, exact whenever both are small integers.
    return from_recip(den / num);
  }
  return from_value(parse_number(text));
}

double Exponent::value() const noexcept {
  return recip_ == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / recip_;
}

std::string Exponent::to_string() const {
  if (is_infinite()) return "inf";
  const double u = value();
  // Small rationals print as p/q so that they survive a parse round trip.
  for (int q = 1; q <= 12; ++q) {
    const double p = u * q;
    const double rp = std::round(p);
    if (std::abs(p - rp) < 1e-12 * std::max(1.0, p)) {
      if (q == 1) return std::to_string(static_cast<long long>(rp));
      return std::to_string(static_cast<long long>(rp)) + "/" + std::to_string(q);
    }
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, u);
  return std::string(buf, ptr);
}

}  // namespace opideal
