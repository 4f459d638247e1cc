#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "hyperflow/error.hpp"

namespace hyperflow {

using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

/// "num/den" in lowest terms, e.g. "2/3", "1/1", "0/1".
inline std::string to_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

/// Shortest readable form: "3" for integers, "2/3" otherwise.
inline std::string to_short_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return to_string(r);
}

inline std::strong_ordering compare(const Rational& a, const Rational& b) {
  int c = a.compare(b);
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

inline bool is_integral(const Rational& r) { return denominator(r) == 1; }

inline std::optional<std::int64_t> to_int64(const Rational& r) {
  if (!is_integral(r)) return std::nullopt;
  const BigInt n = numerator(r);
  if (n > BigInt(INT64_MAX) || n < BigInt(INT64_MIN)) return std::nullopt;
  return n.convert_to<std::int64_t>();
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Decimal digits as a big integer. Leading zeros are dropped so the text is
/// never read as octal.
inline BigInt decimal_int(std::string_view digits) {
  while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
  return BigInt(std::string{digits});
}

}  // namespace detail

/// Accepts "n", "n/d" and finite decimals such as "-0.25".
inline Rational parse_rational(std::string_view text) {
  std::string_view s = detail::trim(text);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  Rational result;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::string_view num = detail::trim(s.substr(0, slash));
    std::string_view den = detail::trim(s.substr(slash + 1));
    if (!detail::all_digits(num) || !detail::all_digits(den))
      throw Error(Errc::InvalidArgument, "malformed rational '" + std::string(text) + "'");
    const BigInt d = detail::decimal_int(den);
    if (d == 0) throw Error(Errc::InvalidArgument, "zero denominator in '" + std::string(text) + "'");
    result = Rational(detail::decimal_int(num), d);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    if ((!whole.empty() && !detail::all_digits(whole)) || !detail::all_digits(frac))
      throw Error(Errc::InvalidArgument, "malformed decimal '" + std::string(text) + "'");
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const BigInt digits = detail::decimal_int(std::string(whole) + std::string(frac));
    result = Rational(digits, scale);
  } else {
    if (!detail::all_digits(s))
      throw Error(Errc::InvalidArgument, "malformed number '" + std::string(text) + "'");
    result = Rational(detail::decimal_int(s));
  }
  return negative ? Rational(-result) : result;
}

}  // namespace hyperflow
