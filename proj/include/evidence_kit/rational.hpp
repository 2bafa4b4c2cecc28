#pragma once

// Exact rational scalar and the small set of conversions the rest of the
// library needs. Every generic routine is instantiated for either `Rational`
// (exact mode) or `double` (binary64 mode).

#include "evidence_kit/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace evidence_kit {

using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

enum class NumericsMode { exact_rational, binary64 };

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

template <class T>
constexpr NumericsMode mode_of() {
  return is_exact_v<T> ? NumericsMode::exact_rational : NumericsMode::binary64;
}

inline std::string_view to_string(NumericsMode m) {
  return m == NumericsMode::exact_rational ? "exact-rational" : "binary64";
}

// Exact value of a finite double.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::invalid_input, "non-finite value has no rational form");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double mant = std::frexp(x, &exp);  // x = mant * 2^exp, 0.5 <= |mant| < 1
  auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  BigInt num(scaled);
  if (exp >= 0) return Rational(num << exp);
  BigInt den(1);
  den <<= -exp;
  return Rational(num, den);
}

namespace detail {

// Nearest double to num/den for arbitrarily large operands.
inline double ratio_to_double(BigInt num, BigInt den) {
  if (num == 0) return 0.0;
  const bool neg = (num < 0) != (den < 0);
  if (num < 0) num = -num;
  if (den < 0) den = -den;
  long shift = 0;
  const auto nbits = static_cast<long>(boost::multiprecision::msb(num));
  const auto dbits = static_cast<long>(boost::multiprecision::msb(den));
  // Bring the quotient to ~64 significant bits before the division.
  const long want = 64 + dbits - nbits;
  if (want > 0) {
    num <<= want;
    shift -= want;
  } else if (want < 0) {
    den <<= -want;
    shift -= want;
  }
  BigInt q = num / den;
  const double d = static_cast<double>(q);
  const double r = std::ldexp(d, static_cast<int>(shift));
  return neg ? -r : r;
}

}  // namespace detail

inline double to_double(const Rational& q) {
  return detail::ratio_to_double(boost::multiprecision::numerator(q),
                                 boost::multiprecision::denominator(q));
}
inline double to_double(double x) { return x; }

template <class T>
T from_double(double x) {
  if constexpr (is_exact_v<T>) {
    return rational_from_double(x);
  } else {
    return x;
  }
}

// Smallest double >= ulps steps above x; used to build rational upper
// enclosures of values computed with libm.
inline double round_up(double x, int ulps = 4) {
  for (int i = 0; i < ulps; ++i) x = std::nextafter(x, std::numeric_limits<double>::infinity());
  return x;
}

inline std::string to_text(const Rational& q) { return q.str(); }
inline std::string to_text(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Parses "p", "p/q", or a decimal such as "0.25" or "1.5e-3" exactly.
namespace detail {
// Boost reads a leading 0 as octal, so strip it for plain decimal digits.
inline BigInt decimal_bigint(std::string_view digits) {
  while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
  return BigInt(std::string(digits.empty() ? "0" : digits));
}
}  // namespace detail

inline Rational parse_rational(std::string_view text) {
  const std::string original(text);
  auto fail = [&]() -> Rational {
    throw Error(ErrorCode::invalid_input, "not a rational literal: '" + original + "'");
  };
  auto digits_ok = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  auto strip_sign = [](std::string_view& s) {
    const bool neg = !s.empty() && s.front() == '-';
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    return neg;
  };
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    const bool neg = strip_sign(num);
    if (!digits_ok(num) || !digits_ok(den)) return fail();
    BigInt d = detail::decimal_bigint(den);
    if (d == 0) return fail();
    Rational q(detail::decimal_bigint(num), d);
    return neg ? Rational(-q) : q;
  }

  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    auto exp_text = text.substr(e + 1);
    const bool neg_exp = strip_sign(exp_text);
    if (!digits_ok(exp_text) || exp_text.size() > 6) return fail();
    exponent = std::stol(std::string(exp_text));
    if (neg_exp) exponent = -exponent;
    text = text.substr(0, e);
  }
  const bool neg = strip_sign(text);
  std::string_view whole = text;
  std::string_view frac;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    whole = text.substr(0, dot);
    frac = text.substr(dot + 1);
  }
  if (whole.empty() && frac.empty()) return fail();
  if ((!whole.empty() && !digits_ok(whole)) || (!frac.empty() && !digits_ok(frac))) return fail();
  BigInt n = detail::decimal_bigint(std::string(whole) + std::string(frac));
  exponent -= static_cast<long>(frac.size());
  Rational q(n);
  const BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
  q = exponent >= 0 ? Rational(q * scale) : Rational(q / scale);
  return neg ? Rational(-q) : q;
}

inline BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

inline double binomial_double(unsigned n, unsigned k) {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r < 0x1p53 ? std::round(r) : r;
}

template <class T>
T binomial_as(unsigned n, unsigned k) {
  if constexpr (is_exact_v<T>) {
    return Rational(binomial(n, k));
  } else {
    return binomial_double(n, k);
  }
}

}  // namespace evidence_kit
