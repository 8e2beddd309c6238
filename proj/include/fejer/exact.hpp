#pragma once

// Exact rationals, arbitrary-size integers and certified enclosures of
// square and fourth roots. Roots are the only inexact step; every other
// operation on an Enclosure is exact rational arithmetic, so an enclosure
// is a genuine interval containing the true value.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "fejer/errors.hpp"

namespace fejer {

using Integer = boost::multiprecision::cpp_int;
/// Nonnegative by convention; bounds are never negative.
using Natural = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

namespace exact {

inline Integer numerator(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denominator(const Rational& q) { return boost::multiprecision::denominator(q); }

inline Integer floor_div(const Integer& n, const Integer& d) {
  Integer q = n / d;  // truncates toward zero
  if ((n % d != 0) && ((n < 0) != (d < 0))) --q;
  return q;
}

/// ceil(n / d) for d > 0, without forming a normalized rational.
inline Integer ceil_div(const Integer& n, const Integer& d) { return -floor_div(-n, d); }

inline Integer floor(const Rational& q) { return floor_div(numerator(q), denominator(q)); }
inline Integer ceil(const Rational& q) { return -floor(-q); }

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Number of bits of |n| (0 for n == 0).
inline std::size_t bit_length(const Integer& n) {
  if (n == 0) return 0;
  return boost::multiprecision::msb(boost::multiprecision::abs(n)) + 1;
}

/// floor(sqrt(n)) for n >= 0 by Newton iteration seeded from a double.
inline Integer isqrt(const Integer& n) {
  if (n < 0) throw InvalidRange("isqrt of negative integer");
  if (n < 2) return n;
  const std::size_t bits = bit_length(n);
  Integer x;
  if (bits <= 52) {
    x = Integer(static_cast<std::uint64_t>(std::sqrt(n.convert_to<double>()))) + 2;
  } else {
    // Seed above the root: 2^ceil(bits/2).
    x = Integer(1) << ((bits + 1) / 2);
  }
  // Newton from above decreases monotonically to floor(sqrt(n)).
  while (true) {
    Integer y = (x + n / x) >> 1;
    if (y >= x) break;
    x = std::move(y);
  }
  while (x * x > n) --x;
  while ((x + 1) * (x + 1) <= n) ++x;
  return x;
}

/// floor(n^(1/4)); floor(sqrt(floor(sqrt(n)))) is exact for integers.
inline Integer iroot4(const Integer& n) { return isqrt(isqrt(n)); }

inline std::string to_string(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

namespace detail {
inline Integer parse_integer(std::string_view s, std::string_view whole) {
  if (s.empty()) throw InvalidConfig("malformed rational \"" + std::string(whole) + "\"");
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') i = 1;
  if (i == s.size()) throw InvalidConfig("malformed rational \"" + std::string(whole) + "\"");
  for (std::size_t j = i; j < s.size(); ++j)
    if (s[j] < '0' || s[j] > '9')
      throw InvalidConfig("malformed rational \"" + std::string(whole) + "\"");
  // cpp_int reads a leading 0 as an octal prefix.
  while (i + 1 < s.size() && s[i] == '0') ++i;
  Integer v(std::string(s.substr(i)));
  return s[0] == '-' ? Integer(-v) : v;
}
}  // namespace detail

/// Parses "p/q", "p" or a plain decimal such as "0.25" exactly.
inline Rational parse_rational(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  const auto last = text.find_last_not_of(" \t");
  if (first == std::string_view::npos)
    throw InvalidConfig("malformed rational \"" + std::string(text) + "\"");
  const std::string_view s = text.substr(first, last - first + 1);
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const Integer p = detail::parse_integer(s.substr(0, slash), text);
    const Integer q = detail::parse_integer(s.substr(slash + 1), text);
    if (q == 0) throw InvalidConfig("malformed rational \"" + std::string(text) + "\": zero denominator");
    return Rational(p, q);
  }
  if (const auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string digits(s.substr(0, dot));
    const std::string_view frac = s.substr(dot + 1);
    digits += frac;
    if (digits.empty() || digits == "-" || digits == "+")
      throw InvalidConfig("malformed rational \"" + std::string(text) + "\"");
    const Integer p = detail::parse_integer(digits, text);
    return Rational(p, boost::multiprecision::pow(Integer(10), static_cast<unsigned>(frac.size())));
  }
  return Rational(detail::parse_integer(s, text));
}

/// Closed rational interval [lo, hi].
struct Enclosure {
  Rational lo;
  Rational hi;

  static Enclosure point(const Rational& v) { return {v, v}; }
  bool is_point() const { return lo == hi; }
  bool contains(const Rational& v) const { return lo <= v && v <= hi; }
  Rational width() const { return hi - lo; }
};

// Interval operations below assume nonnegative operands, which is all the
// bound formulas need.

inline Enclosure operator+(const Enclosure& a, const Enclosure& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Enclosure operator+(const Enclosure& a, const Rational& b) { return {a.lo + b, a.hi + b}; }
inline Enclosure operator*(const Enclosure& a, const Enclosure& b) { return {a.lo * b.lo, a.hi * b.hi}; }
inline Enclosure operator*(const Enclosure& a, const Rational& b) { return {a.lo * b, a.hi * b}; }
inline Enclosure operator*(const Rational& b, const Enclosure& a) { return a * b; }

/// a / b for a >= 0 and b with strictly positive lower end.
inline Enclosure operator/(const Enclosure& a, const Enclosure& b) {
  if (b.lo <= 0) throw InvalidRange("division by an enclosure touching zero");
  return {a.lo / b.hi, a.hi / b.lo};
}
inline Enclosure operator/(const Rational& a, const Enclosure& b) { return Enclosure::point(a) / b; }

inline Enclosure pow(const Enclosure& a, unsigned e) {
  Enclosure r = Enclosure::point(1);
  for (unsigned i = 0; i < e; ++i) r = r * a;
  return r;
}

/// sqrt(q) for q >= 0, width at most 1/(den(q) 2^bits); exact when q is a
/// rational square.
inline Enclosure sqrt_enclosure(const Rational& q, unsigned bits) {
  if (q < 0) throw InvalidRange("sqrt of negative rational");
  const Integer n = numerator(q);
  const Integer d = denominator(q);
  const Integer nd = n * d;
  const Integer r = isqrt(nd);
  if (r * r == nd) return Enclosure::point(Rational(r, d));
  const Integer scale = Integer(1) << bits;
  const Integer s = isqrt(nd * scale * scale);
  return {Rational(s, d * scale), Rational(s + 1, d * scale)};
}

/// q^(1/4) for q >= 0; exact when q is a rational fourth power.
inline Enclosure root4_enclosure(const Rational& q, unsigned bits) {
  if (q < 0) throw InvalidRange("fourth root of negative rational");
  const Integer n = numerator(q);
  const Integer d = denominator(q);
  const Integer nd3 = n * d * d * d;
  const Integer r = iroot4(nd3);
  if (r * r * r * r == nd3) return Enclosure::point(Rational(r, d));
  const Integer scale = Integer(1) << bits;
  const Integer s = iroot4(nd3 * scale * scale * scale * scale);
  return {Rational(s, d * scale), Rational(s + 1, d * scale)};
}

/// Root-enclosure precision. Ceilings and floors refine from initial_bits by
/// doubling; past max_bits an undecided ceiling/floor takes the upper
/// candidate, which keeps every (monotone) bound valid.
struct Precision {
  unsigned initial_bits = 64;
  unsigned max_bits = 1u << 14;
};

/// Smallest integer >= the value enclosed by make(bits), certified.
template <class Make>
Integer certified_ceil(const Make& make, const Precision& prec, unsigned extra_bits = 0) {
  unsigned bits = prec.initial_bits;
  const unsigned max_bits = prec.max_bits + extra_bits;
  while (true) {
    const Enclosure e = make(bits);
    Integer lo = ceil(e.lo);
    Integer hi = ceil(e.hi);
    if (lo == hi || bits >= max_bits) return hi;
    bits = std::min(max_bits, bits * 2);
  }
}

/// Largest integer <= the enclosed value, certified; rounds up when undecided.
template <class Make>
Integer certified_floor(const Make& make, const Precision& prec, unsigned extra_bits = 0) {
  unsigned bits = prec.initial_bits;
  const unsigned max_bits = prec.max_bits + extra_bits;
  while (true) {
    const Enclosure e = make(bits);
    Integer lo = floor(e.lo);
    Integer hi = floor(e.hi);
    if (lo == hi || bits >= max_bits) return hi;
    bits = std::min(max_bits, bits * 2);
  }
}

/// Decimal digit count of n >= 0 (1 for n == 0).
inline std::size_t decimal_digits(const Natural& n) {
  const std::size_t bits = bit_length(n);
  if (bits < 3000) return n == 0 ? 1 : n.str().size();
  // bits-1 <= log2 n < bits, so the digit count is one of two candidates.
  const auto est = static_cast<std::size_t>(static_cast<double>(bits - 1) * 0.30102999566398120);
  const Natural p = boost::multiprecision::pow(Natural(10), static_cast<unsigned>(est + 1));
  return n >= p ? est + 2 : est + 1;
}

}  // namespace exact
}  // namespace fejer
