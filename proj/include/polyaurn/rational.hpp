// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "polyaurn/errors.hpp"

namespace polyaurn {

// All exact probabilities and weights are arbitrary-precision rationals;
// cpp_rational keeps values in lowest terms automatically.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Sequence/partition probabilities are Rationals constrained to [0,1].
using ExactProbability = Rational;

/// Parses "p/q", an integer, or a plain decimal string ("0.5" -> 1/2,
/// exactly). No exponents. Throws ParameterError on malformed input.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw ParameterError("not a rational: '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();

  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    pos = 1;
  }
  if (pos == text.size()) return fail();

  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto parse_int = [&](std::string_view s) -> BigInt {
    if (s.empty()) fail();
    for (char c : s)
      if (!is_digit(c)) fail();
    return BigInt(std::string(s));
  };

  std::string_view body = text.substr(pos);
  Rational value;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_int(body.substr(0, slash));
    BigInt den = parse_int(body.substr(slash + 1));
    if (den == 0) throw ParameterError("zero denominator: '" + std::string(text) + "'");
    value = Rational(num, den);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    std::string_view whole = body.substr(0, dot);
    std::string_view frac = body.substr(dot + 1);
    if (whole.empty() && frac.empty()) fail();
    BigInt digits = parse_int(whole.empty() ? std::string_view("0") : whole);
    BigInt scale = 1;
    for (char c : frac) {
      if (!is_digit(c)) fail();
      digits = digits * 10 + (c - '0');
      scale *= 10;
    }
    value = Rational(digits, scale);
  } else {
    value = Rational(parse_int(body));
  }
  return negative ? -value : value;
}

/// Lowest-terms rendering: "p/q", or just "p" when the denominator is 1.
inline std::string to_string(const Rational& r) { return r.str(); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Rising factorial a(a+1)...(a+i-1), with the empty product equal to 1.
inline Rational rising_factorial(const Rational& a, unsigned i) {
  Rational result = 1;
  Rational term = a;
  for (unsigned k = 0; k < i; ++k, term += 1) result *= term;
  return result;
}

}  // namespace polyaurn
