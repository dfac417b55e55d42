#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace bseries {

using Rational = mpq_class;

// Accepts "p", "p/q", "-p/q" with optional surrounding whitespace.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);

Rational factorial(int n);
Rational binomial(int n, int k);

// Bernoulli number B_n with B_1 = -1/2.
Rational bernoulli(int n);

inline Rational make_rational(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace bseries
