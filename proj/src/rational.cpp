#include "bseries/rational.hpp"

#include <cctype>
#include <map>
#include <mutex>
#include <vector>

#include "bseries/errors.hpp"

namespace bseries {

Rational parse_rational(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  std::string s(text.substr(b, e - b));
  if (s.empty()) throw ParseError("empty rational", b);
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  bool digits = false, slash = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits = true;
    } else if (s[i] == '/' && digits && !slash) {
      slash = true;
      digits = false;
    } else {
      throw ParseError("invalid rational '" + s + "'", b + i);
    }
  }
  if (!digits) throw ParseError("invalid rational '" + s + "'", b + s.size());
  if (s[0] == '+') s.erase(0, 1);
  Rational q(s, 10);
  if (q.get_den() == 0) throw ParseError("zero denominator in '" + s + "'", b);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(10); }

Rational factorial(int n) {
  Rational r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

Rational binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

Rational bernoulli(int n) {
  static std::mutex mu;
  static std::vector<Rational> cache{Rational(1)};
  std::lock_guard lock(mu);
  // sum_{k=0}^{m} binom(m+1, k) B_k = 0 for m >= 1
  while (static_cast<int>(cache.size()) <= n) {
    int m = static_cast<int>(cache.size());
    Rational s = 0;
    for (int k = 0; k < m; ++k) s += binomial(m + 1, k) * cache[k];
    cache.push_back(-s / (m + 1));
  }
  return cache[n];
}

}  // namespace bseries
