#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "bseries/errors.hpp"
#include "bseries/rational.hpp"

namespace bseries {

// Power series in h truncated after a fixed degree. Exact constants carry degree 0 and
// adopt the truncation of whatever they are combined with.
class TruncSeries {
 public:
  TruncSeries() : c_(1) {}
  TruncSeries(const Rational& c) : c_{c} {}  // NOLINT: constants convert implicitly
  static TruncSeries h(int degree);

  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  Rational coeff(int k) const { return k <= degree() ? c_[k] : Rational(0); }

  TruncSeries& operator+=(const TruncSeries& o);
  TruncSeries& operator-=(const TruncSeries& o);
  friend TruncSeries operator+(TruncSeries a, const TruncSeries& b) { return a += b; }
  friend TruncSeries operator-(TruncSeries a, const TruncSeries& b) { return a -= b; }
  friend TruncSeries operator*(const TruncSeries& a, const TruncSeries& b);
  friend bool operator==(const TruncSeries& a, const TruncSeries& b);

 private:
  std::vector<Rational> c_;
};

template <class S>
S from_rational(const Rational& q);
template <>
inline double from_rational<double>(const Rational& q) {
  return q.get_d();
}
template <>
inline Rational from_rational<Rational>(const Rational& q) {
  return q;
}
template <>
inline TruncSeries from_rational<TruncSeries>(const Rational& q) {
  return TruncSeries(q);
}

// Multivariate polynomial with exact rational coefficients; monomials are exponent vectors.
class Polynomial {
 public:
  using Monomial = std::vector<int>;

  explicit Polynomial(int nvars = 0) : nvars_(nvars) {}
  static Polynomial constant(int nvars, const Rational& c);
  static Polynomial variable(int nvars, int i);

  int nvars() const noexcept { return nvars_; }
  const std::map<Monomial, Rational>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  int degree() const;

  void add_term(const Monomial& m, const Rational& c);
  Polynomial derivative(int var) const;

  template <class S>
  S eval(const std::vector<S>& x) const {
    if (static_cast<int>(x.size()) != nvars_) throw DomainError("polynomial evaluated at wrong dimension");
    S acc = from_rational<S>(0);
    for (const auto& [m, c] : terms_) {
      S term = from_rational<S>(c);
      for (int i = 0; i < nvars_; ++i)
        for (int e = 0; e < m[i]; ++e) term = term * x[i];
      acc = acc + term;
    }
    return acc;
  }

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(const Rational& s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  // Variables print as y1, y2, ...
  std::string str() const;

 private:
  int nvars_;
  std::map<Monomial, Rational> terms_;
};

// Polynomial vector field F: Q^n -> Q^n. Partial derivatives are cached; their index lists are
// sorted, which makes them symmetric by construction.
class PolyVectorField {
 public:
  explicit PolyVectorField(std::vector<Polynomial> components);
  PolyVectorField(const PolyVectorField& o) : comps_(o.comps_) {}
  PolyVectorField& operator=(const PolyVectorField& o) {
    if (this != &o) {
      std::lock_guard lock(cache_mu_);
      comps_ = o.comps_;
      cache_.clear();
    }
    return *this;
  }

  int dim() const noexcept { return static_cast<int>(comps_.size()); }
  const Polynomial& operator[](int i) const { return comps_[i]; }

  // f^i_{j_1 ... j_k}
  Polynomial partial(int i, std::vector<int> idx) const;

  template <class S>
  std::vector<S> operator()(const std::vector<S>& y) const {
    if (static_cast<int>(y.size()) != dim()) throw DomainError("vector field evaluated at wrong dimension");
    std::vector<S> r;
    r.reserve(comps_.size());
    for (const auto& p : comps_) r.push_back(p.eval(y));
    return r;
  }

 private:
  std::vector<Polynomial> comps_;
  mutable std::mutex cache_mu_;
  mutable std::map<std::pair<int, std::vector<int>>, Polynomial> cache_;
};

}  // namespace bseries
