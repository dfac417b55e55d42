#pragma once

#include <initializer_list>
#include <map>
#include <string>
#include <utility>

#include "bseries/rational.hpp"

namespace bseries {

// Finite formal sum over a basis with exact rational coefficients. Zero terms are never stored.
template <class Key>
class LinComb {
 public:
  using key_type = Key;
  using map_type = std::map<Key, Rational>;
  using const_iterator = typename map_type::const_iterator;

  LinComb() = default;
  explicit LinComb(const Key& k, const Rational& c = 1) { add(k, c); }
  LinComb(std::initializer_list<std::pair<Key, Rational>> terms) {
    for (const auto& [k, c] : terms) add(k, c);
  }

  void add(const Key& k, const Rational& c) {
    if (sgn(c) == 0) return;
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) {
      it->second += c;
      if (sgn(it->second) == 0) terms_.erase(it);
    }
  }
  void add(const LinComb& other, const Rational& scale = 1) {
    if (sgn(scale) == 0) return;
    for (const auto& [k, c] : other.terms_) add(k, c * scale);
  }

  Rational coeff(const Key& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  bool empty() const noexcept { return terms_.empty(); }
  std::size_t size() const noexcept { return terms_.size(); }
  const_iterator begin() const noexcept { return terms_.begin(); }
  const_iterator end() const noexcept { return terms_.end(); }
  const map_type& terms() const noexcept { return terms_; }

  LinComb& operator+=(const LinComb& o) {
    add(o);
    return *this;
  }
  LinComb& operator-=(const LinComb& o) {
    add(o, Rational(-1));
    return *this;
  }
  LinComb& operator*=(const Rational& s) {
    if (sgn(s) == 0) {
      terms_.clear();
    } else {
      for (auto& [k, c] : terms_) c *= s;
    }
    return *this;
  }

  friend LinComb operator+(LinComb a, const LinComb& b) { return a += b; }
  friend LinComb operator-(LinComb a, const LinComb& b) { return a -= b; }
  friend LinComb operator-(LinComb a) { return a *= Rational(-1); }
  friend LinComb operator*(LinComb a, const Rational& s) { return a *= s; }
  friend LinComb operator*(const Rational& s, LinComb a) { return a *= s; }
  friend bool operator==(const LinComb& a, const LinComb& b) { return a.terms_ == b.terms_; }

 private:
  map_type terms_;
};

template <class A, class B = A>
using Tensor = std::pair<A, B>;

// Linear extension of f: Key -> LinComb<Out>.
template <class Out, class Key, class F>
LinComb<Out> linear_map(const LinComb<Key>& x, F&& f) {
  LinComb<Out> r;
  for (const auto& [k, c] : x) r.add(f(k), c);
  return r;
}

// Bilinear extension of f: (K1, K2) -> LinComb<Out>.
template <class Out, class K1, class K2, class F>
LinComb<Out> bilinear_map(const LinComb<K1>& x, const LinComb<K2>& y, F&& f) {
  LinComb<Out> r;
  for (const auto& [k1, c1] : x)
    for (const auto& [k2, c2] : y) r.add(f(k1, k2), c1 * c2);
  return r;
}

// Componentwise product of tensors: (a1 (x) b1)(a2 (x) b2) = a1 m1 a2 (x) b1 m2 b2, with the factor
// products given as LinComb-valued functions.
template <class A, class B, class MulA, class MulB>
LinComb<Tensor<A, B>> tensor_product(const LinComb<Tensor<A, B>>& x, const LinComb<Tensor<A, B>>& y,
                                     MulA&& mul_a, MulB&& mul_b) {
  LinComb<Tensor<A, B>> r;
  for (const auto& [t1, c1] : x)
    for (const auto& [t2, c2] : y) {
      LinComb<A> left = mul_a(t1.first, t2.first);
      LinComb<B> right = mul_b(t1.second, t2.second);
      for (const auto& [l, cl] : left)
        for (const auto& [rr, cr] : right) r.add({l, rr}, c1 * c2 * cl * cr);
    }
  return r;
}

template <class A, class B>
std::string to_string(const std::pair<A, B>& t) {
  return to_string(t.first) + " (x) " + to_string(t.second);
}

// "c * x + d * y"; coefficient 1 is omitted, -1 prints as "-1 * x"; the empty sum is "0".
template <class Key>
std::string to_string(const LinComb<Key>& x) {
  if (x.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [k, c] : x) {
    if (!first) out += " + ";
    first = false;
    if (c != 1) out += to_string(c) + " * ";
    out += to_string(k);
  }
  return out;
}

}  // namespace bseries
