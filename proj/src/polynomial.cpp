#include "bseries/polynomial.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace bseries {

TruncSeries TruncSeries::h(int degree) {
  if (degree < 1) throw DomainError("truncation degree of h must be at least 1");
  TruncSeries s;
  s.c_.assign(static_cast<std::size_t>(degree) + 1, Rational(0));
  s.c_[1] = 1;
  return s;
}

TruncSeries& TruncSeries::operator+=(const TruncSeries& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Rational(0));
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

TruncSeries& TruncSeries::operator-=(const TruncSeries& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Rational(0));
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

TruncSeries operator*(const TruncSeries& a, const TruncSeries& b) {
  const int d = std::max(a.degree(), b.degree());
  TruncSeries r;
  r.c_.assign(static_cast<std::size_t>(d) + 1, Rational(0));
  for (int i = 0; i <= a.degree(); ++i) {
    if (sgn(a.c_[i]) == 0) continue;
    for (int j = 0; j <= b.degree() && i + j <= d; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
  }
  return r;
}

bool operator==(const TruncSeries& a, const TruncSeries& b) {
  const int d = std::max(a.degree(), b.degree());
  for (int k = 0; k <= d; ++k)
    if (a.coeff(k) != b.coeff(k)) return false;
  return true;
}

Polynomial Polynomial::constant(int nvars, const Rational& c) {
  Polynomial p(nvars);
  p.add_term(Monomial(static_cast<std::size_t>(nvars), 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int i) {
  if (i < 0 || i >= nvars) throw DomainError("variable index out of range");
  Polynomial p(nvars);
  Monomial m(static_cast<std::size_t>(nvars), 0);
  m[i] = 1;
  p.add_term(m, 1);
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [m, c] : terms_) d = std::max(d, std::accumulate(m.begin(), m.end(), 0));
  return d;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
  if (static_cast<int>(m.size()) != nvars_) throw DomainError("monomial has wrong number of variables");
  if (sgn(c) == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (sgn(it->second) == 0) terms_.erase(it);
  }
}

Polynomial Polynomial::derivative(int var) const {
  if (var < 0 || var >= nvars_) throw DomainError("variable index out of range");
  Polynomial r(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[var] == 0) continue;
    Monomial d = m;
    --d[var];
    r.add_term(d, c * m[var]);
  }
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.nvars_ != nvars_) throw DomainError("polynomials over different variables");
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.nvars_ != nvars_) throw DomainError("polynomials over different variables");
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& s) {
  if (sgn(s) == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.nvars_ != b.nvars_) throw DomainError("polynomials over different variables");
  Polynomial r(a.nvars_);
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) {
      Polynomial::Monomial m(ma.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      r.add_term(m, ca * cb);
    }
  return r;
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << to_string(c);
    for (int i = 0; i < nvars_; ++i) {
      if (m[i] == 0) continue;
      os << "*y" << (i + 1);
      if (m[i] > 1) os << "^" << m[i];
    }
  }
  return os.str();
}

PolyVectorField::PolyVectorField(std::vector<Polynomial> components) : comps_(std::move(components)) {
  for (const auto& p : comps_)
    if (p.nvars() != dim()) throw DomainError("vector field components must have one variable per dimension");
}

Polynomial PolyVectorField::partial(int i, std::vector<int> idx) const {
  if (i < 0 || i >= dim()) throw DomainError("component index out of range");
  for (int j : idx)
    if (j < 0 || j >= dim()) throw DomainError("derivative index out of range");
  std::sort(idx.begin(), idx.end());
  std::lock_guard lock(cache_mu_);
  auto key = std::make_pair(i, idx);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  Polynomial p = comps_[i];
  for (int j : idx) p = p.derivative(j);
  cache_.emplace(std::move(key), p);
  return p;
}

}  // namespace bseries
