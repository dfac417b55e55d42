#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bseries/forest.hpp"

namespace bseries {

// Coefficient map on non-planar forests, truncated at a given order.
// Characters and infinitesimal characters store tree values only; forest values follow
// from the kind. Plain maps store arbitrary forest values, including the unit.
class BCoeff {
 public:
  enum class Kind { character, infinitesimal, plain };

  BCoeff(Kind kind, int order);

  Kind kind() const noexcept { return kind_; }
  int order() const noexcept { return order_; }

  void set(const RootedTree& t, const Rational& v);
  // Plain maps accept any forest; other kinds only single trees.
  void set(const Forest& f, const Rational& v);

  // Throws DomainError beyond the truncation order.
  Rational operator()(const RootedTree& t) const;
  Rational operator()(const Forest& f) const;

  const std::map<Forest, Rational>& stored() const noexcept { return values_; }

  // Same values, kind and truncation.
  friend bool operator==(const BCoeff& a, const BCoeff& b);

 private:
  Kind kind_;
  int order_;
  std::map<Forest, Rational> values_;
};

std::string to_string(BCoeff::Kind k);

// The counit character: 1 on the empty forest, 0 elsewhere.
BCoeff eta_bck(int N);
// Infinitesimal character with value 1 on the single vertex.
BCoeff delta_bullet(int N);
// Exact flow: gamma(t) = 1/t!.
BCoeff exact_gamma(int N);

// Butcher-Connes-Kreimer coproduct, from the B+ recursion.
LinComb<Tensor<Forest>> delta_bck(const Forest& f);
// Same coproduct from admissible cuts (pruned part (x) root part), including empty and full cuts.
LinComb<Tensor<Forest>> delta_bck_cuts(const Forest& f);
LinComb<Forest> antipode_bck(const Forest& f);
// (a * b)(w) = sum a(w1) b(w2) over delta_bck(w). Characters stay characters.
BCoeff convolve_bck(const BCoeff& a, const BCoeff& b, int N);
// a o S as a character.
BCoeff compose_antipode_bck(const BCoeff& a, int N);

// Substitution coproduct: sum over spanning subforests w of t of w (x) t/w. Multiplicative on forests.
LinComb<Tensor<Forest>> delta_cefm(const Forest& f);
// Substitution of the vector field B(a) into B(b); requires a(1) = 0. The result has b's kind.
BCoeff substitute_b(const BCoeff& a, const BCoeff& b, int N);

enum class ModifiedMode { backward_error, modifying_integrator };
ModifiedMode parse_modified_mode(std::string_view s);
// backward_error: beta with substitute_b(beta, gamma) = a.
// modifying_integrator: beta with substitute_b(beta, a) = gamma.
BCoeff solve_modified(const BCoeff& a, ModifiedMode mode, int N);

// Runge-Kutta coefficients with c_i = sum_j a_ij.
class RKTableau {
 public:
  RKTableau(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::string name = {});

  int stages() const noexcept { return static_cast<int>(b_.size()); }
  const Rational& a(int i, int j) const { return a_[i][j]; }
  const Rational& b(int i) const { return b_[i]; }
  const Rational& c(int i) const { return c_[i]; }
  bool is_explicit() const noexcept;
  const std::string& name() const noexcept { return name_; }

  static RKTableau euler();
  static RKTableau explicit_midpoint();
  static RKTableau implicit_midpoint();
  static RKTableau rk4();
  // euler, explicit_midpoint, implicit_midpoint, rk4
  static RKTableau builtin(std::string_view name);

 private:
  std::vector<std::vector<Rational>> a_;
  std::vector<Rational> b_, c_;
  std::string name_;
};

// Text format: line 1 "s", then s rows of a, then one row of b; entries are rationals.
RKTableau parse_tableau(std::string_view text);
RKTableau load_tableau(const std::string& path);

Rational elementary_weight(const RKTableau& t, const RootedTree& tree);
BCoeff elementary_weights(const RKTableau& t, int N);

struct OrderReport {
  int order;
  std::optional<RootedTree> first_violation;
};
// Largest n <= N with a(t) = 1/t! for all |t| <= n.
OrderReport order_report(const BCoeff& a, int N);
int order_of(const BCoeff& a, int N);

enum class GeometricKind { hamiltonian_field, symplectic_method };
GeometricKind parse_geometric_kind(std::string_view s);

struct GeometricViolation {
  RootedTree t1, t2;
  Rational lhs, rhs;
};
// Checks a(t1 o t2) + a(t2 o t1) = 0 (hamiltonian_field) or = a(t1) a(t2) (symplectic_method)
// over unordered pairs with |t1| + |t2| <= N.
std::vector<GeometricViolation> check_geometric(const BCoeff& a, GeometricKind kind, int N);

}  // namespace bseries
