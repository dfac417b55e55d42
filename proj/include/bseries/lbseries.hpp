#pragma once

#include <compare>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bseries/errors.hpp"
#include "bseries/forest.hpp"

namespace bseries {

// Coefficient map on planar forests, truncated at a given order. Values are stored for every
// forest; the kind fixes the value on the unit (1 for characters, 0 for infinitesimal characters)
// and documents the intended shuffle property, which is not enforced.
class LBCoeff {
 public:
  enum class Kind { character, infinitesimal, plain };

  LBCoeff(Kind kind, int order);

  Kind kind() const noexcept { return kind_; }
  int order() const noexcept { return order_; }

  void set(const PlanarForest& w, const Rational& v);
  void add(const PlanarForest& w, const Rational& v);
  // Throws DomainError beyond the truncation order.
  Rational operator()(const PlanarForest& w) const;
  // Linear extension.
  Rational operator()(const LinComb<PlanarForest>& x) const;

  const std::map<PlanarForest, Rational>& stored() const noexcept { return values_; }
  friend bool operator==(const LBCoeff& a, const LBCoeff& b);

 private:
  Kind kind_;
  int order_;
  std::map<PlanarForest, Rational> values_;
};

std::string to_string(LBCoeff::Kind k);

LBCoeff eta_mkw(int N);
// Infinitesimal character with value 1 on the single vertex.
LBCoeff delta_bullet_lb(int N);

// Deconcatenation: all splits of a word of trees.
LinComb<Tensor<PlanarForest>> deconcat(const PlanarForest& w);

// Planar-forest coproduct from the recursion on the rightmost tree.
LinComb<Tensor<PlanarForest>> delta_mkw(const PlanarForest& w);
// Same coproduct from left admissible cuts, full and empty cut included.
LinComb<Tensor<PlanarForest>> delta_mkw_cuts(const PlanarForest& w);
// Left admissible cuts of w that keep every root of w: (pruned part, remaining forest).
LinComb<Tensor<PlanarForest>> rooted_cuts(const PlanarForest& w);
LinComb<PlanarForest> antipode_mkw(const PlanarForest& w);

// (a * b)(w) = sum a(w1) b(w2) over delta_mkw(w). Characters stay characters.
LBCoeff convolve_mkw(const LBCoeff& a, const LBCoeff& b, int N);
// a o S
LBCoeff compose_antipode_mkw(const LBCoeff& a, int N);

// Word in the letters d_1, d_2, ...; serialized as d1.d2.d1, the empty word as 1.
struct BellWord {
  std::vector<int> letters;

  int grade() const;
  std::size_t length() const noexcept { return letters.size(); }
  std::string str() const;
  friend auto operator<=>(const BellWord&, const BellWord&) = default;
  friend BellWord operator*(const BellWord& a, const BellWord& b);
};

inline std::string to_string(const BellWord& w) { return w.str(); }
BellWord parse_bell_word(std::string_view text);

// B_0 = 1, B_n = (d_1 + dd) B_{n-1} with dd the derivation d_i -> d_{i+1}.
LinComb<BellWord> bell(int n);
// Words of length k in B_n; requires 1 <= k <= n.
LinComb<BellWord> bell_partial(int n, int k);
// delta(d_n) = sum_k B_{n,k} (x) d_k, multiplicative over concatenation.
LinComb<Tensor<BellWord>> fdb_coproduct(const BellWord& w);
LinComb<Tensor<BellWord>> fdb_coproduct(const LinComb<BellWord>& x);

// Linear map on planar forests of order <= N, stored column by column.
class Endomorphism {
 public:
  Endomorphism(int N, const std::function<LinComb<PlanarForest>(const PlanarForest&)>& f);
  static Endomorphism identity(int N);

  int order() const noexcept { return order_; }
  const LinComb<PlanarForest>& operator()(const PlanarForest& w) const;
  LinComb<PlanarForest> operator()(const LinComb<PlanarForest>& x) const;

  // (a o b)(w) = a(b(w))
  friend Endomorphism compose(const Endomorphism& a, const Endomorphism& b);
  friend bool operator==(const Endomorphism& a, const Endomorphism& b) { return a.columns_ == b.columns_; }
  // One line per basis forest: "forest<TAB>image".
  std::string tsv() const;

 private:
  Endomorphism() = default;
  int order_ = 0;
  std::map<PlanarForest, LinComb<PlanarForest>> columns_;
};

// shuffle o (f (x) g) o delta_mkw
Endomorphism convolve_endo_mkw(const Endomorphism& f, const Endomorphism& g);
// shuffle o (f (x) g) o deconcat
Endomorphism convolve_endo_sh(const Endomorphism& f, const Endomorphism& g);
// log*(Id) for the planar-forest convolution.
Endomorphism eulerian_idempotent(int N);
// S * Y in the shuffle Hopf algebra, Y the order grading.
Endomorphism dynkin_operator(int N);
// Y^-1 o D, zero on the unit.
Endomorphism dynkin_idempotent(int N);
// (a o e)(w) = a(e(w))
LBCoeff compose(const LBCoeff& a, const Endomorphism& e, LBCoeff::Kind kind);

// beta = alpha o e
LBCoeff eulerian_apply(const LBCoeff& alpha, int N);
// sum_k beta^{*k} / k! for the planar-forest convolution; requires beta(1) = 0.
LBCoeff gl_exp(const LBCoeff& beta, int N);
// gamma = alpha o Y^-1 o D
LBCoeff dynkin_apply(const LBCoeff& alpha, int N);
// kappa(j_1..j_k) = j_1 ... j_k / (j_1 (j_1 + j_2) ... (j_1 + ... + j_k))
Rational kappa(const std::vector<int>& grades);
// alpha(w) = sum over splittings w = w_1 ... w_k into nonempty words of kappa(|w_1|..|w_k|) prod gamma(w_i).
LBCoeff q_apply(const LBCoeff& gamma, int N);

// Fixed point of gamma = Y^-1 B+(Q(gamma)), one grade per sweep.
LBCoeff exact_flow_lb(int N);

enum class LBMethod { exponential_euler, lie_implicit_midpoint };
// type1: pullback character; type3: Lie-type coefficients; generator: the frozen field sigma with
// y1 = exp(sigma) y.
enum class LBRepresentation { type1, type3, generator };
LBMethod parse_lb_method(std::string_view s);
LBRepresentation parse_lb_representation(std::string_view s);
LBCoeff method_series(LBMethod m, LBRepresentation rep, int N);

// Substitution character a*(w) for an infinitesimal coefficient map a, from the recursion over
// deconcatenations and root-preserving left admissible cuts. Memoized per call.
LinComb<PlanarForest> lb_substitution_character(const LBCoeff& alpha, const PlanarForest& w);
// (alpha * beta)(w) = beta(a*(w)); the result has beta's kind.
LBCoeff lb_substitute(const LBCoeff& alpha, const LBCoeff& beta, int N);

}  // namespace bseries
