#include "bseries/lbseries.hpp"

#include <mutex>
#include <sstream>
#include <unordered_map>

namespace bseries {

namespace {

using PF = PlanarForest;
using TensorSum = LinComb<Tensor<PF>>;

PF slice(const PF& w, std::size_t from, std::size_t to) {
  return PF(std::vector<PlanarTree>(w.trees().begin() + static_cast<std::ptrdiff_t>(from),
                                    w.trees().begin() + static_cast<std::ptrdiff_t>(to)));
}

std::vector<PF> planar_forests_up_to(int N) {
  std::vector<PF> out;
  for (int k = 0; k <= N; ++k)
    for (const auto& w : enumerate_planar_forests(k)) out.push_back(w);
  return out;
}

void check_truncation(const LBCoeff& a, int N) {
  if (a.order() < N)
    throw DomainError("coefficient map truncated at order " + std::to_string(a.order()) +
                      " cannot be used at order " + std::to_string(N));
}

// Left admissible cuts below a list of sibling trees: the leftmost k siblings are pruned
// (k = 0..kmax) and each remaining sibling is cut recursively. Returns (pruned part, kept trees).
using CutList = std::vector<std::pair<LinComb<PF>, std::vector<PlanarTree>>>;

const CutList& tree_cuts(const PlanarTree& t);

CutList sibling_cuts(const std::vector<PlanarTree>& trees, std::size_t kmax) {
  CutList out;
  for (std::size_t k = 0; k <= kmax; ++k) {
    CutList partial = {{LinComb<PF>(PF(std::vector<PlanarTree>(trees.begin(), trees.begin() + k))), {}}};
    for (std::size_t i = k; i < trees.size(); ++i) {
      CutList next;
      for (const auto& [p, kept] : partial)
        for (const auto& [q, r] : tree_cuts(trees[i])) {
          auto k2 = kept;
          k2.push_back(r.front());
          next.emplace_back(shuffle(p, q), std::move(k2));
        }
      partial = std::move(next);
    }
    for (auto& c : partial) out.push_back(std::move(c));
  }
  return out;
}

// Cuts of a tree that keep its root; the kept part is stored as a one-element vector.
const CutList& tree_cuts(const PlanarTree& t) {
  thread_local std::unordered_map<std::string, CutList> cache;
  if (auto it = cache.find(t.str()); it != cache.end()) return it->second;
  CutList out;
  for (auto& [p, kept] : sibling_cuts(t.children(), t.children().size()))
    out.emplace_back(std::move(p), std::vector<PlanarTree>{bplus(PF(std::move(kept)), t.color())});
  return cache.emplace(t.str(), std::move(out)).first->second;
}

TensorSum forest_cuts(const PF& w, bool root_cuts) {
  TensorSum r;
  for (const auto& [p, kept] : sibling_cuts(w.trees(), root_cuts ? w.size() : 0)) {
    const PF rest(kept);
    for (const auto& [x, c] : p) r.add({x, rest}, c);
  }
  return r;
}

LinComb<PF> truncate(const LinComb<PF>& x, int N) {
  LinComb<PF> r;
  for (const auto& [w, c] : x)
    if (w.order() <= N) r.add(w, c);
  return r;
}

LBCoeff from_series(const LinComb<PF>& x, LBCoeff::Kind kind, int N) {
  LBCoeff r(kind, N);
  for (const auto& [w, c] : x)
    if (!w.empty() && w.order() <= N) r.set(w, c);
  return r;
}

// Sum_k x^k / (2^k k!) style concatenation series: sum_{k=0}^{kmax} scale_k x^k, truncated at N.
LinComb<PF> concat_series(const LinComb<PF>& x, int N, const std::function<Rational(int)>& scale) {
  LinComb<PF> power(PF(), 1), out;
  for (int k = 0; k <= N; ++k) {
    out.add(power, scale(k));
    power = truncate(concat(power, x), N);
    if (power.empty()) break;
  }
  return out;
}

template <class Key, class Build>
const Endomorphism& cached_endo(int N, Build&& build) {
  static std::mutex mu;
  static std::map<int, Endomorphism> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(N); it != cache.end()) return it->second;
  return cache.emplace(N, build()).first->second;
}

struct EulerTag {};
struct DynkinTag {};

}  // namespace

LBCoeff::LBCoeff(Kind kind, int order) : kind_(kind), order_(order) {
  if (order < 0) throw DomainError("truncation order must be nonnegative");
}

void LBCoeff::set(const PlanarForest& w, const Rational& v) {
  if (w.order() > order_) throw DomainError("forest " + w.str() + " beyond truncation order");
  if (w.empty() && kind_ != Kind::plain) {
    const Rational expected = kind_ == Kind::character ? 1 : 0;
    if (v != expected) throw DomainError("value on the unit is fixed by the kind");
    return;
  }
  if (sgn(v) == 0)
    values_.erase(w);
  else
    values_[w] = v;
}

void LBCoeff::add(const PlanarForest& w, const Rational& v) { set(w, (*this)(w) + v); }

Rational LBCoeff::operator()(const PlanarForest& w) const {
  if (w.order() > order_) throw DomainError("forest " + w.str() + " beyond truncation order");
  if (w.empty() && kind_ == Kind::character) return 1;
  if (w.empty() && kind_ == Kind::infinitesimal) return 0;
  auto it = values_.find(w);
  return it == values_.end() ? Rational(0) : it->second;
}

Rational LBCoeff::operator()(const LinComb<PlanarForest>& x) const {
  Rational s = 0;
  for (const auto& [w, c] : x) s += c * (*this)(w);
  return s;
}

bool operator==(const LBCoeff& a, const LBCoeff& b) {
  return a.kind_ == b.kind_ && a.order_ == b.order_ && a.values_ == b.values_;
}

std::string to_string(LBCoeff::Kind k) {
  switch (k) {
    case LBCoeff::Kind::character: return "character";
    case LBCoeff::Kind::infinitesimal: return "infinitesimal";
    case LBCoeff::Kind::plain: return "plain";
  }
  return "";
}

LBCoeff eta_mkw(int N) { return LBCoeff(LBCoeff::Kind::character, N); }

LBCoeff delta_bullet_lb(int N) {
  LBCoeff r(LBCoeff::Kind::infinitesimal, N);
  if (N >= 1) r.set(PF(PlanarTree()), 1);
  return r;
}

TensorSum deconcat(const PlanarForest& w) {
  TensorSum r;
  for (std::size_t i = 0; i <= w.size(); ++i) r.add({slice(w, 0, i), slice(w, i, w.size())}, 1);
  return r;
}

TensorSum delta_mkw(const PlanarForest& w) {
  thread_local std::unordered_map<std::string, TensorSum> cache;
  if (auto it = cache.find(w.str()); it != cache.end()) return it->second;
  TensorSum r;
  if (w.empty()) {
    r.add({PF(), PF()}, 1);
  } else {
    // D(w t) = w t (x) 1 + D(w) shuffle-concat (I (x) B+) D(B-(t))
    const PlanarTree& t = w.trees().back();
    const PF head = slice(w, 0, w.size() - 1);
    r.add({w, PF()}, 1);
    const TensorSum dh = delta_mkw(head);
    const TensorSum dt = delta_mkw(bminus(t));
    for (const auto& [ab, c1] : dh)
      for (const auto& [cd, c2] : dt) {
        const PF right = ab.second * PF(bplus(cd.second, t.color()));
        for (const auto& [s, c3] : shuffle(ab.first, cd.first)) r.add({s, right}, c1 * c2 * c3);
      }
  }
  return cache.emplace(w.str(), r).first->second;
}

TensorSum delta_mkw_cuts(const PlanarForest& w) { return forest_cuts(w, true); }

TensorSum rooted_cuts(const PlanarForest& w) { return forest_cuts(w, false); }

LinComb<PF> antipode_mkw(const PlanarForest& w) {
  thread_local std::unordered_map<std::string, LinComb<PF>> cache;
  if (auto it = cache.find(w.str()); it != cache.end()) return it->second;
  LinComb<PF> r;
  if (w.empty()) {
    r.add(PF(), 1);
  } else {
    for (const auto& [ab, c] : delta_mkw(w)) {
      if (ab.second.empty()) continue;
      r.add(shuffle(antipode_mkw(ab.first), LinComb<PF>(ab.second)), -c);
    }
  }
  return cache.emplace(w.str(), r).first->second;
}

LBCoeff convolve_mkw(const LBCoeff& a, const LBCoeff& b, int N) {
  check_truncation(a, N);
  check_truncation(b, N);
  const bool chars = a.kind() == LBCoeff::Kind::character && b.kind() == LBCoeff::Kind::character;
  LBCoeff r(chars ? LBCoeff::Kind::character : LBCoeff::Kind::plain, N);
  for (const auto& w : planar_forests_up_to(N)) {
    if (w.empty() && chars) continue;
    Rational s = 0;
    for (const auto& [xy, c] : delta_mkw(w)) {
      const Rational l = a(xy.first);
      if (sgn(l) != 0) s += c * l * b(xy.second);
    }
    r.set(w, s);
  }
  return r;
}

LBCoeff compose_antipode_mkw(const LBCoeff& a, int N) {
  check_truncation(a, N);
  const bool chr = a.kind() == LBCoeff::Kind::character;
  LBCoeff r(chr ? LBCoeff::Kind::character : LBCoeff::Kind::plain, N);
  for (const auto& w : planar_forests_up_to(N)) {
    if (w.empty() && chr) continue;
    r.set(w, a(antipode_mkw(w)));
  }
  return r;
}

int BellWord::grade() const {
  int g = 0;
  for (int d : letters) g += d;
  return g;
}

std::string BellWord::str() const {
  if (letters.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (i) s += '.';
    s += 'd' + std::to_string(letters[i]);
  }
  return s;
}

BellWord operator*(const BellWord& a, const BellWord& b) {
  BellWord r = a;
  r.letters.insert(r.letters.end(), b.letters.begin(), b.letters.end());
  return r;
}

BellWord parse_bell_word(std::string_view text) {
  BellWord w;
  if (text.empty() || text == "1") return w;
  std::size_t pos = 0;
  while (true) {
    if (pos >= text.size() || text[pos] != 'd') throw ParseError("expected letter d", pos);
    ++pos;
    const std::size_t start = pos;
    int v = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (pos - start >= 6) throw ParseError("letter index too large", start);
      v = v * 10 + (text[pos] - '0');
      ++pos;
    }
    if (pos == start || v < 1) throw ParseError("expected positive letter index", start);
    w.letters.push_back(v);
    if (pos == text.size()) return w;
    if (text[pos] != '.') throw ParseError("expected '.'", pos);
    ++pos;
  }
}

LinComb<BellWord> bell(int n) {
  if (n < 0) throw DomainError("Bell polynomial index must be nonnegative");
  LinComb<BellWord> b(BellWord{}, 1);
  for (int k = 1; k <= n; ++k) {
    LinComb<BellWord> next;
    for (const auto& [w, c] : b) {
      next.add(BellWord{{1}} * w, c);
      for (std::size_t i = 0; i < w.letters.size(); ++i) {
        BellWord d = w;
        ++d.letters[i];
        next.add(d, c);
      }
    }
    b = std::move(next);
  }
  return b;
}

LinComb<BellWord> bell_partial(int n, int k) {
  if (k < 1 || k > n) throw DomainError("partial Bell polynomial needs 1 <= k <= n");
  LinComb<BellWord> r;
  for (const auto& [w, c] : bell(n))
    if (static_cast<int>(w.length()) == k) r.add(w, c);
  return r;
}

LinComb<Tensor<BellWord>> fdb_coproduct(const BellWord& w) {
  LinComb<Tensor<BellWord>> r;
  r.add(Tensor<BellWord>{BellWord{}, BellWord{}}, 1);
  for (int n : w.letters) {
    LinComb<Tensor<BellWord>> dn;
    for (int k = 1; k <= n; ++k)
      for (const auto& [b, c] : bell_partial(n, k)) dn.add({b, BellWord{{k}}}, c);
    LinComb<Tensor<BellWord>> next;
    for (const auto& [x, c1] : r)
      for (const auto& [y, c2] : dn) next.add({x.first * y.first, x.second * y.second}, c1 * c2);
    r = std::move(next);
  }
  return r;
}

LinComb<Tensor<BellWord>> fdb_coproduct(const LinComb<BellWord>& x) {
  LinComb<Tensor<BellWord>> r;
  for (const auto& [w, c] : x) r.add(fdb_coproduct(w), c);
  return r;
}

Endomorphism::Endomorphism(int N, const std::function<LinComb<PlanarForest>(const PlanarForest&)>& f)
    : order_(N) {
  if (N < 0) throw DomainError("truncation order must be nonnegative");
  for (const auto& w : planar_forests_up_to(N)) columns_.emplace(w, f(w));
}

Endomorphism Endomorphism::identity(int N) {
  return Endomorphism(N, [](const PlanarForest& w) { return LinComb<PlanarForest>(w); });
}

const LinComb<PlanarForest>& Endomorphism::operator()(const PlanarForest& w) const {
  auto it = columns_.find(w);
  if (it == columns_.end()) throw DomainError("forest " + w.str() + " outside the endomorphism's domain");
  return it->second;
}

LinComb<PlanarForest> Endomorphism::operator()(const LinComb<PlanarForest>& x) const {
  LinComb<PlanarForest> r;
  for (const auto& [w, c] : x) r.add((*this)(w), c);
  return r;
}

Endomorphism compose(const Endomorphism& a, const Endomorphism& b) {
  Endomorphism r;
  r.order_ = std::min(a.order_, b.order_);
  for (const auto& [w, img] : b.columns_)
    if (w.order() <= r.order_) r.columns_.emplace(w, a(img));
  return r;
}

std::string Endomorphism::tsv() const {
  std::ostringstream os;
  for (const auto& [w, img] : columns_) os << w.str() << '\t' << to_string(img) << '\n';
  return os.str();
}

Endomorphism convolve_endo_mkw(const Endomorphism& f, const Endomorphism& g) {
  const int N = std::min(f.order(), g.order());
  return Endomorphism(N, [&](const PlanarForest& w) {
    LinComb<PF> r;
    for (const auto& [xy, c] : delta_mkw(w)) r.add(shuffle(f(xy.first), g(xy.second)), c);
    return r;
  });
}

Endomorphism convolve_endo_sh(const Endomorphism& f, const Endomorphism& g) {
  const int N = std::min(f.order(), g.order());
  return Endomorphism(N, [&](const PlanarForest& w) {
    LinComb<PF> r;
    for (const auto& [xy, c] : deconcat(w)) r.add(shuffle(f(xy.first), g(xy.second)), c);
    return r;
  });
}

Endomorphism eulerian_idempotent(int N) {
  return cached_endo<EulerTag>(N, [N] {
    // e = sum_k (-1)^{k+1}/k J^{*k}, J = Id - unit o counit; J^{*k} vanishes below grade k.
    const Endomorphism J(N, [](const PlanarForest& w) {
      return w.empty() ? LinComb<PF>() : LinComb<PF>(w);
    });
    std::map<PF, LinComb<PF>> sum;
    Endomorphism power = J;
    for (int k = 1; k <= N; ++k) {
      if (k > 1) power = convolve_endo_mkw(power, J);
      const Rational s = make_rational(k % 2 ? 1 : -1, k);
      for (const auto& w : planar_forests_up_to(N)) sum[w].add(power(w), s);
    }
    return Endomorphism(N, [&sum](const PlanarForest& w) { return sum[w]; });
  });
}

Endomorphism dynkin_operator(int N) {
  return cached_endo<DynkinTag>(N, [N] {
    const Endomorphism S(N, [](const PlanarForest& w) {
      std::vector<PlanarTree> rev(w.trees().rbegin(), w.trees().rend());
      return LinComb<PF>(PF(std::move(rev)), w.size() % 2 ? -1 : 1);
    });
    const Endomorphism Y(N, [](const PlanarForest& w) { return LinComb<PF>(w, w.order()); });
    return convolve_endo_sh(S, Y);
  });
}

Endomorphism dynkin_idempotent(int N) {
  const Endomorphism& D = dynkin_operator(N);
  return Endomorphism(N, [&D](const PlanarForest& w) {
    if (w.empty()) return LinComb<PF>();
    LinComb<PF> r = D(w);
    r *= make_rational(1, w.order());
    return r;
  });
}

LBCoeff compose(const LBCoeff& a, const Endomorphism& e, LBCoeff::Kind kind) {
  const int N = std::min(a.order(), e.order());
  LBCoeff r(kind, N);
  for (const auto& w : planar_forests_up_to(N)) {
    if (w.empty() && kind != LBCoeff::Kind::plain) continue;
    r.set(w, a(e(w)));
  }
  return r;
}

LBCoeff eulerian_apply(const LBCoeff& alpha, int N) {
  check_truncation(alpha, N);
  return compose(alpha, eulerian_idempotent(N), LBCoeff::Kind::infinitesimal);
}

LBCoeff gl_exp(const LBCoeff& beta, int N) {
  check_truncation(beta, N);
  if (sgn(beta(PF())) != 0) throw DomainError("exponential needs a map vanishing on the unit");
  LBCoeff power = eta_mkw(N);
  std::map<PF, Rational> sum;
  for (int k = 1; k <= N; ++k) {
    power = convolve_mkw(power, beta, N);
    for (const auto& [w, c] : power.stored()) sum[w] += c / factorial(k);
  }
  LBCoeff r(LBCoeff::Kind::character, N);
  for (const auto& [w, c] : sum)
    if (!w.empty()) r.set(w, c);
  return r;
}

LBCoeff dynkin_apply(const LBCoeff& alpha, int N) {
  check_truncation(alpha, N);
  return compose(alpha, dynkin_idempotent(N), LBCoeff::Kind::infinitesimal);
}

Rational kappa(const std::vector<int>& grades) {
  Rational num = 1, den = 1;
  int partial = 0;
  for (int j : grades) {
    if (j < 1) throw DomainError("kappa needs positive grades");
    partial += j;
    num *= j;
    den *= partial;
  }
  return num / den;
}

LBCoeff q_apply(const LBCoeff& gamma, int N) {
  check_truncation(gamma, N);
  LBCoeff r(LBCoeff::Kind::character, N);
  for (const auto& w : planar_forests_up_to(N)) {
    if (w.empty()) continue;
    const std::size_t n = w.size();
    Rational total = 0;
    // Each mask of the n-1 gaps between trees gives one splitting.
    for (unsigned long mask = 0; mask < (1ul << (n - 1)); ++mask) {
      Rational prod = 1;
      std::vector<int> grades;
      std::size_t start = 0;
      for (std::size_t i = 1; i <= n && sgn(prod) != 0; ++i) {
        if (i == n || (mask >> (i - 1)) & 1ul) {
          const PF piece = slice(w, start, i);
          prod *= gamma(piece);
          grades.push_back(piece.order());
          start = i;
        }
      }
      if (sgn(prod) != 0) total += kappa(grades) * prod;
    }
    r.set(w, total);
  }
  return r;
}

LBCoeff exact_flow_lb(int N) {
  if (N < 1) throw DomainError("exact flow needs N >= 1");
  LBCoeff gamma(LBCoeff::Kind::infinitesimal, N);
  for (int sweep = 0; sweep <= N; ++sweep) {
    const LBCoeff q = q_apply(gamma, N - 1);
    LBCoeff next(LBCoeff::Kind::infinitesimal, N);
    for (int n = 1; n <= N; ++n)
      for (const auto& t : enumerate_planar_trees(n)) next.set(PF(t), q(bminus(t)) / n);
    if (next == gamma) return gamma;
    gamma = std::move(next);
  }
  throw DomainError("exact flow iteration did not reach a fixed point");
}

LBMethod parse_lb_method(std::string_view s) {
  if (s == "exponential_euler" || s == "lie_euler") return LBMethod::exponential_euler;
  if (s == "lie_implicit_midpoint" || s == "lie_midpoint") return LBMethod::lie_implicit_midpoint;
  throw DomainError("unknown LB method: " + std::string(s));
}

LBRepresentation parse_lb_representation(std::string_view s) {
  if (s == "type1") return LBRepresentation::type1;
  if (s == "type3") return LBRepresentation::type3;
  if (s == "generator") return LBRepresentation::generator;
  throw DomainError("unknown representation: " + std::string(s));
}

LBCoeff method_series(LBMethod m, LBRepresentation rep, int N) {
  if (N < 1) throw DomainError("series order must be at least 1");
  const LinComb<PF> bullet(PF(PlanarTree()), 1);
  LinComb<PF> sigma;
  if (m == LBMethod::exponential_euler) {
    sigma = bullet;
  } else {
    // sigma = sum_j B+(sigma^j) / (2^j j!), sigma^j a concatenation power; one grade per sweep.
    auto scale = [](int j) -> Rational { return 1 / (factorial(j) * Rational(mpz_class(1) << j)); };
    for (int sweep = 0; sweep <= N; ++sweep) {
      const LinComb<PF> next = truncate(bplus(concat_series(sigma, N - 1, scale)), N);
      if (next == sigma) break;
      if (sweep == N) throw DomainError("midpoint iteration did not reach a fixed point");
      sigma = next;
    }
  }
  if (rep == LBRepresentation::generator) return from_series(sigma, LBCoeff::Kind::infinitesimal, N);
  // y1 = exp(sigma) y: the pullback series is the concatenation exponential of sigma.
  const LBCoeff alpha = from_series(concat_series(sigma, N, [](int j) -> Rational { return 1 / factorial(j); }),
                                    LBCoeff::Kind::character, N);
  if (rep == LBRepresentation::type1) return alpha;
  return dynkin_apply(alpha, N);
}

namespace {

class SubstitutionCharacter {
 public:
  explicit SubstitutionCharacter(const LBCoeff& alpha) : alpha_(alpha) {
    if (sgn(alpha(PF())) != 0) throw DomainError("substituted map must vanish on the unit");
  }

  const LinComb<PF>& operator()(const PF& w) {
    if (auto it = memo_.find(w); it != memo_.end()) return it->second;
    LinComb<PF> r;
    if (w.empty()) {
      r.add(PF(), 1);
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const PF left = slice(w, 0, i), right = slice(w, i, w.size());
        const LinComb<PF> a_left = (*this)(left);
        for (const auto& [pr, c] : rooted_cuts(right)) {
          const Rational ar = alpha_(pr.second);
          if (sgn(ar) == 0) continue;
          const LinComb<PF> grafted = bplus((*this)(pr.first));
          r.add(concat(a_left, grafted), c * ar);
        }
      }
    }
    return memo_.emplace(w, std::move(r)).first->second;
  }

 private:
  const LBCoeff& alpha_;
  std::map<PF, LinComb<PF>> memo_;
};

}  // namespace

LinComb<PlanarForest> lb_substitution_character(const LBCoeff& alpha, const PlanarForest& w) {
  SubstitutionCharacter a(alpha);
  return a(w);
}

LBCoeff lb_substitute(const LBCoeff& alpha, const LBCoeff& beta, int N) {
  check_truncation(alpha, N);
  check_truncation(beta, N);
  SubstitutionCharacter a(alpha);
  LBCoeff r(beta.kind(), N);
  for (const auto& w : planar_forests_up_to(N)) {
    if (w.empty() && beta.kind() != LBCoeff::Kind::plain) continue;
    r.set(w, beta(a(w)));
  }
  return r;
}

}  // namespace bseries
