#include "bseries/bck.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bseries/errors.hpp"

namespace bseries {

// ---------------------------------------------------------------------------
// BCoeff

BCoeff::BCoeff(Kind kind, int order) : kind_(kind), order_(order) {
  if (order < 0) throw DomainError("truncation order must be non-negative");
}

void BCoeff::set(const RootedTree& t, const Rational& v) { set(Forest(t), v); }

void BCoeff::set(const Forest& f, const Rational& v) {
  if (kind_ != Kind::plain && !f.is_tree())
    throw DomainError("only tree values can be set on a " + to_string(kind_) + ", got '" + f.str() + "'");
  if (f.order() > order_) throw DomainError("forest '" + f.str() + "' exceeds truncation order");
  if (sgn(v) == 0)
    values_.erase(f);
  else
    values_[f] = v;
}

Rational BCoeff::operator()(const RootedTree& t) const { return (*this)(Forest(t)); }

Rational BCoeff::operator()(const Forest& f) const {
  if (f.order() > order_)
    throw DomainError("forest '" + f.str() + "' exceeds truncation order " + std::to_string(order_));
  auto lookup = [&](const Forest& key) {
    auto it = values_.find(key);
    return it == values_.end() ? Rational(0) : it->second;
  };
  switch (kind_) {
    case Kind::character: {
      Rational r = 1;
      for (const auto& t : f.trees()) {
        r *= lookup(Forest(t));
        if (sgn(r) == 0) break;
      }
      return r;
    }
    case Kind::infinitesimal:
      return f.is_tree() ? lookup(f) : Rational(0);
    case Kind::plain:
      return lookup(f);
  }
  return 0;
}

bool operator==(const BCoeff& a, const BCoeff& b) {
  return a.kind_ == b.kind_ && a.order_ == b.order_ && a.values_ == b.values_;
}

std::string to_string(BCoeff::Kind k) {
  switch (k) {
    case BCoeff::Kind::character:
      return "character";
    case BCoeff::Kind::infinitesimal:
      return "infinitesimal character";
    case BCoeff::Kind::plain:
      return "plain map";
  }
  return "?";
}

BCoeff eta_bck(int N) { return BCoeff(BCoeff::Kind::character, N); }

BCoeff delta_bullet(int N) {
  BCoeff d(BCoeff::Kind::infinitesimal, N);
  if (N >= 1) d.set(RootedTree(), 1);
  return d;
}

BCoeff exact_gamma(int N) {
  BCoeff g(BCoeff::Kind::character, N);
  for (int n = 1; n <= N; ++n)
    for (const auto& t : enumerate_trees(n)) g.set(t, 1 / tree_factorial(t));
  return g;
}

// ---------------------------------------------------------------------------
// Labeled trees for cut enumeration

namespace {

struct Labeled {
  std::vector<int> parent;
  std::vector<std::vector<int>> kids;
  std::vector<std::string> color;
};

int add_vertices(const RootedTree& t, int parent, Labeled& L) {
  int v = static_cast<int>(L.parent.size());
  L.parent.push_back(parent);
  L.kids.emplace_back();
  L.color.push_back(t.color());
  for (const auto& c : t.children()) {
    int cv = add_vertices(c, v, L);
    L.kids[v].push_back(cv);
  }
  return v;
}

Labeled label(const RootedTree& t) {
  Labeled L;
  add_vertices(t, -1, L);
  return L;
}

// Subtree at v keeping only child edges whose child vertex has keep[child] set.
RootedTree build(const Labeled& L, int v, const std::vector<char>& keep) {
  std::vector<RootedTree> ch;
  for (int c : L.kids[v])
    if (keep[c]) ch.push_back(build(L, c, keep));
  return RootedTree(std::move(ch), L.color[v]);
}

LinComb<Tensor<Forest>> tensor_mul(const LinComb<Tensor<Forest>>& x, const LinComb<Tensor<Forest>>& y) {
  auto mul = [](const Forest& a, const Forest& b) { return LinComb<Forest>(a * b); };
  return tensor_product(x, y, mul, mul);
}

template <class TreeCoproduct>
LinComb<Tensor<Forest>> multiplicative(const Forest& f, TreeCoproduct&& tree_delta) {
  LinComb<Tensor<Forest>> r{{{Forest(), Forest()}, 1}};
  for (const auto& t : f.trees()) r = tensor_mul(r, tree_delta(t));
  return r;
}

LinComb<Tensor<Forest>> delta_bck_tree(const RootedTree& t) {
  // Delta(B+(w)) = B+(w) (x) 1 + (I (x) B+) Delta(w)
  LinComb<Tensor<Forest>> r{{{Forest(t), Forest()}, 1}};
  for (const auto& [tp, c] : multiplicative(bminus(t), delta_bck_tree))
    r.add({tp.first, Forest(bplus(tp.second, t.color()))}, c);
  return r;
}

LinComb<Tensor<Forest>> delta_bck_cuts_tree(const RootedTree& t) {
  Labeled L = label(t);
  const int n = static_cast<int>(L.parent.size());
  LinComb<Tensor<Forest>> r{{{Forest(t), Forest()}, 1}};
  // Edges are indexed by their child vertex 1..n-1.
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<char> cut(n, 0);
    for (int v = 1; v < n; ++v) cut[v] = (mask >> (v - 1)) & 1u;
    bool admissible = true;
    for (int v = 1; v < n && admissible; ++v) {
      if (!cut[v]) continue;
      for (int u = L.parent[v]; u > 0; u = L.parent[u])
        if (cut[u]) {
          admissible = false;
          break;
        }
    }
    if (!admissible) continue;
    std::vector<char> keep(n);
    for (int v = 0; v < n; ++v) keep[v] = !cut[v];
    std::vector<char> all(n, 1);
    std::vector<RootedTree> pruned;
    for (int v = 1; v < n; ++v)
      if (cut[v]) pruned.push_back(build(L, v, all));
    r.add({Forest(std::move(pruned)), Forest(build(L, 0, keep))}, 1);
  }
  return r;
}

LinComb<Tensor<Forest>> delta_cefm_tree(const RootedTree& t) {
  Labeled L = label(t);
  const int n = static_cast<int>(L.parent.size());
  LinComb<Tensor<Forest>> r;
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<char> keep(n, 0);
    for (int v = 1; v < n; ++v) keep[v] = (mask >> (v - 1)) & 1u;
    // Component roots: the root and every vertex whose parent edge is removed.
    std::vector<int> comp(n, -1);
    std::vector<int> roots;
    for (int v = 0; v < n; ++v) {
      if (v == 0 || !keep[v]) {
        comp[v] = static_cast<int>(roots.size());
        roots.push_back(v);
      } else {
        comp[v] = comp[L.parent[v]];  // parents precede children in the labeling
      }
    }
    std::vector<RootedTree> parts;
    for (int v : roots) parts.push_back(build(L, v, keep));
    // Contracted tree: vertex per component, edge from the component of parent(root).
    Labeled Q;
    Q.parent.assign(roots.size(), -1);
    Q.kids.assign(roots.size(), {});
    for (int v : roots) Q.color.push_back(L.color[v]);
    for (std::size_t k = 1; k < roots.size(); ++k) {
      int pc = comp[L.parent[roots[k]]];
      Q.parent[k] = pc;
      Q.kids[pc].push_back(static_cast<int>(k));
    }
    std::vector<char> all(roots.size(), 1);
    r.add({Forest(std::move(parts)), Forest(build(Q, 0, all))}, 1);
  }
  return r;
}

}  // namespace

LinComb<Tensor<Forest>> delta_bck(const Forest& f) { return multiplicative(f, delta_bck_tree); }

LinComb<Tensor<Forest>> delta_bck_cuts(const Forest& f) { return multiplicative(f, delta_bck_cuts_tree); }

LinComb<Tensor<Forest>> delta_cefm(const Forest& f) { return multiplicative(f, delta_cefm_tree); }

LinComb<Forest> antipode_bck(const Forest& f) {
  static thread_local std::map<RootedTree, LinComb<Forest>> cache;
  std::function<LinComb<Forest>(const RootedTree&)> tree_s = [&](const RootedTree& t) -> LinComb<Forest> {
    if (auto it = cache.find(t); it != cache.end()) return it->second;
    LinComb<Forest> s(Forest(t), -1);
    for (const auto& [tp, c] : delta_bck_cuts_tree(t)) {
      if (tp.first.empty() || tp.second.empty()) continue;
      LinComb<Forest> sp{{Forest(), 1}};
      for (const auto& u : tp.first.trees()) sp = forest_product(sp, tree_s(u));
      s.add(forest_product(sp, LinComb<Forest>(tp.second)), -c);
    }
    cache.emplace(t, s);
    return s;
  };
  LinComb<Forest> r{{Forest(), 1}};
  for (const auto& t : f.trees()) r = forest_product(r, tree_s(t));
  return r;
}

namespace {

void check_truncation(const BCoeff& a, int N) {
  if (a.order() < N)
    throw DomainError("coefficient map truncated at order " + std::to_string(a.order()) +
                      " cannot be used at order " + std::to_string(N));
}

}  // namespace

BCoeff convolve_bck(const BCoeff& a, const BCoeff& b, int N) {
  check_truncation(a, N);
  check_truncation(b, N);
  auto value = [&](const Forest& f) {
    Rational s = 0;
    for (const auto& [tp, c] : delta_bck_cuts(f)) {
      Rational l = a(tp.first);
      if (sgn(l) == 0) continue;
      s += c * l * b(tp.second);
    }
    return s;
  };
  const bool chars = a.kind() == BCoeff::Kind::character && b.kind() == BCoeff::Kind::character;
  BCoeff r(chars ? BCoeff::Kind::character : BCoeff::Kind::plain, N);
  for (int n = chars ? 1 : 0; n <= N; ++n) {
    if (chars) {
      for (const auto& t : enumerate_trees(n)) r.set(t, value(Forest(t)));
    } else {
      for (const auto& f : enumerate_forests(n)) r.set(f, value(f));
    }
  }
  return r;
}

BCoeff compose_antipode_bck(const BCoeff& a, int N) {
  check_truncation(a, N);
  if (a.kind() != BCoeff::Kind::character) throw DomainError("compose_antipode_bck expects a character");
  BCoeff r(BCoeff::Kind::character, N);
  for (int n = 1; n <= N; ++n)
    for (const auto& t : enumerate_trees(n)) {
      Rational s = 0;
      for (const auto& [f, c] : antipode_bck(Forest(t))) s += c * a(f);
      r.set(t, s);
    }
  return r;
}

BCoeff substitute_b(const BCoeff& a, const BCoeff& b, int N) {
  check_truncation(a, N);
  check_truncation(b, N);
  if (a.kind() == BCoeff::Kind::character || sgn(a(Forest())) != 0)
    throw DomainError("substitution requires a(1) = 0");
  // a is multiplicative on the components of the spanning subforest.
  auto a_forest = [&](const Forest& w) {
    Rational r = 1;
    for (const auto& t : w.trees()) {
      r *= a(t);
      if (sgn(r) == 0) break;
    }
    return r;
  };
  auto value = [&](const Forest& f) {
    Rational s = 0;
    for (const auto& [tp, c] : delta_cefm(f)) {
      Rational l = a_forest(tp.first);
      if (sgn(l) == 0) continue;
      s += c * l * b(tp.second);
    }
    return s;
  };
  BCoeff r(b.kind(), N);
  if (b.kind() == BCoeff::Kind::plain) {
    r.set(Forest(), b(Forest()));
    for (int n = 1; n <= N; ++n)
      for (const auto& f : enumerate_forests(n)) r.set(f, value(f));
  } else {
    for (int n = 1; n <= N; ++n)
      for (const auto& t : enumerate_trees(n)) r.set(t, value(Forest(t)));
  }
  return r;
}

ModifiedMode parse_modified_mode(std::string_view s) {
  if (s == "backward_error") return ModifiedMode::backward_error;
  if (s == "modifying_integrator") return ModifiedMode::modifying_integrator;
  throw DomainError("unknown mode '" + std::string(s) + "'");
}

BCoeff solve_modified(const BCoeff& a, ModifiedMode mode, int N) {
  check_truncation(a, N);
  const Rational a1 = a(RootedTree());
  if (a1 != 1)
    throw DomainError("no modified field exists: the method is inconsistent (a(*) = " + to_string(a1) + ")");
  const BCoeff gamma = exact_gamma(N);
  // Equation: sum_{w in t} beta(w) rhs(t/w) = target(t), leading term beta(t) * rhs(*).
  const BCoeff& target = mode == ModifiedMode::backward_error ? a : gamma;
  const BCoeff& rhs = mode == ModifiedMode::backward_error ? gamma : a;
  const Rational lead = rhs(RootedTree());
  BCoeff beta(BCoeff::Kind::infinitesimal, N);
  for (int n = 1; n <= N; ++n)
    for (const auto& t : enumerate_trees(n)) {
      Rational s = target(t);
      const Forest whole(t);
      for (const auto& [tp, c] : delta_cefm(whole)) {
        if (tp.first == whole) continue;
        Rational l = c;
        for (const auto& u : tp.first.trees()) {
          l *= beta(u);
          if (sgn(l) == 0) break;
        }
        if (sgn(l) != 0) s -= l * rhs(tp.second);
      }
      beta.set(t, s / lead);
    }
  return beta;
}

// ---------------------------------------------------------------------------
// Runge-Kutta tableaus

RKTableau::RKTableau(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::string name)
    : a_(std::move(a)), b_(std::move(b)), name_(std::move(name)) {
  const std::size_t s = b_.size();
  if (s == 0) throw DomainError("tableau must have at least one stage");
  if (a_.size() != s) throw DomainError("tableau matrix must have one row per stage");
  for (const auto& row : a_) {
    if (row.size() != s) throw DomainError("tableau matrix must be square");
    Rational c = 0;
    for (const auto& x : row) c += x;
    c_.push_back(c);
  }
}

bool RKTableau::is_explicit() const noexcept {
  for (int i = 0; i < stages(); ++i)
    for (int j = i; j < stages(); ++j)
      if (sgn(a_[i][j]) != 0) return false;
  return true;
}

RKTableau RKTableau::euler() { return RKTableau({{0}}, {1}, "euler"); }

RKTableau RKTableau::explicit_midpoint() {
  return RKTableau({{0, 0}, {make_rational(1, 2), 0}}, {0, 1}, "explicit_midpoint");
}

RKTableau RKTableau::implicit_midpoint() { return RKTableau({{make_rational(1, 2)}}, {1}, "implicit_midpoint"); }

RKTableau RKTableau::rk4() {
  const Rational h = make_rational(1, 2);
  return RKTableau({{0, 0, 0, 0}, {h, 0, 0, 0}, {0, h, 0, 0}, {0, 0, 1, 0}},
                   {make_rational(1, 6), make_rational(1, 3), make_rational(1, 3), make_rational(1, 6)}, "rk4");
}

RKTableau RKTableau::builtin(std::string_view name) {
  if (name == "euler") return euler();
  if (name == "explicit_midpoint") return explicit_midpoint();
  if (name == "implicit_midpoint") return implicit_midpoint();
  if (name == "rk4") return rk4();
  throw DomainError("unknown tableau '" + std::string(name) + "'");
}

RKTableau parse_tableau(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  if (tokens.empty()) throw ParseError("empty tableau", 0);
  long s = 0;
  try {
    s = std::stol(tokens[0]);
  } catch (const std::exception&) {
    throw ParseError("stage count expected", 0);
  }
  if (s < 1) throw ParseError("stage count must be positive", 0);
  const std::size_t need = 1 + static_cast<std::size_t>(s * s + s);
  if (tokens.size() != need)
    throw ParseError("expected " + std::to_string(need - 1) + " tableau entries, got " +
                         std::to_string(tokens.size() - 1),
                     tokens.size());
  std::size_t k = 1;
  std::vector<std::vector<Rational>> a(s, std::vector<Rational>(s));
  for (auto& row : a)
    for (auto& x : row) x = parse_rational(tokens[k++]);
  std::vector<Rational> b(s);
  for (auto& x : b) x = parse_rational(tokens[k++]);
  return RKTableau(std::move(a), std::move(b), "custom");
}

RKTableau load_tableau(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read tableau file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tableau(ss.str());
}

namespace {

// g_i(t) = sum_j a_ij prod_k g_j(t_k), with t = B+(t_1 ... t_m).
std::vector<Rational> stage_weights(const RKTableau& tab, const RootedTree& t,
                                    std::map<RootedTree, std::vector<Rational>>& memo) {
  if (auto it = memo.find(t); it != memo.end()) return it->second;
  const int s = tab.stages();
  std::vector<Rational> prod(s, Rational(1));
  for (const auto& c : t.children()) {
    auto g = stage_weights(tab, c, memo);
    for (int j = 0; j < s; ++j) prod[j] *= g[j];
  }
  std::vector<Rational> g(s, Rational(0));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) g[i] += tab.a(i, j) * prod[j];
  memo.emplace(t, g);
  return g;
}

}  // namespace

Rational elementary_weight(const RKTableau& tab, const RootedTree& tree) {
  std::map<RootedTree, std::vector<Rational>> memo;
  Rational r = 0;
  for (int j = 0; j < tab.stages(); ++j) {
    Rational p = tab.b(j);
    for (const auto& c : tree.children()) p *= stage_weights(tab, c, memo)[j];
    r += p;
  }
  return r;
}

BCoeff elementary_weights(const RKTableau& t, int N) {
  BCoeff r(BCoeff::Kind::character, N);
  for (int n = 1; n <= N; ++n)
    for (const auto& tree : enumerate_trees(n)) r.set(tree, elementary_weight(t, tree));
  return r;
}

OrderReport order_report(const BCoeff& a, int N) {
  check_truncation(a, N);
  for (int n = 1; n <= N; ++n)
    for (const auto& t : enumerate_trees(n))
      if (a(t) != 1 / tree_factorial(t)) return {n - 1, t};
  return {N, std::nullopt};
}

int order_of(const BCoeff& a, int N) { return order_report(a, N).order; }

GeometricKind parse_geometric_kind(std::string_view s) {
  if (s == "hamiltonian_field" || s == "hamiltonian") return GeometricKind::hamiltonian_field;
  if (s == "symplectic_method" || s == "symplectic") return GeometricKind::symplectic_method;
  throw DomainError("unknown geometric kind '" + std::string(s) + "'");
}

std::vector<GeometricViolation> check_geometric(const BCoeff& a, GeometricKind kind, int N) {
  check_truncation(a, N);
  if (kind == GeometricKind::hamiltonian_field && sgn(a(Forest())) != 0)
    throw DomainError("the Hamiltonian condition requires a(1) = 0");
  std::vector<RootedTree> trees;
  for (int n = 1; n < N; ++n)
    for (const auto& t : enumerate_trees(n)) trees.push_back(t);
  std::vector<GeometricViolation> out;
  for (std::size_t i = 0; i < trees.size(); ++i)
    for (std::size_t j = i; j < trees.size(); ++j) {
      const RootedTree &t1 = trees[i], &t2 = trees[j];
      if (t1.order() + t2.order() > N) continue;
      Rational lhs = a(butcher_product(t1, Forest(t2))) + a(butcher_product(t2, Forest(t1)));
      Rational rhs = kind == GeometricKind::symplectic_method ? Rational(a(t1) * a(t2)) : Rational(0);
      if (lhs != rhs) out.push_back({t1, t2, lhs, rhs});
    }
  return out;
}

}  // namespace bseries
