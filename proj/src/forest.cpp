#include "bseries/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>
#include <mutex>
#include <set>
#include <unordered_map>

#include "bseries/errors.hpp"

namespace bseries {

template <bool P>
BasicTree<P>::BasicTree() : str_("[]") {}

template <bool P>
BasicTree<P>::BasicTree(std::vector<BasicTree> children, std::string color)
    : children_(std::move(children)), color_(std::move(color)) {
  if constexpr (!P) std::sort(children_.begin(), children_.end());
  str_ = "[";
  if (!color_.empty()) str_ += color_ + ":";
  for (const auto& c : children_) {
    str_ += c.str_;
    order_ += c.order_;
  }
  str_ += "]";
}

template <bool P>
BasicForest<P>::BasicForest(std::vector<tree_type> trees) : trees_(std::move(trees)) {
  if constexpr (!P) std::sort(trees_.begin(), trees_.end());
  for (const auto& t : trees_) order_ += t.order();
}

template <bool P>
BasicForest<P>::BasicForest(tree_type tree) : BasicForest(std::vector<tree_type>{std::move(tree)}) {}

template <bool P>
std::string BasicForest<P>::str() const {
  if (trees_.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    if (i) s += ' ';
    s += trees_[i].str();
  }
  return s;
}

template class BasicTree<false>;
template class BasicTree<true>;
template class BasicForest<false>;
template class BasicForest<true>;

// ---------------------------------------------------------------------------
// Parsing

namespace {

template <bool P>
class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  BasicTree<P> tree() {
    if (pos_ >= s_.size() || s_[pos_] != '[') throw ParseError("expected '['", pos_);
    ++pos_;
    std::string color;
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (pos_ > start) {
      if (pos_ >= s_.size() || s_[pos_] != ':') throw ParseError("expected ':' after color", pos_);
      color = std::string(s_.substr(start, pos_ - start));
      ++pos_;
    }
    std::vector<BasicTree<P>> children;
    skip_ws();
    while (pos_ < s_.size() && s_[pos_] == '[') {
      children.push_back(tree());
      skip_ws();
    }
    if (pos_ >= s_.size() || s_[pos_] != ']') throw ParseError("expected ']'", pos_);
    ++pos_;
    return BasicTree<P>(std::move(children), std::move(color));
  }

  BasicForest<P> forest() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '1') {
      ++pos_;
      finish();
      return {};
    }
    std::vector<BasicTree<P>> trees;
    while (pos_ < s_.size()) {
      trees.push_back(tree());
      skip_ws();
    }
    return BasicForest<P>(std::move(trees));
  }

  BasicTree<P> single_tree() {
    skip_ws();
    BasicTree<P> t = tree();
    finish();
    return t;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void finish() {
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected trailing input", pos_);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

RootedTree parse_tree(std::string_view text) { return Parser<false>(text).single_tree(); }
PlanarTree parse_planar_tree(std::string_view text) { return Parser<true>(text).single_tree(); }
Forest parse_forest(std::string_view text) { return Parser<false>(text).forest(); }
PlanarForest parse_planar_forest(std::string_view text) { return Parser<true>(text).forest(); }

// ---------------------------------------------------------------------------
// Enumeration

namespace {

std::atomic<int> g_max_order{8};

void check_capacity(int n) {
  if (n > g_max_order.load()) {
    throw CapacityError("order " + std::to_string(n) + " exceeds maximum order " +
                        std::to_string(g_max_order.load()));
  }
}

std::recursive_mutex g_enum_mutex;
std::map<int, std::vector<RootedTree>> g_trees;
std::map<int, std::vector<PlanarTree>> g_ptrees;
std::map<int, std::vector<Forest>> g_forests;
std::map<int, std::vector<PlanarForest>> g_pforests;

const std::vector<Forest>& forests_locked(int n);

const std::vector<RootedTree>& trees_locked(int n) {
  auto it = g_trees.find(n);
  if (it != g_trees.end()) return it->second;
  std::vector<RootedTree> out;
  for (const auto& f : forests_locked(n - 1)) out.push_back(bplus(f));
  std::sort(out.begin(), out.end());
  return g_trees.emplace(n, std::move(out)).first->second;
}

// Multisets of trees with total order n: pick trees in nondecreasing position of a fixed list.
void multisets(const std::vector<const RootedTree*>& pool, std::size_t from, int remaining,
               std::vector<RootedTree>& cur, std::vector<Forest>& out) {
  if (remaining == 0) {
    out.emplace_back(cur);
    return;
  }
  for (std::size_t i = from; i < pool.size(); ++i) {
    if (pool[i]->order() > remaining) continue;
    cur.push_back(*pool[i]);
    multisets(pool, i, remaining - pool[i]->order(), cur, out);
    cur.pop_back();
  }
}

const std::vector<Forest>& forests_locked(int n) {
  auto it = g_forests.find(n);
  if (it != g_forests.end()) return it->second;
  std::vector<const RootedTree*> pool;
  for (int k = 1; k <= n; ++k)
    for (const auto& t : trees_locked(k)) pool.push_back(&t);
  std::vector<Forest> out;
  std::vector<RootedTree> cur;
  multisets(pool, 0, n, cur, out);
  std::sort(out.begin(), out.end());
  return g_forests.emplace(n, std::move(out)).first->second;
}

const std::vector<PlanarForest>& pforests_locked(int n);

const std::vector<PlanarTree>& ptrees_locked(int n) {
  auto it = g_ptrees.find(n);
  if (it != g_ptrees.end()) return it->second;
  std::vector<PlanarTree> out;
  for (const auto& f : pforests_locked(n - 1)) out.push_back(bplus(f));
  std::sort(out.begin(), out.end());
  return g_ptrees.emplace(n, std::move(out)).first->second;
}

const std::vector<PlanarForest>& pforests_locked(int n) {
  auto it = g_pforests.find(n);
  if (it != g_pforests.end()) return it->second;
  std::vector<PlanarForest> out;
  if (n == 0) {
    out.emplace_back();
  } else {
    for (int k = 1; k <= n; ++k)
      for (const auto& t : ptrees_locked(k))
        for (const auto& rest : pforests_locked(n - k)) out.push_back(PlanarForest(t) * rest);
  }
  std::sort(out.begin(), out.end());
  return g_pforests.emplace(n, std::move(out)).first->second;
}

}  // namespace

int max_order() noexcept { return g_max_order.load(); }

void set_max_order(int n) {
  if (n < 1) throw DomainError("maximum order must be positive");
  g_max_order.store(n);
}

const std::vector<RootedTree>& enumerate_trees(int n) {
  if (n < 1) throw DomainError("tree order must be at least 1");
  check_capacity(n);
  std::lock_guard lock(g_enum_mutex);
  return trees_locked(n);
}

const std::vector<PlanarTree>& enumerate_planar_trees(int n) {
  if (n < 1) throw DomainError("tree order must be at least 1");
  check_capacity(n);
  std::lock_guard lock(g_enum_mutex);
  return ptrees_locked(n);
}

const std::vector<Forest>& enumerate_forests(int n) {
  if (n < 0) throw DomainError("forest order must be non-negative");
  check_capacity(n);
  std::lock_guard lock(g_enum_mutex);
  return forests_locked(n);
}

const std::vector<PlanarForest>& enumerate_planar_forests(int n) {
  if (n < 0) throw DomainError("forest order must be non-negative");
  check_capacity(n);
  std::lock_guard lock(g_enum_mutex);
  return pforests_locked(n);
}

// ---------------------------------------------------------------------------
// Statistics

TreeStats tree_stats(const RootedTree& t) {
  TreeStats s{t.order(), 1, t.order()};
  const auto& ch = t.children();
  for (std::size_t i = 0; i < ch.size();) {
    std::size_t j = i;
    while (j < ch.size() && ch[j] == ch[i]) ++j;
    TreeStats c = tree_stats(ch[i]);
    for (std::size_t k = i; k < j; ++k) {
      s.sigma *= c.sigma * static_cast<long long>(k - i + 1);
      s.factorial *= c.factorial;
    }
    i = j;
  }
  return s;
}

Rational symmetry(const RootedTree& t) { return Rational(static_cast<long>(tree_stats(t).sigma)); }

Rational tree_factorial(const RootedTree& t) { return Rational(static_cast<long>(tree_stats(t).factorial)); }

Rational symmetry(const Forest& f) { return symmetry(bplus(f)); }

Forest bminus(const Forest& f) {
  if (!f.is_tree()) throw DomainError("bminus requires a single tree, got '" + f.str() + "'");
  return bminus(f.front());
}

PlanarForest bminus(const PlanarForest& f) {
  if (!f.is_tree()) throw DomainError("bminus requires a single tree, got '" + f.str() + "'");
  return bminus(f.front());
}

RootedTree to_nonplanar(const PlanarTree& t) {
  std::vector<RootedTree> ch;
  ch.reserve(t.children().size());
  for (const auto& c : t.children()) ch.push_back(to_nonplanar(c));
  return RootedTree(std::move(ch), t.color());
}

Forest to_nonplanar(const PlanarForest& f) {
  std::vector<RootedTree> ts;
  for (const auto& t : f.trees()) ts.push_back(to_nonplanar(t));
  return Forest(std::move(ts));
}

std::vector<PlanarTree> planar_representatives(const RootedTree& t) {
  std::set<PlanarTree> out;
  std::vector<RootedTree> perm = t.children();
  std::sort(perm.begin(), perm.end());
  do {
    std::vector<std::vector<PlanarTree>> reps;
    for (const auto& c : perm) reps.push_back(planar_representatives(c));
    std::vector<std::size_t> idx(perm.size(), 0);
    while (true) {
      std::vector<PlanarTree> ch;
      for (std::size_t i = 0; i < perm.size(); ++i) ch.push_back(reps[i][idx[i]]);
      out.insert(PlanarTree(std::move(ch), t.color()));
      std::size_t i = 0;
      while (i < idx.size() && ++idx[i] == reps[i].size()) idx[i++] = 0;
      if (i == idx.size()) break;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------
// Products

RootedTree butcher_product(const RootedTree& t, const Forest& w) {
  std::vector<RootedTree> ch = t.children();
  ch.insert(ch.end(), w.trees().begin(), w.trees().end());
  return RootedTree(std::move(ch), t.color());
}

LinComb<RootedTree> prelie_graft(const RootedTree& t1, const RootedTree& t2) {
  LinComb<RootedTree> r;
  std::vector<RootedTree> ch = t2.children();
  ch.push_back(t1);
  r.add(RootedTree(ch, t2.color()), 1);
  ch.pop_back();
  for (std::size_t i = 0; i < ch.size(); ++i) {
    for (const auto& [sub, c] : prelie_graft(t1, t2.children()[i])) {
      std::vector<RootedTree> mod = ch;
      mod[i] = sub;
      r.add(RootedTree(std::move(mod), t2.color()), c);
    }
  }
  return r;
}

LinComb<RootedTree> prelie_graft(const LinComb<RootedTree>& x, const LinComb<RootedTree>& y) {
  return bilinear_map<RootedTree>(x, y, [](const RootedTree& a, const RootedTree& b) { return prelie_graft(a, b); });
}

LinComb<RootedTree> prelie_graft(const Forest& f1, const Forest& f2) {
  if (!f1.is_tree() || !f2.is_tree())
    throw DomainError("pre-Lie grafting is only defined on trees, got '" + f1.str() + "' and '" + f2.str() + "'");
  return prelie_graft(f1.front(), f2.front());
}

LinComb<PlanarForest> concat(const LinComb<PlanarForest>& x, const LinComb<PlanarForest>& y) {
  return bilinear_map<PlanarForest>(x, y, [](const PlanarForest& a, const PlanarForest& b) {
    return LinComb<PlanarForest>(a * b);
  });
}

LinComb<Forest> forest_product(const LinComb<Forest>& x, const LinComb<Forest>& y) {
  return bilinear_map<Forest>(x, y, [](const Forest& a, const Forest& b) { return LinComb<Forest>(a * b); });
}

namespace {

PlanarForest tail(const PlanarForest& w, std::size_t from) {
  return PlanarForest(std::vector<PlanarTree>(w.trees().begin() + static_cast<std::ptrdiff_t>(from), w.trees().end()));
}

using GraftCache = std::unordered_map<std::string, LinComb<PlanarForest>>;

LinComb<PlanarForest> left_graft_impl(const PlanarForest& a, const PlanarForest& b, GraftCache& cache);

LinComb<PlanarForest> left_graft_impl(const LinComb<PlanarForest>& x, const LinComb<PlanarForest>& y,
                                      GraftCache& cache) {
  LinComb<PlanarForest> r;
  for (const auto& [a, ca] : x)
    for (const auto& [b, cb] : y) r.add(left_graft_impl(a, b, cache), ca * cb);
  return r;
}

LinComb<PlanarForest> left_graft_impl(const PlanarForest& a, const PlanarForest& b, GraftCache& cache) {
  if (a.empty()) return LinComb<PlanarForest>(b);
  if (b.empty()) return {};
  std::string key = a.str() + "|" + b.str();
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  LinComb<PlanarForest> r;
  if (a.size() == 1) {
    if (b.size() == 1) {
      // t > B+_c(w) = B+_c(t w) + B+_c(t > w)
      const PlanarTree& target = b.front();
      PlanarForest w = bminus(target);
      r.add(PlanarForest(bplus(a * w, target.color())), 1);
      r.add(bplus(left_graft_impl(a, w, cache), target.color()));
    } else {
      // derivation rule over concatenation
      PlanarForest first(b.front());
      PlanarForest rest = tail(b, 1);
      for (const auto& [g, c] : left_graft_impl(a, first, cache)) r.add(g * rest, c);
      for (const auto& [g, c] : left_graft_impl(a, rest, cache)) r.add(first * g, c);
    }
  } else {
    // (t w) > b = t > (w > b) - (t > w) > b
    PlanarForest t(a.front());
    PlanarForest w = tail(a, 1);
    r.add(left_graft_impl(LinComb<PlanarForest>(t), left_graft_impl(w, b, cache), cache));
    r.add(left_graft_impl(left_graft_impl(t, w, cache), LinComb<PlanarForest>(b), cache), Rational(-1));
  }
  cache.emplace(std::move(key), r);
  return r;
}

void shuffle_rec(const std::vector<PlanarTree>& a, std::size_t i, const std::vector<PlanarTree>& b, std::size_t j,
                 std::vector<PlanarTree>& cur, LinComb<PlanarForest>& out) {
  if (i == a.size() && j == b.size()) {
    out.add(PlanarForest(cur), 1);
    return;
  }
  if (i < a.size()) {
    cur.push_back(a[i]);
    shuffle_rec(a, i + 1, b, j, cur, out);
    cur.pop_back();
  }
  if (j < b.size()) {
    cur.push_back(b[j]);
    shuffle_rec(a, i, b, j + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

LinComb<PlanarForest> left_graft(const PlanarForest& a, const PlanarForest& b) {
  GraftCache cache;
  return left_graft_impl(a, b, cache);
}

LinComb<PlanarForest> left_graft(const LinComb<PlanarForest>& x, const LinComb<PlanarForest>& y) {
  GraftCache cache;
  return left_graft_impl(x, y, cache);
}

LinComb<PlanarForest> shuffle(const PlanarForest& a, const PlanarForest& b) {
  LinComb<PlanarForest> out;
  std::vector<PlanarTree> cur;
  shuffle_rec(a.trees(), 0, b.trees(), 0, cur, out);
  return out;
}

LinComb<PlanarForest> shuffle(const LinComb<PlanarForest>& x, const LinComb<PlanarForest>& y) {
  return bilinear_map<PlanarForest>(x, y, [](const PlanarForest& a, const PlanarForest& b) { return shuffle(a, b); });
}

LinComb<PlanarForest> gl_product(const PlanarForest& a, const PlanarForest& b) {
  return bminus(left_graft(a, PlanarForest(bplus(b))));
}

LinComb<PlanarForest> gl_product(const LinComb<PlanarForest>& x, const LinComb<PlanarForest>& y) {
  return bilinear_map<PlanarForest>(x, y,
                                    [](const PlanarForest& a, const PlanarForest& b) { return gl_product(a, b); });
}

LinComb<PlanarForest> bplus(const LinComb<PlanarForest>& x, const std::string& color) {
  LinComb<PlanarForest> r;
  for (const auto& [f, c] : x) r.add(PlanarForest(bplus(f, color)), c);
  return r;
}

LinComb<PlanarForest> bminus(const LinComb<PlanarForest>& x) {
  LinComb<PlanarForest> r;
  for (const auto& [f, c] : x) r.add(bminus(f), c);
  return r;
}

}  // namespace bseries
