#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "bseries/lincomb.hpp"

namespace bseries {

// Rooted tree in canonical form. The serialization is cached and doubles as the identity:
// two trees are equal iff their strings are equal. For the non-planar variant children are
// kept sorted by serialization, so equality is isomorphism.
//
// Grammar: tree := '[' (color ':')? tree* ']'; `[]` is the single vertex.
template <bool Planar>
class BasicTree {
 public:
  BasicTree();
  explicit BasicTree(std::vector<BasicTree> children, std::string color = {});

  const std::vector<BasicTree>& children() const noexcept { return children_; }
  const std::string& color() const noexcept { return color_; }
  const std::string& str() const noexcept { return str_; }
  int order() const noexcept { return order_; }

  friend bool operator==(const BasicTree& a, const BasicTree& b) noexcept { return a.str_ == b.str_; }
  friend std::strong_ordering operator<=>(const BasicTree& a, const BasicTree& b) noexcept {
    return a.str_ <=> b.str_;
  }

 private:
  std::vector<BasicTree> children_;
  std::string color_;
  std::string str_;
  int order_ = 1;
};

// Forest of trees: a multiset (non-planar) or a word (planar). The empty forest is the unit 1.
template <bool Planar>
class BasicForest {
 public:
  using tree_type = BasicTree<Planar>;

  BasicForest() = default;
  explicit BasicForest(std::vector<tree_type> trees);
  explicit BasicForest(tree_type tree);

  const std::vector<tree_type>& trees() const noexcept { return trees_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return trees_.size(); }
  bool empty() const noexcept { return trees_.empty(); }
  bool is_tree() const noexcept { return trees_.size() == 1; }
  const tree_type& front() const { return trees_.front(); }

  // Trees separated by single spaces; "1" for the empty forest.
  std::string str() const;

  // Concatenation (planar) or multiset union (non-planar).
  friend BasicForest operator*(const BasicForest& a, const BasicForest& b) {
    std::vector<tree_type> t = a.trees_;
    t.insert(t.end(), b.trees_.begin(), b.trees_.end());
    return BasicForest(std::move(t));
  }

  friend bool operator==(const BasicForest& a, const BasicForest& b) noexcept { return a.trees_ == b.trees_; }
  // Graded order first, then lexicographic on the tree sequence.
  friend std::strong_ordering operator<=>(const BasicForest& a, const BasicForest& b) noexcept {
    if (auto c = a.order_ <=> b.order_; c != 0) return c;
    return a.trees_ <=> b.trees_;
  }

 private:
  std::vector<tree_type> trees_;
  int order_ = 0;
};

using RootedTree = BasicTree<false>;
using PlanarTree = BasicTree<true>;
using Forest = BasicForest<false>;
using PlanarForest = BasicForest<true>;

extern template class BasicTree<false>;
extern template class BasicTree<true>;
extern template class BasicForest<false>;
extern template class BasicForest<true>;

template <bool P>
std::string to_string(const BasicTree<P>& t) {
  return t.str();
}
template <bool P>
std::string to_string(const BasicForest<P>& f) {
  return f.str();
}

// Parsing. Forests accept whitespace-separated or juxtaposed trees, and "1" or "" for the unit.
RootedTree parse_tree(std::string_view text);
PlanarTree parse_planar_tree(std::string_view text);
Forest parse_forest(std::string_view text);
PlanarForest parse_planar_forest(std::string_view text);

// Order cap for enumeration and graded computations (default 8).
int max_order() noexcept;
void set_max_order(int n);

// Exhaustive, duplicate-free, sorted by serialization. Throws CapacityError above max_order().
const std::vector<RootedTree>& enumerate_trees(int n);
const std::vector<PlanarTree>& enumerate_planar_trees(int n);
// Forests of total order exactly n (n = 0 gives the unit).
const std::vector<Forest>& enumerate_forests(int n);
const std::vector<PlanarForest>& enumerate_planar_forests(int n);

struct TreeStats {
  int order;
  long long sigma;
  long long factorial;
};
TreeStats tree_stats(const RootedTree& t);
Rational symmetry(const RootedTree& t);
Rational tree_factorial(const RootedTree& t);
// sigma(B+(w)): symmetry of a forest including permutations of equal trees.
Rational symmetry(const Forest& f);

template <bool P>
BasicTree<P> bplus(const BasicForest<P>& f, std::string color = {}) {
  return BasicTree<P>(f.trees(), std::move(color));
}
template <bool P>
BasicForest<P> bminus(const BasicTree<P>& t) {
  return BasicForest<P>(t.children());
}
// Requires a single-tree forest; throws DomainError otherwise.
Forest bminus(const Forest& f);
PlanarForest bminus(const PlanarForest& f);

// Non-planar projection.
RootedTree to_nonplanar(const PlanarTree& t);
Forest to_nonplanar(const PlanarForest& f);
// All planar trees projecting to t, sorted.
std::vector<PlanarTree> planar_representatives(const RootedTree& t);

// B+(children(t) + w) with the root color of t.
RootedTree butcher_product(const RootedTree& t, const Forest& w);

// Sum over vertices v of t2 of t2 with t1 attached below v.
LinComb<RootedTree> prelie_graft(const RootedTree& t1, const RootedTree& t2);
LinComb<RootedTree> prelie_graft(const LinComb<RootedTree>& x, const LinComb<RootedTree>& y);
// Only defined on single trees; forests with other sizes raise DomainError.
LinComb<RootedTree> prelie_graft(const Forest& f1, const Forest& f2);

// Planar left grafting (free D-algebra product), defined by the recursion
//   1 > w = w,  w > 1 = 0,  t > B+_c(w) = B+_c(t w) + B+_c(t > w),
//   t > w1 w2 = (t > w1) w2 + w1 (t > w2),  (t w) > w1 = t > (w > w1) - (t > w) > w1.
LinComb<PlanarForest> left_graft(const PlanarForest& a, const PlanarForest& b);
LinComb<PlanarForest> left_graft(const LinComb<PlanarForest>& x, const LinComb<PlanarForest>& y);

LinComb<PlanarForest> concat(const LinComb<PlanarForest>& x, const LinComb<PlanarForest>& y);
LinComb<Forest> forest_product(const LinComb<Forest>& x, const LinComb<Forest>& y);

LinComb<PlanarForest> shuffle(const PlanarForest& a, const PlanarForest& b);
LinComb<PlanarForest> shuffle(const LinComb<PlanarForest>& x, const LinComb<PlanarForest>& y);

// Grossman-Larson product: B-(a > B+(b)).
LinComb<PlanarForest> gl_product(const PlanarForest& a, const PlanarForest& b);
LinComb<PlanarForest> gl_product(const LinComb<PlanarForest>& x, const LinComb<PlanarForest>& y);

// Linear B+ / B- on formal sums.
LinComb<PlanarForest> bplus(const LinComb<PlanarForest>& x, const std::string& color = {});
LinComb<PlanarForest> bminus(const LinComb<PlanarForest>& x);

}  // namespace bseries
