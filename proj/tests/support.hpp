#pragma once

#include <random>
#include <vector>

#include "bseries/forest.hpp"

namespace testing {

using namespace bseries;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

// Small rationals p/q with |p| <= 5, 1 <= q <= 4; never zero when nonzero is set.
inline Rational random_rational(bool nonzero = false) {
  while (true) {
    Rational q = make_rational(uniform_int(-5, 5), uniform_int(1, 4));
    if (!nonzero || sgn(q) != 0) return q;
  }
}

template <class T>
const T& pick(const std::vector<T>& v) {
  return v[static_cast<std::size_t>(uniform_int(0, static_cast<int>(v.size()) - 1))];
}

inline RootedTree random_tree(int max_order) { return pick(enumerate_trees(uniform_int(1, max_order))); }
inline PlanarTree random_planar_tree(int max_order) { return pick(enumerate_planar_trees(uniform_int(1, max_order))); }
inline PlanarForest random_planar_forest(int max_order) {
  return pick(enumerate_planar_forests(uniform_int(0, max_order)));
}
inline Forest random_forest(int max_order) { return pick(enumerate_forests(uniform_int(0, max_order))); }

// Random formal sum of a few basis elements of order <= max_order.
inline LinComb<PlanarForest> random_planar_sum(int max_order, int terms = 3, int min_order = 0) {
  LinComb<PlanarForest> r;
  for (int i = 0; i < terms; ++i)
    r.add(pick(enumerate_planar_forests(uniform_int(min_order, max_order))), random_rational(true));
  return r;
}
inline LinComb<PlanarForest> random_planar_tree_sum(int max_order, int terms = 3) {
  LinComb<PlanarForest> r;
  for (int i = 0; i < terms; ++i) r.add(PlanarForest(random_planar_tree(max_order)), random_rational(true));
  return r;
}
inline LinComb<RootedTree> random_tree_sum(int max_order, int terms = 3) {
  LinComb<RootedTree> r;
  for (int i = 0; i < terms; ++i) r.add(random_tree(max_order), random_rational(true));
  return r;
}

template <bool P>
std::vector<BasicForest<P>> forests_up_to(int n) {
  std::vector<BasicForest<P>> out;
  for (int k = 0; k <= n; ++k) {
    if constexpr (P) {
      for (const auto& f : enumerate_planar_forests(k)) out.push_back(f);
    } else {
      for (const auto& f : enumerate_forests(k)) out.push_back(f);
    }
  }
  return out;
}

}  // namespace testing
