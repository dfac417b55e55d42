#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "bseries/bck.hpp"
#include "bseries/polynomial.hpp"

namespace bseries {

namespace detail {

// F(t) via F(B+(t_1..t_m))^i = sum_J f^i_J * prod_k F(t_k)^{j_k}, with coef(i, J) supplying f^i_J.
template <class S, class Coef>
std::vector<S> elementary_differential_rec(const RootedTree& t, int n, const Coef& coef) {
  std::vector<std::vector<S>> args;
  for (const auto& c : t.children()) args.push_back(elementary_differential_rec<S>(c, n, coef));
  const std::size_t m = args.size();
  std::vector<S> out(static_cast<std::size_t>(n), from_rational<S>(0));
  std::vector<int> idx(m, 0);
  while (true) {
    S w = from_rational<S>(1);
    for (std::size_t k = 0; k < m; ++k) w = w * args[k][idx[k]];
    for (int i = 0; i < n; ++i) out[i] = out[i] + coef(i, idx) * w;
    std::size_t k = 0;
    while (k < m && ++idx[k] == n) idx[k++] = 0;
    if (k == m) break;
  }
  return out;
}

}  // namespace detail

// F(t)(y), exactly for rational y and in floating point for double y.
template <class S>
std::vector<S> elementary_differential(const RootedTree& t, const PolyVectorField& F, const std::vector<S>& y) {
  if (static_cast<int>(y.size()) != F.dim()) throw DomainError("state has wrong dimension");
  auto coef = [&](int i, const std::vector<int>& idx) { return F.partial(i, idx).eval(y); };
  return detail::elementary_differential_rec<S>(t, F.dim(), coef);
}

// F(t) as a polynomial vector field.
PolyVectorField elementary_differential(const RootedTree& t, const PolyVectorField& F);

// a(1) y + sum_{|t| <= N} h^|t| a(t)/sigma(t) F(t)(y).
std::vector<Rational> eval_bseries(const BCoeff& a, const PolyVectorField& F, const std::vector<Rational>& y,
                                   const Rational& h, int N);

// One step of an RK method in arbitrary scalar arithmetic. Implicit stages are found by fixed-point
// iteration on the stage derivatives, stopping once done(old, new) holds; at most max_iter sweeps.
template <class S, class Field, class Done>
std::vector<S> rk_apply(const RKTableau& t, const Field& F, const std::vector<S>& y, const S& h, int max_iter,
                        const Done& done) {
  const int s = t.stages();
  const std::size_t n = y.size();
  auto stage_state = [&](int i, const std::vector<std::vector<S>>& K) {
    std::vector<S> Y = y;
    for (int j = 0; j < s; ++j) {
      if (sgn(t.a(i, j)) == 0) continue;
      const S ha = h * from_rational<S>(t.a(i, j));
      for (std::size_t k = 0; k < n; ++k) Y[k] = Y[k] + ha * K[j][k];
    }
    return Y;
  };
  std::vector<std::vector<S>> K(static_cast<std::size_t>(s), std::vector<S>(n, from_rational<S>(0)));
  if (t.is_explicit()) {
    for (int i = 0; i < s; ++i) K[i] = F(stage_state(i, K));
  } else {
    const auto f0 = F(y);
    for (auto& k : K) k = f0;
    for (int it = 0;; ++it) {
      if (it >= max_iter) throw ConvergenceError("implicit stage iteration did not converge", 0.0);
      std::vector<std::vector<S>> next(K.size());
      for (int i = 0; i < s; ++i) next[i] = F(stage_state(i, K));
      const bool stop = done(K, next);
      K = std::move(next);
      if (stop) break;
    }
  }
  std::vector<S> out = y;
  for (int j = 0; j < s; ++j) {
    const S hb = h * from_rational<S>(t.b(j));
    for (std::size_t k = 0; k < n; ++k) out[k] = out[k] + hb * K[j][k];
  }
  return out;
}

// A numerical map y -> y1 expanded in powers of h.
using SeriesMap = std::function<std::vector<TruncSeries>(const PolyVectorField&, const std::vector<TruncSeries>&,
                                                         const TruncSeries&)>;
SeriesMap rk_series_map(const RKTableau& t);
// y -> second(first(y)).
SeriesMap compose_maps(SeriesMap first, SeriesMap second);

// Reads off the B-series coefficients of a map from its Taylor expansion on the test system
// y_t' = prod_{children c} y_c (one variable per tree of order <= N), started at y = 0.
// Throws DomainError if the expansion is not that of a B-series.
BCoeff taylor_oracle(const SeriesMap& map, int N);
BCoeff rk_taylor_oracle(const RKTableau& t, int N);

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
// Implicit stages: fixed-point iteration until the stage update is below tol * (1 + |K|), at most
// 100 sweeps; ConvergenceError carries the last residual.
Eigen::VectorXd rk_step(const RKTableau& t, const VectorField& F, const Eigen::VectorXd& y, double h,
                        double tol = 1e-14);

}  // namespace bseries
