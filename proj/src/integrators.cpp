#include "bseries/integrators.hpp"

#include <map>

namespace bseries {

PolyVectorField elementary_differential(const RootedTree& t, const PolyVectorField& F) {
  auto coef = [&](int i, const std::vector<int>& idx) { return F.partial(i, idx); };
  // Separate from the templated recursion: polynomials need the variable count for 0 and 1.
  const int n = F.dim();
  std::function<std::vector<Polynomial>(const RootedTree&)> rec = [&](const RootedTree& tree) {
    std::vector<std::vector<Polynomial>> args;
    for (const auto& c : tree.children()) args.push_back(rec(c));
    const std::size_t m = args.size();
    std::vector<Polynomial> out(static_cast<std::size_t>(n), Polynomial(n));
    std::vector<int> idx(m, 0);
    while (true) {
      Polynomial w = Polynomial::constant(n, 1);
      for (std::size_t k = 0; k < m && !w.is_zero(); ++k) w = w * args[k][idx[k]];
      if (!w.is_zero())
        for (int i = 0; i < n; ++i) out[i] += coef(i, idx) * w;
      std::size_t k = 0;
      while (k < m && ++idx[k] == n) idx[k++] = 0;
      if (k == m) break;
    }
    return out;
  };
  return PolyVectorField(rec(t));
}

std::vector<Rational> eval_bseries(const BCoeff& a, const PolyVectorField& F, const std::vector<Rational>& y,
                                   const Rational& h, int N) {
  if (static_cast<int>(y.size()) != F.dim()) throw DomainError("state has wrong dimension");
  if (a.order() < N) throw DomainError("coefficient map truncated below the requested order");
  std::vector<Rational> out = y;
  const Rational a0 = a(Forest());
  for (auto& v : out) v *= a0;
  Rational hk = 1;
  for (int k = 1; k <= N; ++k) {
    hk *= h;
    for (const auto& t : enumerate_trees(k)) {
      const Rational c = a(t);
      if (sgn(c) == 0) continue;
      const Rational w = hk * c / symmetry(t);
      const auto d = elementary_differential(t, F, y);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * d[i];
    }
  }
  return out;
}

SeriesMap rk_series_map(const RKTableau& t) {
  return [t](const PolyVectorField& F, const std::vector<TruncSeries>& y, const TruncSeries& h) {
    auto field = [&F](const std::vector<TruncSeries>& v) { return F(v); };
    auto same = [](const auto& a, const auto& b) { return a == b; };
    return rk_apply(t, field, y, h, h.degree() + 2, same);
  };
}

SeriesMap compose_maps(SeriesMap first, SeriesMap second) {
  return [first = std::move(first), second = std::move(second)](
             const PolyVectorField& F, const std::vector<TruncSeries>& y, const TruncSeries& h) {
    return second(F, first(F, y, h), h);
  };
}

BCoeff taylor_oracle(const SeriesMap& map, int N) {
  if (N < 1) throw DomainError("oracle order must be at least 1");
  std::vector<RootedTree> trees;
  std::map<RootedTree, int> index;
  for (int k = 1; k <= N; ++k)
    for (const auto& t : enumerate_trees(k)) {
      index.emplace(t, static_cast<int>(trees.size()));
      trees.push_back(t);
    }
  const int n = static_cast<int>(trees.size());
  std::vector<Polynomial> comps;
  for (const auto& t : trees) {
    Polynomial p = Polynomial::constant(n, 1);
    for (const auto& c : t.children()) p = p * Polynomial::variable(n, index.at(c));
    comps.push_back(std::move(p));
  }
  const PolyVectorField F(std::move(comps));

  std::vector<TruncSeries> y0(static_cast<std::size_t>(n));
  const auto y1 = map(F, y0, TruncSeries::h(N));
  const std::vector<Rational> origin(static_cast<std::size_t>(n), Rational(0));

  BCoeff out(BCoeff::Kind::character, N);
  for (int i = 0; i < n; ++i) {
    const RootedTree& t = trees[i];
    for (int k = 0; k <= N; ++k)
      if (k != t.order() && sgn(y1[i].coeff(k)) != 0)
        throw DomainError("map is not a B-series: stray power of h in component " + t.str());
    const auto d = elementary_differential(t, F, origin);
    for (int j = 0; j < n; ++j)
      if ((j == i) != (sgn(d[j]) != 0)) throw DomainError("test system is degenerate at " + t.str());
    out.set(t, y1[i].coeff(t.order()) * symmetry(t) / d[i]);
  }
  return out;
}

BCoeff rk_taylor_oracle(const RKTableau& t, int N) { return taylor_oracle(rk_series_map(t), N); }

Eigen::VectorXd rk_step(const RKTableau& t, const VectorField& F, const Eigen::VectorXd& y, double h, double tol) {
  if (!(h > 0)) throw DomainError("step size must be positive");
  const int s = t.stages();
  std::vector<Eigen::VectorXd> K(static_cast<std::size_t>(s), Eigen::VectorXd::Zero(y.size()));
  auto stage_state = [&](int i) {
    Eigen::VectorXd Y = y;
    for (int j = 0; j < s; ++j)
      if (sgn(t.a(i, j)) != 0) Y += h * t.a(i, j).get_d() * K[j];
    return Y;
  };
  if (t.is_explicit()) {
    for (int i = 0; i < s; ++i) K[i] = F(stage_state(i));
  } else {
    const Eigen::VectorXd f0 = F(y);
    for (auto& k : K) k = f0;
    double residual = 0;
    bool converged = false;
    for (int it = 0; it < 100 && !converged; ++it) {
      std::vector<Eigen::VectorXd> next(K.size());
      for (int i = 0; i < s; ++i) next[i] = F(stage_state(i));
      residual = 0;
      double scale = 0;
      for (int i = 0; i < s; ++i) {
        residual = std::max(residual, (next[i] - K[i]).lpNorm<Eigen::Infinity>());
        scale = std::max(scale, next[i].lpNorm<Eigen::Infinity>());
      }
      K = std::move(next);
      converged = residual <= tol * (1 + scale);
    }
    if (!converged) throw ConvergenceError("implicit stage iteration did not converge", residual);
  }
  Eigen::VectorXd out = y;
  for (int j = 0; j < s; ++j) out += h * t.b(j).get_d() * K[j];
  return out;
}

}  // namespace bseries
