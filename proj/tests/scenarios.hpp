#pragma once

// Numerical scenarios shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <vector>

#include "bseries/integrators.hpp"

namespace scenarios {

using namespace bseries;

// F(y) = (y2 - y1 y2, y1^2 - y2/2).
inline PolyVectorField quadratic_field() {
  Polynomial f1(2), f2(2);
  f1.add_term({0, 1}, 1);
  f1.add_term({1, 1}, -1);
  f2.add_term({2, 0}, 1);
  f2.add_term({0, 1}, make_rational(-1, 2));
  return PolyVectorField({f1, f2});
}

// sum_{|t| <= N} h^{|t|-1} beta(t)/sigma(t) F(t) for a fixed step h.
inline PolyVectorField modified_field(const BCoeff& beta, const PolyVectorField& F, const Rational& h, int N) {
  std::vector<Polynomial> comps(static_cast<std::size_t>(F.dim()), Polynomial(F.dim()));
  Rational hk = 1;
  for (int k = 1; k <= N; ++k) {
    for (const auto& t : enumerate_trees(k)) {
      const Rational c = beta(t);
      if (sgn(c) == 0) continue;
      const PolyVectorField d = elementary_differential(t, F);
      for (int i = 0; i < F.dim(); ++i) comps[i] += d[i] * (hk * c / symmetry(t));
    }
    hk *= h;
  }
  return PolyVectorField(std::move(comps));
}

// Max-norm gap between one Euler step and the (grade-truncated) exact flow of the backward-error
// modified field of order N, for each step size.
inline std::vector<double> backward_error_defects(const std::vector<Rational>& hs, int N = 4, int flow_order = 7) {
  const PolyVectorField F = quadratic_field();
  const BCoeff beta = solve_modified(elementary_weights(RKTableau::euler(), N), ModifiedMode::backward_error, N);
  const std::vector<Rational> y = {make_rational(1, 2), make_rational(1, 3)};
  std::vector<double> out;
  for (const auto& h : hs) {
    const PolyVectorField Ft = modified_field(beta, F, h, N);
    const auto flow = eval_bseries(exact_gamma(flow_order), Ft, y, h, flow_order);
    const auto fy = F(y);
    double err = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const Rational euler = y[i] + h * fy[i];
      err = std::max(err, std::abs(Rational(flow[i] - euler).get_d()));
    }
    out.push_back(err);
  }
  return out;
}

}  // namespace scenarios
