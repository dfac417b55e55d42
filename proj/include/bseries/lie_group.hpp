#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bseries/bck.hpp"
#include "bseries/errors.hpp"

namespace bseries {

using Mat = Eigen::MatrixXd;

// Matrix exponential by scaling and squaring with the diagonal Pade(6) approximant.
Mat expm(const Mat& A);
// Closed-form exponential of a 3x3 skew matrix.
Mat rodrigues(const Mat& V);
Mat hat(const Eigen::Vector3d& v);

enum class ActionKind { rotation_s2, isospectral, affine, translation };
ActionKind parse_action_kind(std::string_view s);
std::string to_string(ActionKind k);

// Algebra elements, group elements and states are all stored as dense matrices:
//   rotation_s2   skew 3x3 / SO(3) / 3x1 vector, g.y = Qy
//   isospectral   skew nxn / SO(n) / symmetric nxn, g.y = QyQ^T
//   affine        [[V, b], [0, 0]] / [[a, b], [0, 1]] / nx1, g.y = ay + b
//   translation   nx1 / nx1 / nx1, g.y = g + y
struct GroupAction {
  ActionKind kind;
  int n;
  int algebra_dim;

  Mat bracket(const Mat& u, const Mat& v) const;
  Mat exp(const Mat& v) const;
  Mat act(const Mat& g, const Mat& y) const;
  // d/dt act(exp(tv), y) at t = 0.
  Mat inf_act(const Mat& v, const Mat& y) const;
  Mat zero_algebra() const;
};

// rotation_s2 ignores n (always 3).
GroupAction make_action(ActionKind kind, int n);

// sum_{k < m} B_k / k! ad_U^k(K).
Mat dexpinv(const GroupAction& g, const Mat& U, const Mat& K, int m);

struct LGProblem {
  GroupAction action;
  std::function<Mat(double, const Mat&)> f;
  Mat y0;
  // Solution at time t; empty when unavailable.
  std::function<Mat(double)> reference;
  std::string name;
};

// Reference solution of y' = inf_act(f(t, y), y) from classical RK4 with steps 2d and d, combined
// by Richardson extrapolation.
std::function<Mat(double)> richardson_reference(const LGProblem& p, double d);

// y' = hat(y / I) y on the unit sphere with I = (1, 2, 4).
LGProblem free_rigid_body(double reference_step = 0.025 / 64);
// Symmetric 3x3 start, f(y) = strictly upper part of y minus strictly lower part.
LGProblem isospectral_problem();
// y' = L y + N(y) in the plane.
LGProblem affine_problem(double reference_step = 0.025 / 64);
// y' = A y in the plane with A a rotation generator; exact reference.
LGProblem linear_translation_problem();

struct LGMethod {
  enum class Kind { lie_euler, lie_midpoint, lie_rk4, lie_rk4_displayed, rkmk, cf4, cf4_displayed };
  Kind kind;
  std::optional<RKTableau> tableau;
  int dexp_terms = 0;
  std::string name;
};

// lie_euler, lie_midpoint, lie_rk4, lie_rk4_displayed, cf4, cf4_displayed, rkmk:<builtin>[:m].
// m defaults to the tableau's order minus one (at least one term).
LGMethod parse_lg_method(std::string_view s);
LGMethod rkmk_method(const RKTableau& t, int m = 0);

// Lie midpoint and implicit RKMK tableaus iterate to 1e-14 * (1 + |K|), at most 100 sweeps.
Mat lg_step(const LGMethod& m, const LGProblem& p, double t, const Mat& y, double h);

struct ConvergenceResult {
  std::string method;
  std::vector<double> h, error;
  double slope;
};

// Integrates to t_end with each h (which must divide t_end) and fits log(error) against log(h).
ConvergenceResult convergence_order(const LGMethod& m, const LGProblem& p, double t_end,
                                    const std::vector<double>& hs);
// Header method,h,error,slope_estimate; numbers with 17 significant digits.
std::string to_csv(const ConvergenceResult& r);
std::string format_double(double x);

}  // namespace bseries
