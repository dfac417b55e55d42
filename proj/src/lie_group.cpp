#include "bseries/lie_group.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bseries {

Mat expm(const Mat& A) {
  if (A.rows() != A.cols()) throw DomainError("matrix exponential needs a square matrix");
  const auto n = A.rows();
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Mat X = A / std::ldexp(1.0, s);
  static const double c[] = {1.0,        1.0 / 2,     5.0 / 44,      1.0 / 66,
                             1.0 / 792, 1.0 / 15840, 1.0 / 665280};
  Mat P = Mat::Identity(n, n), Q = Mat::Identity(n, n), Xk = Mat::Identity(n, n);
  for (int k = 1; k <= 6; ++k) {
    Xk = Xk * X;
    P += c[k] * Xk;
    Q += ((k % 2) ? -c[k] : c[k]) * Xk;
  }
  Mat E = Q.partialPivLu().solve(P);
  for (int i = 0; i < s; ++i) E = E * E;
  return E;
}

Mat hat(const Eigen::Vector3d& v) {
  Mat V(3, 3);
  V << 0, -v(2), v(1), v(2), 0, -v(0), -v(1), v(0), 0;
  return V;
}

Mat rodrigues(const Mat& V) {
  if (V.rows() != 3 || V.cols() != 3) throw DomainError("Rodrigues formula needs a 3x3 matrix");
  const double th2 = V(2, 1) * V(2, 1) + V(0, 2) * V(0, 2) + V(1, 0) * V(1, 0);
  const double th = std::sqrt(th2);
  double a, b;
  if (th < 1e-4) {
    a = 1 - th2 / 6 + th2 * th2 / 120;
    b = 0.5 - th2 / 24 + th2 * th2 / 720;
  } else {
    a = std::sin(th) / th;
    b = (1 - std::cos(th)) / th2;
  }
  return Mat::Identity(3, 3) + a * V + b * V * V;
}

ActionKind parse_action_kind(std::string_view s) {
  if (s == "rotation" || s == "rotation_s2") return ActionKind::rotation_s2;
  if (s == "isospectral") return ActionKind::isospectral;
  if (s == "affine") return ActionKind::affine;
  if (s == "translation") return ActionKind::translation;
  throw DomainError("unsupported action: " + std::string(s));
}

std::string to_string(ActionKind k) {
  switch (k) {
    case ActionKind::rotation_s2: return "rotation_s2";
    case ActionKind::isospectral: return "isospectral";
    case ActionKind::affine: return "affine";
    case ActionKind::translation: return "translation";
  }
  return "";
}

Mat GroupAction::bracket(const Mat& u, const Mat& v) const {
  if (kind == ActionKind::translation) return Mat::Zero(u.rows(), u.cols());
  return u * v - v * u;
}

Mat GroupAction::exp(const Mat& v) const {
  switch (kind) {
    case ActionKind::rotation_s2: return rodrigues(v);
    case ActionKind::isospectral:
    case ActionKind::affine: return expm(v);
    case ActionKind::translation: return v;
  }
  return v;
}

Mat GroupAction::act(const Mat& g, const Mat& y) const {
  switch (kind) {
    case ActionKind::rotation_s2: return g * y;
    case ActionKind::isospectral: return g * y * g.transpose();
    case ActionKind::affine: return g.topLeftCorner(n, n) * y + g.topRightCorner(n, 1);
    case ActionKind::translation: return g + y;
  }
  return y;
}

Mat GroupAction::inf_act(const Mat& v, const Mat& y) const {
  switch (kind) {
    case ActionKind::rotation_s2: return v * y;
    case ActionKind::isospectral: return v * y - y * v;
    case ActionKind::affine: return v.topLeftCorner(n, n) * y + v.topRightCorner(n, 1);
    case ActionKind::translation: return v;
  }
  return y;
}

Mat GroupAction::zero_algebra() const {
  switch (kind) {
    case ActionKind::rotation_s2: return Mat::Zero(3, 3);
    case ActionKind::isospectral: return Mat::Zero(n, n);
    case ActionKind::affine: return Mat::Zero(n + 1, n + 1);
    case ActionKind::translation: return Mat::Zero(n, 1);
  }
  return {};
}

GroupAction make_action(ActionKind kind, int n) {
  switch (kind) {
    case ActionKind::rotation_s2: return {kind, 3, 3};
    case ActionKind::isospectral:
      if (n < 2) throw DomainError("isospectral action needs n >= 2");
      return {kind, n, n * (n - 1) / 2};
    case ActionKind::affine:
      if (n < 1) throw DomainError("affine action needs n >= 1");
      return {kind, n, n * n + n};
    case ActionKind::translation:
      if (n < 1) throw DomainError("translation action needs n >= 1");
      return {kind, n, n};
  }
  throw DomainError("unsupported action");
}

Mat dexpinv(const GroupAction& g, const Mat& U, const Mat& K, int m) {
  if (m < 1) throw DomainError("dexpinv needs at least one term");
  Mat out = K, ad = K;
  for (int k = 1; k < m; ++k) {
    ad = g.bracket(U, ad);
    const Rational c = bernoulli(k) / factorial(k);
    if (sgn(c) != 0) out += c.get_d() * ad;
  }
  return out;
}

std::function<Mat(double)> richardson_reference(const LGProblem& p, double d) {
  if (!(d > 0)) throw DomainError("reference step must be positive");
  return [p, d](double t_end) {
    auto g = [&p](double t, const Mat& y) { return p.action.inf_act(p.f(t, y), y); };
    auto integrate = [&](int steps) {
      const double h = t_end / steps;
      Mat y = p.y0;
      for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        const Mat k1 = g(t, y);
        const Mat k2 = g(t + h / 2, y + h / 2 * k1);
        const Mat k3 = g(t + h / 2, y + h / 2 * k2);
        const Mat k4 = g(t + h, y + h * k3);
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      }
      return y;
    };
    const int coarse = std::max(1, static_cast<int>(std::ceil(std::abs(t_end) / (2 * d))));
    const Mat yc = integrate(coarse);
    const Mat yf = integrate(2 * coarse);
    return Mat(yf + (yf - yc) / 15);
  };
}

LGProblem free_rigid_body(double reference_step) {
  LGProblem p{make_action(ActionKind::rotation_s2, 3), nullptr, Mat(3, 1), nullptr, "free_rigid_body"};
  const Eigen::Vector3d inertia(1, 2, 4);
  p.f = [inertia](double, const Mat& y) {
    return hat(Eigen::Vector3d(y(0) / inertia(0), y(1) / inertia(1), y(2) / inertia(2)));
  };
  p.y0 << 1, 0.5, 0.8;
  p.y0.normalize();
  p.reference = richardson_reference(p, reference_step);
  return p;
}

LGProblem isospectral_problem() {
  LGProblem p{make_action(ActionKind::isospectral, 3), nullptr, Mat(3, 3), nullptr, "toda"};
  p.f = [](double, const Mat& y) {
    Mat v = Mat::Zero(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      for (Eigen::Index j = i + 1; j < y.cols(); ++j) {
        v(i, j) = y(i, j);
        v(j, i) = -y(j, i);
      }
    return v;
  };
  p.y0 << 2, 1, 0, 1, 1, 0.5, 0, 0.5, -1;
  p.reference = richardson_reference(p, 0.025 / 64);
  return p;
}

LGProblem affine_problem(double reference_step) {
  LGProblem p{make_action(ActionKind::affine, 2), nullptr, Mat(2, 1), nullptr, "affine"};
  p.f = [](double, const Mat& y) {
    Mat v = Mat::Zero(3, 3);
    v(0, 0) = -1;
    v(0, 1) = 2;
    v(1, 0) = -2;
    v(1, 1) = -1;
    v(0, 2) = 0.5 * y(1) * y(1);
    v(1, 2) = -0.5 * y(0) * y(1);
    return v;
  };
  p.y0 << 1, 0.5;
  p.reference = richardson_reference(p, reference_step);
  return p;
}

LGProblem linear_translation_problem() {
  LGProblem p{make_action(ActionKind::translation, 2), nullptr, Mat(2, 1), nullptr, "linear"};
  p.f = [](double, const Mat& y) {
    Mat v(2, 1);
    v << y(1), -y(0);
    return v;
  };
  p.y0 << 1, 0;
  p.reference = [](double t) {
    Mat y(2, 1);
    y << std::cos(t), -std::sin(t);
    return y;
  };
  return p;
}

LGMethod rkmk_method(const RKTableau& t, int m) {
  if (m <= 0) m = std::max(1, order_of(elementary_weights(t, 6), 6) - 1);
  return {LGMethod::Kind::rkmk, t, m, "rkmk:" + t.name()};
}

LGMethod parse_lg_method(std::string_view s) {
  using K = LGMethod::Kind;
  if (s == "lie_euler") return {K::lie_euler, std::nullopt, 0, "lie_euler"};
  if (s == "lie_midpoint") return {K::lie_midpoint, std::nullopt, 0, "lie_midpoint"};
  if (s == "lie_rk4") return {K::lie_rk4, std::nullopt, 0, "lie_rk4"};
  if (s == "lie_rk4_displayed") return {K::lie_rk4_displayed, std::nullopt, 0, "lie_rk4_displayed"};
  if (s == "cf4") return {K::cf4, std::nullopt, 0, "cf4"};
  if (s == "cf4_displayed") return {K::cf4_displayed, std::nullopt, 0, "cf4_displayed"};
  if (s.substr(0, 5) == "rkmk:") {
    std::string_view rest = s.substr(5);
    int m = 0;
    if (auto colon = rest.find(':'); colon != std::string_view::npos) {
      const std::string digits(rest.substr(colon + 1));
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 3)
        throw DomainError("invalid dexpinv term count: " + digits);
      m = std::stoi(digits);
      if (m < 1) throw DomainError("dexpinv needs at least one term");
      rest = rest.substr(0, colon);
    }
    LGMethod out = rkmk_method(RKTableau::builtin(rest), m);
    out.name = std::string(s);
    return out;
  }
  throw DomainError("unknown Lie group method: " + std::string(s));
}

namespace {

constexpr int kMaxIter = 100;
constexpr double kTol = 1e-14;

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Mat rkmk_step(const LGMethod& m, const LGProblem& p, double t, const Mat& y, double h) {
  const RKTableau& tab = *m.tableau;
  const GroupAction& G = p.action;
  const int s = tab.stages();
  std::vector<Mat> K(static_cast<std::size_t>(s), G.zero_algebra());
  auto stage = [&](int i) {
    Mat U = G.zero_algebra();
    for (int j = 0; j < s; ++j)
      if (sgn(tab.a(i, j)) != 0) U += tab.a(i, j).get_d() * K[j];
    const double ti = t + tab.c(i).get_d() * h;
    return dexpinv(G, U, h * p.f(ti, G.act(G.exp(U), y)), m.dexp_terms);
  };
  if (tab.is_explicit()) {
    for (int i = 0; i < s; ++i) K[i] = stage(i);
  } else {
    double residual = 0;
    bool converged = false;
    for (int it = 0; it < kMaxIter && !converged; ++it) {
      std::vector<Mat> next(K.size());
      for (int i = 0; i < s; ++i) next[i] = stage(i);
      residual = 0;
      double scale = 0;
      for (int i = 0; i < s; ++i) {
        residual = std::max(residual, max_abs(next[i] - K[i]));
        scale = std::max(scale, max_abs(next[i]));
      }
      K = std::move(next);
      converged = residual <= kTol * (1 + scale);
    }
    if (!converged) throw ConvergenceError("RKMK stage iteration did not converge", residual);
  }
  Mat sum = G.zero_algebra();
  for (int j = 0; j < s; ++j) sum += tab.b(j).get_d() * K[j];
  return G.act(G.exp(sum), y);
}

}  // namespace

Mat lg_step(const LGMethod& m, const LGProblem& p, double t, const Mat& y, double h) {
  if (!(h > 0)) throw DomainError("step size must be positive");
  const GroupAction& G = p.action;
  auto step = [&](const Mat& v, const Mat& state) { return G.act(G.exp(v), state); };
  using K = LGMethod::Kind;
  switch (m.kind) {
    case K::lie_euler: return step(h * p.f(t, y), y);
    case K::lie_midpoint: {
      Mat k = h * p.f(t + h / 2, y);
      double residual = 0;
      for (int it = 0; it < kMaxIter; ++it) {
        Mat next = h * p.f(t + h / 2, step(k / 2, y));
        residual = max_abs(next - k);
        k = std::move(next);
        if (residual <= kTol * (1 + max_abs(k))) return step(k, y);
      }
      throw ConvergenceError("Lie midpoint iteration did not converge", residual);
    }
    case K::lie_rk4: {
      const Mat k1 = h * p.f(t, y);
      const Mat k2 = h * p.f(t + h / 2, step(k1 / 2, y));
      const Mat k3 = h * p.f(t + h / 2, step(k2 / 2 - G.bracket(k1, k2) / 8, y));
      const Mat k4 = h * p.f(t + h, step(k3, y));
      return step(k1 / 6 + k2 / 3 + k3 / 3 + k4 / 6 - G.bracket(k1, k4) / 12, y);
    }
    case K::lie_rk4_displayed: {
      const Mat k1 = h * p.f(t, y);
      const Mat k2 = h * p.f(t / 2, step(k1 / 2, y));
      const Mat k3 = h * p.f(t + h / 2, step(k2 / 2 - G.bracket(k1, k2) / 8, y));
      const Mat k4 = h * p.f(t + h / 2, step(k3, y));
      return step(k1 / 6 + k2 / 3 + k3 / 3 + k4 / 6 - G.bracket(k1, k2) / 3 - G.bracket(k1, k4) / 12, y);
    }
    case K::cf4: {
      const Mat k1 = h * p.f(t, y);
      const Mat k2 = h * p.f(t + h / 2, step(k1 / 2, y));
      const Mat k3 = h * p.f(t + h / 2, step(k2 / 2, y));
      const Mat k4 = h * p.f(t + h, step(k3 - k1 / 2, step(k1 / 2, y)));
      const Mat first = k1 / 4 + k2 / 6 + k3 / 6 - k4 / 12;
      const Mat second = k2 / 6 + k3 / 6 + k4 / 4 - k1 / 12;
      return step(second, step(first, y));
    }
    case K::cf4_displayed: {
      const Mat k1 = h * p.f(t, y);
      const Mat k2 = h * p.f(t / 2, step(k1 / 2, y));
      const Mat k3 = h * p.f(t + h / 2, step(k2 / 2, y));
      const Mat k4 = h * p.f(t + h / 2, step(k1 / 2, step(k3 - k1 / 2, y)));
      const Mat left = k1 / 4 + k2 / 6 + k3 / 6 - k4 / 12;
      const Mat right = k2 / 6 + k3 / 6 + k4 / 4 - k1 / 12;
      return step(left, step(right, y));
    }
    case K::rkmk: return rkmk_step(m, p, t, y, h);
  }
  throw DomainError("unknown Lie group method");
}

ConvergenceResult convergence_order(const LGMethod& m, const LGProblem& p, double t_end,
                                    const std::vector<double>& hs) {
  if (hs.size() < 3) throw DomainError("convergence estimate needs at least three step sizes");
  if (!p.reference) throw DomainError("problem has no reference solution");
  const Mat ref = p.reference(t_end);
  ConvergenceResult r{m.name, hs, {}, 0.0};
  for (double h : hs) {
    if (!(h > 0)) throw DomainError("step size must be positive");
    const long steps = std::lround(t_end / h);
    if (steps < 1 || std::abs(steps * h - t_end) > 1e-9 * std::max(1.0, std::abs(t_end)))
      throw DomainError("step size must divide the time interval");
    Mat y = p.y0;
    for (long i = 0; i < steps; ++i) y = lg_step(m, p, i * h, y, h);
    r.error.push_back((y - ref).norm());
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]), v = std::log(r.error[i]);
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
  }
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return r;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const ConvergenceResult& r) {
  std::ostringstream os;
  os << "method,h,error,slope_estimate\n";
  for (std::size_t i = 0; i < r.h.size(); ++i)
    os << r.method << ',' << format_double(r.h[i]) << ',' << format_double(r.error[i]) << ','
       << format_double(r.slope) << '\n';
  return os.str();
}

}  // namespace bseries
