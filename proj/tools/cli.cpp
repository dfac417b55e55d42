#include "cli.hpp"

#include <Eigen/Eigenvalues>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "CLI11.hpp"
#include "bseries/errors.hpp"
#include "bseries/lie_group.hpp"

namespace bseries::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class Key>
std::string tensor_lines(const LinComb<Tensor<Key>>& x) {
  std::string s;
  for (const auto& [tp, c] : x) {
    if (c != 1) s += to_string(c) + ' ';
    s += to_string(tp.first) + " (x) " + to_string(tp.second) + '\n';
  }
  return s;
}

// Builtin name, or a path to a tableau file.
RKTableau resolve_tableau(const std::string& spec) {
  if (spec.empty()) throw UsageError("a method is required (--builtin or --tableau)");
  if (std::filesystem::exists(spec)) return load_tableau(spec);
  return RKTableau::builtin(spec);
}

RKTableau pick_tableau(const std::string& builtin, const std::string& file) {
  if (!builtin.empty() && !file.empty()) throw UsageError("--builtin and --tableau are exclusive");
  return file.empty() ? resolve_tableau(builtin) : load_tableau(file);
}

// "forest<TAB>value" lines; blank lines and '#' comments are skipped.
std::vector<std::pair<std::string, Rational>> read_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read coefficient file '" + path + "'");
  std::vector<std::pair<std::string, Rational>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected 'forest<TAB>value' in " + path, 0);
    rows.emplace_back(line.substr(0, tab), parse_rational(line.substr(tab + 1)));
  }
  return rows;
}

BCoeff read_bcoeff(const std::string& path, BCoeff::Kind kind, int N) {
  BCoeff a(kind, N);
  for (const auto& [f, v] : read_tsv(path)) a.set(parse_forest(f), v);
  return a;
}

LBCoeff read_lbcoeff(const std::string& path, LBCoeff::Kind kind, int N) {
  LBCoeff a(kind, N);
  for (const auto& [f, v] : read_tsv(path)) a.set(parse_planar_forest(f), v);
  return a;
}

BCoeff::Kind parse_bkind(const std::string& s) {
  if (s == "character") return BCoeff::Kind::character;
  if (s == "infinitesimal") return BCoeff::Kind::infinitesimal;
  if (s == "plain") return BCoeff::Kind::plain;
  throw UsageError("unknown kind '" + s + "'");
}

LBCoeff::Kind parse_lbkind(const std::string& s) {
  if (s == "character") return LBCoeff::Kind::character;
  if (s == "infinitesimal") return LBCoeff::Kind::infinitesimal;
  if (s == "plain") return LBCoeff::Kind::plain;
  throw UsageError("unknown kind '" + s + "'");
}

LGProblem problem_for(ActionKind kind, const std::string& f) {
  LGProblem p = [&] {
    switch (kind) {
      case ActionKind::rotation_s2: return free_rigid_body();
      case ActionKind::isospectral: return isospectral_problem();
      case ActionKind::affine: return affine_problem();
      case ActionKind::translation: return linear_translation_problem();
    }
    throw DomainError("unknown action");
  }();
  if (!f.empty() && f != p.name)
    throw DomainError("field '" + f + "' is not available for the " + to_string(kind) + " action (use '" + p.name + "')");
  return p;
}

// Classical tableau names run as RKMK methods, which reduce to the tableau on the translation action.
LGMethod method_for(const std::string& s) {
  for (const char* name : {"euler", "explicit_midpoint", "implicit_midpoint", "rk4"})
    if (s == name) return rkmk_method(RKTableau::builtin(s));
  return parse_lg_method(s);
}

std::vector<double> parse_steps(const std::string& s) {
  std::vector<double> hs;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      hs.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("invalid step size '" + item + "'");
    }
  }
  return hs;
}

std::vector<double> sorted_eigenvalues(const Mat& y) {
  Eigen::SelfAdjointEigenSolver<Mat> es(y, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write '" + path + "'");
  f << text;
}

struct Options {
  int N = 4;
  bool planar = false;
  std::string algebra, input;
  int table = -1;
  std::string builtin, tableau, first, second;
  std::string a_file, b_spec, b_kind = "character";
  std::string mode = "backward_error", kind = "symplectic", coeffs;
  std::string method, rep = "type1";
  std::string action = "rotation", f, invariant, output, hs = "0.2,0.1,0.05,0.025";
  int steps = 10;
  double h = 0.1, t_end = 1.0;
};

void cmd_trees(const Options& o, std::ostream& out) {
  for (int k = 1; k <= o.N; ++k) {
    if (o.planar) {
      for (const auto& t : enumerate_planar_trees(k)) out << t.str() << '\n';
    } else {
      for (const auto& t : enumerate_trees(k)) {
        const auto s = tree_stats(t);
        out << t.str() << '\t' << s.sigma << '\t' << s.factorial << '\n';
      }
    }
  }
}

void cmd_coproduct(const Options& o, std::ostream& out) {
  const std::string& alg = o.algebra;
  if (alg != "bck" && alg != "cefm" && alg != "mkw" && alg != "fdb")
    throw UsageError("unknown algebra '" + alg + "' (bck, cefm, mkw, fdb)");
  auto one = [&](const std::string& text) {
    if (alg == "bck") return format_tensor_sum(delta_bck(parse_forest(text)));
    if (alg == "cefm") return format_tensor_sum(delta_cefm(parse_forest(text)));
    if (alg == "mkw") return format_tensor_sum(delta_mkw(parse_planar_forest(text)));
    return format_tensor_sum(fdb_coproduct(parse_bell_word(text)));
  };
  if (o.table < 0) {
    if (o.input.empty()) throw UsageError("an input element or --table N is required");
    out << one(o.input);
    return;
  }
  auto block = [&](const std::string& name, const std::string& body) {
    out << name << '\n';
    std::istringstream lines(body);
    for (std::string l; std::getline(lines, l);) out << "  " << l << '\n';
  };
  for (int k = 0; k <= o.table; ++k) {
    if (alg == "bck" || alg == "cefm") {
      for (const auto& f : enumerate_forests(k)) block(f.str(), one(f.str()));
    } else if (alg == "mkw") {
      for (const auto& f : enumerate_planar_forests(k)) block(f.str(), one(f.str()));
    } else {
      // words of grade k: compositions of k
      std::function<void(int, BellWord)> rec = [&](int rest, BellWord w) {
        if (rest == 0) {
          block(w.str(), one(w.str()));
          return;
        }
        for (int d = 1; d <= rest; ++d) {
          BellWord v = w;
          v.letters.push_back(d);
          rec(rest - d, v);
        }
      };
      rec(k, {});
    }
  }
}

void cmd_compose(const Options& o, std::ostream& out) {
  const BCoeff a = elementary_weights(resolve_tableau(o.first), o.N);
  const BCoeff b = elementary_weights(resolve_tableau(o.second), o.N);
  out << format_tree_values(convolve_bck(a, b, o.N), o.N);
}

void cmd_substitute(const Options& o, std::ostream& out) {
  if (o.a_file.empty() || o.b_spec.empty()) throw UsageError("--a and --b are required");
  if (o.planar) {
    const LBCoeff a = read_lbcoeff(o.a_file, LBCoeff::Kind::infinitesimal, o.N);
    const LBCoeff b = read_lbcoeff(o.b_spec, parse_lbkind(o.b_kind), o.N);
    out << format_forest_values(lb_substitute(a, b, o.N), o.N);
    return;
  }
  const BCoeff a = read_bcoeff(o.a_file, BCoeff::Kind::infinitesimal, o.N);
  const bool tsv = o.b_spec.size() > 4 && o.b_spec.ends_with(".tsv");
  const BCoeff b = tsv ? read_bcoeff(o.b_spec, parse_bkind(o.b_kind), o.N)
                       : elementary_weights(resolve_tableau(o.b_spec), o.N);
  out << format_tree_values(substitute_b(a, b, o.N), o.N);
}

void cmd_modified(const Options& o, std::ostream& out) {
  const BCoeff a = elementary_weights(pick_tableau(o.builtin, o.tableau), o.N);
  out << format_tree_values(solve_modified(a, parse_modified_mode(o.mode), o.N), o.N);
}

void cmd_order(const Options& o, std::ostream& out) {
  const BCoeff a = elementary_weights(pick_tableau(o.builtin, o.tableau), o.N);
  const OrderReport r = order_report(a, o.N);
  out << "order: " << r.order << '\n';
  if (r.first_violation) {
    const RootedTree& t = *r.first_violation;
    out << "first violation: " << t.str() << "\tphi = " << to_string(a(t))
        << "\texpected = " << to_string(1 / tree_factorial(t)) << '\n';
  } else {
    out << "first violation: none\n";
  }
}

void cmd_geometric(const Options& o, std::ostream& out) {
  const GeometricKind kind = parse_geometric_kind(o.kind);
  BCoeff a = [&] {
    if (!o.coeffs.empty())
      return read_bcoeff(o.coeffs,
                         kind == GeometricKind::hamiltonian_field ? BCoeff::Kind::infinitesimal : BCoeff::Kind::character,
                         o.N);
    const BCoeff w = elementary_weights(pick_tableau(o.builtin, o.tableau), o.N);
    return kind == GeometricKind::hamiltonian_field ? solve_modified(w, parse_modified_mode(o.mode), o.N) : w;
  }();
  const auto v = check_geometric(a, kind, o.N);
  if (v.empty()) {
    out << "OK\n";
    return;
  }
  for (const auto& x : v)
    out << x.t1.str() << '\t' << x.t2.str() << '\t' << to_string(x.lhs) << '\t' << to_string(x.rhs) << '\n';
}

void cmd_series(const Options& o, std::ostream& out) {
  if (!o.method.empty()) {
    const LBRepresentation rep = parse_lb_representation(o.rep);
    if (o.method == "exact") {
      if (rep == LBRepresentation::generator) throw DomainError("the exact flow has no frozen generator");
      const LBCoeff g = exact_flow_lb(o.N);
      out << format_forest_values(rep == LBRepresentation::type3 ? g : q_apply(g, o.N), o.N);
      return;
    }
    out << format_forest_values(method_series(parse_lb_method(o.method), rep, o.N), o.N);
    return;
  }
  out << format_tree_values(elementary_weights(pick_tableau(o.builtin, o.tableau), o.N), o.N);
}

std::string state_csv(const Mat& y) {
  std::string s;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += ',' + format_double(y.data()[i]);
  return s;
}

void cmd_integrate(const Options& o, std::ostream& out) {
  if (o.method.empty()) throw UsageError("--method is required");
  if (o.steps < 1) throw DomainError("--steps must be positive");
  if (!(o.h > 0)) throw DomainError("--h must be positive");
  const LGMethod m = method_for(o.method);
  const LGProblem p = problem_for(parse_action_kind(o.action), o.f);
  if (!o.invariant.empty() && o.invariant != "norm" && o.invariant != "spectrum")
    throw UsageError("--check-invariant expects norm or spectrum");
  if (o.invariant == "spectrum" && p.action.kind != ActionKind::isospectral)
    throw DomainError("spectrum drift needs the isospectral action");

  std::ostringstream csv;
  csv << "step,t";
  for (Eigen::Index i = 1; i <= p.y0.size(); ++i) csv << ",y" << i;
  if (!o.invariant.empty()) csv << ',' << o.invariant << "_drift";
  csv << '\n';
  const double norm0 = p.y0.norm();
  const std::vector<double> eig0 = o.invariant == "spectrum" ? sorted_eigenvalues(p.y0) : std::vector<double>{};
  Mat y = p.y0;
  for (int k = 1; k <= o.steps; ++k) {
    const double t = (k - 1) * o.h;
    try {
      y = lg_step(m, p, t, y, o.h);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("step " + std::to_string(k) + ": " + e.what(), e.residual);
    }
    csv << k << ',' << format_double(k * o.h) << state_csv(y);
    if (o.invariant == "norm") csv << ',' << format_double(std::abs(y.norm() - norm0));
    if (o.invariant == "spectrum") {
      const auto eig = sorted_eigenvalues(y);
      double d = 0;
      for (std::size_t i = 0; i < eig.size(); ++i) d = std::max(d, std::abs(eig[i] - eig0[i]));
      csv << ',' << format_double(d);
    }
    csv << '\n';
  }
  write_output(o.output, csv.str(), out);
}

void cmd_converge(const Options& o, std::ostream& out) {
  if (o.method.empty()) throw UsageError("--method is required");
  const LGMethod m = method_for(o.method);
  const LGProblem p = problem_for(parse_action_kind(o.action), o.f);
  write_output(o.output, to_csv(convergence_order(m, p, o.t_end, parse_steps(o.hs))), out);
}

}  // namespace

std::string format_tensor_sum(const LinComb<Tensor<Forest>>& x) { return tensor_lines(x); }
std::string format_tensor_sum(const LinComb<Tensor<PlanarForest>>& x) { return tensor_lines(x); }
std::string format_tensor_sum(const LinComb<Tensor<BellWord>>& x) { return tensor_lines(x); }

std::string format_tree_values(const BCoeff& a, int N) {
  std::string s;
  for (int k = 1; k <= N; ++k)
    for (const auto& t : enumerate_trees(k)) s += t.str() + '\t' + to_string(a(t)) + '\n';
  return s;
}

std::string format_forest_values(const LBCoeff& a, int N) {
  std::string s;
  for (int k = 1; k <= N; ++k)
    for (const auto& w : enumerate_planar_forests(k)) s += w.str() + '\t' + to_string(a(w)) + '\n';
  return s;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"B-series and LB-series toolkit"};
  app.require_subcommand(1);
  Options o;

  auto order_opt = [&](CLI::App* c) { c->add_option("-N", o.N, "truncation order")->check(CLI::NonNegativeNumber); };
  auto method_opts = [&](CLI::App* c) {
    c->add_option("--builtin", o.builtin, "euler, explicit_midpoint, implicit_midpoint, rk4");
    c->add_option("--tableau", o.tableau, "tableau file");
  };

  auto* trees = app.add_subcommand("trees", "list trees of order 1..N with symmetry and factorial");
  order_opt(trees);
  trees->add_flag("--planar", o.planar, "planar trees");

  auto* coproduct = app.add_subcommand("coproduct", "coproduct of one element or a whole table");
  coproduct->add_option("algebra", o.algebra, "bck, cefm, mkw or fdb")->required();
  coproduct->add_option("input", o.input, "element in the bracket grammar (fdb: d1.d2)");
  coproduct->add_option("--table", o.table, "all basis elements up to this order")->check(CLI::NonNegativeNumber);

  auto* compose = app.add_subcommand("compose", "B-series of the composed map (first, then second)");
  order_opt(compose);
  compose->add_option("--first", o.first, "builtin name or tableau file")->required();
  compose->add_option("--second", o.second, "builtin name or tableau file")->required();

  auto* substitute = app.add_subcommand("substitute", "substitution law");
  order_opt(substitute);
  substitute->add_option("--a", o.a_file, "infinitesimal coefficients (TSV)");
  substitute->add_option("--b", o.b_spec, "coefficients (TSV), builtin name or tableau file");
  substitute->add_option("--b-kind", o.b_kind, "character, infinitesimal or plain");
  substitute->add_flag("--planar", o.planar, "planar forests and the LB substitution");

  auto* modified = app.add_subcommand("modified", "modified-equation coefficients");
  order_opt(modified);
  method_opts(modified);
  modified->add_option("--mode", o.mode, "backward_error or modifying_integrator");

  auto* order = app.add_subcommand("order", "order of a Runge-Kutta method");
  order_opt(order);
  method_opts(order);

  auto* geometric = app.add_subcommand("geometric", "symplectic or Hamiltonian conditions");
  order_opt(geometric);
  method_opts(geometric);
  geometric->add_option("--kind", o.kind, "symplectic or hamiltonian");
  geometric->add_option("--mode", o.mode, "modified field used for the hamiltonian check");
  geometric->add_option("--coeffs", o.coeffs, "coefficients (TSV) instead of a method");

  auto* series = app.add_subcommand("series", "B-series or LB-series coefficients of a method");
  order_opt(series);
  method_opts(series);
  series->add_option("--method", o.method, "exponential_euler, lie_implicit_midpoint or exact");
  series->add_option("--rep", o.rep, "type1, type3 or generator");

  auto lg_opts = [&](CLI::App* c) {
    // --h is the step size, so help is long-form only here
    c->set_help_flag("--help", "print this help message and exit");
    c->add_option("--method", o.method, "Lie group method or classical tableau name")->required();
    c->add_option("--action", o.action, "rotation, isospectral, affine or translation");
    c->add_option("--f", o.f, "vector field (free_rigid_body, toda, affine, linear)");
    c->add_option("--output", o.output, "write CSV to this file");
  };
  auto* integrate = app.add_subcommand("integrate", "trajectory as CSV");
  lg_opts(integrate);
  integrate->add_option("--steps", o.steps, "number of steps");
  integrate->add_option("--h", o.h, "step size");
  integrate->add_option("--check-invariant", o.invariant, "norm or spectrum");

  auto* converge = app.add_subcommand("converge", "convergence order as CSV");
  lg_opts(converge);
  converge->add_option("--h", o.hs, "comma-separated step sizes");
  converge->add_option("--t-end", o.t_end, "final time");

  std::vector<const char*> argv{"bf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    if (const char* cap = std::getenv("BF_MAX_ORDER")) {
      try {
        std::size_t used = 0;
        const int v = std::stoi(cap, &used);
        if (cap[used] != '\0') throw std::invalid_argument(cap);
        set_max_order(v);
      } catch (const std::logic_error&) {
        throw UsageError(std::string("invalid BF_MAX_ORDER '") + cap + "'");
      }
    }
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (*trees) cmd_trees(o, out);
    if (*coproduct) cmd_coproduct(o, out);
    if (*compose) cmd_compose(o, out);
    if (*substitute) cmd_substitute(o, out);
    if (*modified) cmd_modified(o, out);
    if (*order) cmd_order(o, out);
    if (*geometric) cmd_geometric(o, out);
    if (*series) cmd_series(o, out);
    if (*integrate) cmd_integrate(o, out);
    if (*converge) cmd_converge(o, out);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace bseries::cli
