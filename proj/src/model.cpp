#include "reachverify/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "reachverify/circuits.hpp"

namespace reachverify {

// ---------------------------------------------------------------------------
// Affine inequalities
// ---------------------------------------------------------------------------

double AffineIneq::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  double v = 0.0;
  if (state_coef.size()) v += state_coef.dot(x.head(state_coef.size()));
  if (input_coef.size() && u.size()) v += input_coef.dot(u.head(input_coef.size()));
  return v;
}

bool AffineIneq::holds(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       double tol) const {
  return eval(x, u) <= bound + tol;
}

Interval AffineIneq::range(const Box& state_box, const Box& input_box) const {
  Interval acc = Interval::point(0.0);
  for (Eigen::Index i = 0; i < state_coef.size(); ++i) {
    if (state_coef[i] == 0.0) continue;
    acc = acc + Interval::point(state_coef[i]) * state_box.at(static_cast<size_t>(i));
  }
  for (Eigen::Index i = 0; i < input_coef.size(); ++i) {
    if (input_coef[i] == 0.0) continue;
    acc = acc + Interval::point(input_coef[i]) * input_box.at(static_cast<size_t>(i));
  }
  return acc;
}

bool predicate_holds(const Predicate& p, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, double tol) {
  for (const auto& ineq : p) {
    if (!ineq.holds(x, u, tol)) return false;
  }
  return true;
}

namespace {

// Feasibility of {z : rows . z <= rhs} intersected with a box, decided by
// vertex enumeration: a nonempty intersection is a compact polytope, so it
// has a vertex where d constraints (from the inequality rows and the box
// facets) are active.
bool polytope_box_feasible(const std::vector<Eigen::VectorXd>& rows,
                           const std::vector<double>& rhs, const Box& box) {
  const int d = static_cast<int>(box.size());
  const int k = static_cast<int>(rows.size());

  double scale = 1.0;
  for (int j = 0; j < k; ++j) scale = std::max(scale, std::fabs(rhs[j]));
  for (const auto& iv : box) scale = std::max(scale, iv.mag());
  const double tol = 1e-9 * scale;

  auto feasible_point = [&](const Eigen::VectorXd& z) {
    for (int i = 0; i < d; ++i) {
      if (z[i] < box[static_cast<size_t>(i)].lo - tol ||
          z[i] > box[static_cast<size_t>(i)].hi + tol) {
        return false;
      }
    }
    for (int j = 0; j < k; ++j) {
      if (rows[j].dot(z) > rhs[j] + tol) return false;
    }
    return true;
  };

  // Cheap candidates first: center, then corners.
  Eigen::VectorXd center(d);
  for (int i = 0; i < d; ++i) center[i] = box[static_cast<size_t>(i)].mid();
  if (feasible_point(center)) return true;
  if (d <= 12) {
    for (unsigned long mask = 0; mask < (1ul << d); ++mask) {
      Eigen::VectorXd corner(d);
      for (int i = 0; i < d; ++i) {
        corner[i] = (mask >> i) & 1 ? box[static_cast<size_t>(i)].hi
                                    : box[static_cast<size_t>(i)].lo;
      }
      if (feasible_point(corner)) return true;
    }
  }

  // Full vertex enumeration over all constraints (rows + box facets).
  std::vector<Eigen::VectorXd> all_rows = rows;
  std::vector<double> all_rhs = rhs;
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd fhi = Eigen::VectorXd::Zero(d);
    fhi[i] = 1.0;
    all_rows.push_back(fhi);
    all_rhs.push_back(box[static_cast<size_t>(i)].hi);
    Eigen::VectorXd flo = Eigen::VectorXd::Zero(d);
    flo[i] = -1.0;
    all_rows.push_back(flo);
    all_rhs.push_back(-box[static_cast<size_t>(i)].lo);
  }
  const int total = static_cast<int>(all_rows.size());

  std::vector<int> combo(static_cast<size_t>(d));
  std::function<bool(int, int)> recurse = [&](int start, int chosen) -> bool {
    if (chosen == d) {
      Eigen::MatrixXd a(d, d);
      Eigen::VectorXd b(d);
      for (int i = 0; i < d; ++i) {
        a.row(i) = all_rows[static_cast<size_t>(combo[static_cast<size_t>(i)])];
        b[i] = all_rhs[static_cast<size_t>(combo[static_cast<size_t>(i)])];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (!lu.isInvertible()) return false;
      return feasible_point(lu.solve(b));
    }
    for (int i = start; i <= total - (d - chosen); ++i) {
      combo[static_cast<size_t>(chosen)] = i;
      if (recurse(i + 1, chosen + 1)) return true;
    }
    return false;
  };
  return d == 0 ? k == 0 : recurse(0, 0);
}

}  // namespace

SetRelation classify_box(const Box& state_box, const Box& input_box,
                         const Predicate& p) {
  if (p.empty()) return SetRelation::kContained;
  bool all_inside = true;
  for (const auto& ineq : p) {
    const Interval r = ineq.range(state_box, input_box);
    if (r.lo > ineq.bound) return SetRelation::kDisjoint;
    if (r.hi > ineq.bound) all_inside = false;
  }
  if (all_inside) return SetRelation::kContained;

  // Joint space: state coordinates then input coordinates.
  const int n = static_cast<int>(state_box.size());
  const int m = static_cast<int>(input_box.size());
  Box joint = state_box;
  joint.insert(joint.end(), input_box.begin(), input_box.end());
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (const auto& ineq : p) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n + m);
    for (Eigen::Index i = 0; i < ineq.state_coef.size() && i < n; ++i) {
      row[i] = ineq.state_coef[i];
    }
    for (Eigen::Index i = 0; i < ineq.input_coef.size() && i < m; ++i) {
      row[n + i] = ineq.input_coef[i];
    }
    rows.push_back(row);
    rhs.push_back(ineq.bound);
  }
  return polytope_box_feasible(rows, rhs, joint) ? SetRelation::kOverlapping
                                                 : SetRelation::kDisjoint;
}

SetRelation check_unsafe_intersection(const Box& box, const Predicate& unsafe) {
  return classify_box(box, {}, unsafe);
}

// ---------------------------------------------------------------------------
// Affine extraction
// ---------------------------------------------------------------------------

namespace {

struct AffineForm {
  Eigen::VectorXd sc;
  Eigen::VectorXd ic;
  double c = 0.0;
};

bool is_var_free(const Expr::Ptr& e) {
  return max_state_index(e) < 0 && max_input_index(e) < 0;
}

double eval_closed(const Expr::Ptr& e) {
  static const Valuation kEmpty{Eigen::VectorXd(), Eigen::VectorXd()};
  return eval_point(e, kEmpty);
}

AffineForm to_affine(const Expr::Ptr& e, int n, int m) {
  AffineForm f;
  f.sc = Eigen::VectorXd::Zero(n);
  f.ic = Eigen::VectorXd::Zero(m);
  switch (e->kind) {
    case ExprKind::kConstant:
      f.c = e->value;
      return f;
    case ExprKind::kStateVar:
      f.sc[e->index] = 1.0;
      return f;
    case ExprKind::kInputVar:
      f.ic[e->index] = 1.0;
      return f;
    case ExprKind::kAdd: {
      AffineForm a = to_affine(e->a, n, m), b = to_affine(e->b, n, m);
      a.sc += b.sc;
      a.ic += b.ic;
      a.c += b.c;
      return a;
    }
    case ExprKind::kSub: {
      AffineForm a = to_affine(e->a, n, m), b = to_affine(e->b, n, m);
      a.sc -= b.sc;
      a.ic -= b.ic;
      a.c -= b.c;
      return a;
    }
    case ExprKind::kNeg: {
      AffineForm a = to_affine(e->a, n, m);
      a.sc = -a.sc;
      a.ic = -a.ic;
      a.c = -a.c;
      return a;
    }
    case ExprKind::kMul: {
      if (is_var_free(e->a)) {
        AffineForm b = to_affine(e->b, n, m);
        const double s = eval_closed(e->a);
        b.sc *= s;
        b.ic *= s;
        b.c *= s;
        return b;
      }
      if (is_var_free(e->b)) {
        AffineForm a = to_affine(e->a, n, m);
        const double s = eval_closed(e->b);
        a.sc *= s;
        a.ic *= s;
        a.c *= s;
        return a;
      }
      throw ModelError("predicate is not affine (product of variables)");
    }
    case ExprKind::kDiv: {
      if (!is_var_free(e->b)) {
        throw ModelError("predicate is not affine (variable denominator)");
      }
      const double s = eval_closed(e->b);
      if (s == 0.0) throw ModelError("division by zero in predicate");
      AffineForm a = to_affine(e->a, n, m);
      a.sc /= s;
      a.ic /= s;
      a.c /= s;
      return a;
    }
    default:
      if (is_var_free(e)) {
        f.c = eval_closed(e);
        return f;
      }
      throw ModelError("predicate is not affine (nonlinear term)");
  }
}

}  // namespace

AffineIneq parse_affine_ineq(const std::string& text,
                             const std::vector<std::string>& state_names,
                             const std::vector<std::string>& input_names) {
  // Find the comparison operator; strict forms denote closed sets.
  size_t op_pos = std::string::npos;
  int op_len = 0;
  bool geq = false;
  for (size_t i = 0; i + 1 <= text.size(); ++i) {
    if (text[i] == '<' || text[i] == '>') {
      op_pos = i;
      geq = text[i] == '>';
      op_len = (i + 1 < text.size() && text[i + 1] == '=') ? 2 : 1;
      break;
    }
  }
  if (op_pos == std::string::npos) {
    throw ModelError("expected an inequality in '" + text + "'");
  }
  const std::string lhs = text.substr(0, op_pos);
  const std::string rhs = text.substr(op_pos + static_cast<size_t>(op_len));
  const int n = static_cast<int>(state_names.size());
  const int m = static_cast<int>(input_names.size());
  AffineForm l, r;
  try {
    l = to_affine(parse_expr(lhs, state_names, input_names), n, m);
    r = to_affine(parse_expr(rhs, state_names, input_names), n, m);
  } catch (const ParseError& pe) {
    throw ModelError("bad predicate '" + text + "': " + pe.what());
  }
  AffineIneq out;
  out.state_coef = l.sc - r.sc;
  out.input_coef = l.ic - r.ic;
  out.bound = r.c - l.c;
  if (geq) {
    out.state_coef = -out.state_coef;
    out.input_coef = -out.input_coef;
    out.bound = -out.bound;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Automata
// ---------------------------------------------------------------------------

int HybridAutomaton::mode_index(const std::string& name) const {
  for (size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int HybridAutomaton::initial_mode_for(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u, double tol) const {
  for (size_t i = 0; i < modes.size(); ++i) {
    if (predicate_holds(modes[i].invariant, x, u, tol)) return static_cast<int>(i);
  }
  return -1;
}

void HybridAutomaton::validate() const {
  if (modes.empty()) throw ModelError("automaton has no modes");
  if (static_cast<int>(state_names.size()) != n ||
      static_cast<int>(input_names.size()) != m) {
    throw ModelError("variable name lists do not match dimensions");
  }
  for (const auto& mode : modes) {
    if (static_cast<int>(mode.field.size()) != n) {
      throw ModelError("mode '" + mode.name + "' has " +
                       std::to_string(mode.field.size()) + " field components, expected " +
                       std::to_string(n));
    }
    for (const auto& comp : mode.field) {
      if (max_state_index(comp) >= n || max_input_index(comp) >= m) {
        throw ModelError("mode '" + mode.name + "' references a variable out of range");
      }
    }
  }
  for (const auto& t : transitions) {
    if (t.from < 0 || t.from >= static_cast<int>(modes.size()) || t.to < 0 ||
        t.to >= static_cast<int>(modes.size())) {
      throw ModelError("transition endpoint out of range");
    }
    if (t.from == t.to) throw ModelError("self-loop transition");
  }
}

void VerificationProblem::validate() const {
  plant.validate();
  if (static_cast<int>(theta.size()) != plant.n) {
    throw ModelError("initial set dimension mismatch");
  }
  if (theta.empty()) throw ModelError("empty initial set");
  if (!(horizon > 0.0)) throw ModelError("time horizon must be positive");
  if (!(eps0 > 0.0) || !(tau0 > 0.0)) {
    throw ModelError("eps0 and tau0 must be positive");
  }
  if (input) {
    if (input->automaton.m != 0) {
      throw ModelError("input automaton must be autonomous");
    }
    input->automaton.validate();
    if (static_cast<int>(input->output_indices.size()) != plant.m) {
      throw ModelError("input automaton output dimension mismatch");
    }
    for (int idx : input->output_indices) {
      if (idx < 0 || idx >= input->automaton.n) {
        throw ModelError("input output index out of range");
      }
    }
    if (input->initial_state.size() != input->automaton.n) {
      throw ModelError("input initial state dimension mismatch");
    }
  } else if (plant.m != 0) {
    throw ModelError("plant expects inputs but none are defined");
  }
  for (const auto& ineq : unsafe) {
    if (ineq.input_coef.size() && ineq.input_coef.norm() != 0.0) {
      throw ModelError("unsafe set must be over state variables only");
    }
  }
}

int VerificationProblem::resolve_initial_mode(const Eigen::VectorXd& x0) const {
  if (initial_mode >= 0) return initial_mode;
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(plant.m);
  if (input) {
    for (int j = 0; j < plant.m; ++j) {
      u0[j] = input->initial_state[input->output_indices[static_cast<size_t>(j)]];
    }
  }
  const int mode = plant.initial_mode_for(x0, u0);
  if (mode < 0) {
    throw ModelError("no mode invariant holds at the initial state");
  }
  return mode;
}

// ---------------------------------------------------------------------------
// Substitution and composition
// ---------------------------------------------------------------------------

Expr::Ptr substitute_inputs(const Expr::Ptr& e,
                            const std::vector<Expr::Ptr>& replacements) {
  switch (e->kind) {
    case ExprKind::kConstant:
    case ExprKind::kStateVar:
      return e;
    case ExprKind::kInputVar:
      return replacements.at(static_cast<size_t>(e->index));
    case ExprKind::kAdd:
      return Expr::add(substitute_inputs(e->a, replacements),
                       substitute_inputs(e->b, replacements));
    case ExprKind::kSub:
      return Expr::sub(substitute_inputs(e->a, replacements),
                       substitute_inputs(e->b, replacements));
    case ExprKind::kMul:
      return Expr::mul(substitute_inputs(e->a, replacements),
                       substitute_inputs(e->b, replacements));
    case ExprKind::kDiv:
      return Expr::div(substitute_inputs(e->a, replacements),
                       substitute_inputs(e->b, replacements));
    case ExprKind::kPow:
      return Expr::pow(substitute_inputs(e->a, replacements), e->exponent);
    case ExprKind::kExp:
      return Expr::exp(substitute_inputs(e->a, replacements));
    case ExprKind::kLog:
      return Expr::log(substitute_inputs(e->a, replacements));
    case ExprKind::kNeg:
      return Expr::neg(substitute_inputs(e->a, replacements));
  }
  throw std::logic_error("unreachable expression kind");
}

Expr::Ptr shift_state_vars(const Expr::Ptr& e, int offset) {
  switch (e->kind) {
    case ExprKind::kConstant:
    case ExprKind::kInputVar:
      return e;
    case ExprKind::kStateVar:
      return Expr::state_var(e->index + offset);
    case ExprKind::kAdd:
      return Expr::add(shift_state_vars(e->a, offset), shift_state_vars(e->b, offset));
    case ExprKind::kSub:
      return Expr::sub(shift_state_vars(e->a, offset), shift_state_vars(e->b, offset));
    case ExprKind::kMul:
      return Expr::mul(shift_state_vars(e->a, offset), shift_state_vars(e->b, offset));
    case ExprKind::kDiv:
      return Expr::div(shift_state_vars(e->a, offset), shift_state_vars(e->b, offset));
    case ExprKind::kPow:
      return Expr::pow(shift_state_vars(e->a, offset), e->exponent);
    case ExprKind::kExp:
      return Expr::exp(shift_state_vars(e->a, offset));
    case ExprKind::kLog:
      return Expr::log(shift_state_vars(e->a, offset));
    case ExprKind::kNeg:
      return Expr::neg(shift_state_vars(e->a, offset));
  }
  throw std::logic_error("unreachable expression kind");
}

namespace {

// Plant predicate in the joint space: input references become state
// references at the input automaton's offset.
AffineIneq lift_plant_ineq(const AffineIneq& ineq, int plant_n, int aut_n,
                           const std::vector<int>& output_indices) {
  AffineIneq out;
  out.state_coef = Eigen::VectorXd::Zero(plant_n + aut_n);
  out.input_coef = Eigen::VectorXd();
  out.bound = ineq.bound;
  for (Eigen::Index i = 0; i < ineq.state_coef.size(); ++i) {
    out.state_coef[i] = ineq.state_coef[i];
  }
  for (Eigen::Index j = 0; j < ineq.input_coef.size(); ++j) {
    if (ineq.input_coef[j] != 0.0) {
      out.state_coef[plant_n + output_indices[static_cast<size_t>(j)]] +=
          ineq.input_coef[j];
    }
  }
  return out;
}

AffineIneq lift_input_ineq(const AffineIneq& ineq, int plant_n, int aut_n) {
  AffineIneq out;
  out.state_coef = Eigen::VectorXd::Zero(plant_n + aut_n);
  out.input_coef = Eigen::VectorXd();
  out.bound = ineq.bound;
  for (Eigen::Index i = 0; i < ineq.state_coef.size(); ++i) {
    out.state_coef[plant_n + i] = ineq.state_coef[i];
  }
  return out;
}

}  // namespace

HybridAutomaton compose(const HybridAutomaton& plant,
                        const InputSignalAutomaton& input) {
  if (static_cast<int>(input.output_indices.size()) != plant.m) {
    throw ModelError("compose: input automaton provides " +
                     std::to_string(input.output_indices.size()) +
                     " outputs, plant expects " + std::to_string(plant.m));
  }
  const HybridAutomaton& aut = input.automaton;
  HybridAutomaton out;
  out.n = plant.n + aut.n;
  out.m = 0;
  out.state_names = plant.state_names;
  for (const auto& nm : aut.state_names) out.state_names.push_back("in_" + nm);

  std::vector<Expr::Ptr> input_replacements;
  for (int j = 0; j < plant.m; ++j) {
    input_replacements.push_back(
        Expr::state_var(plant.n + input.output_indices[static_cast<size_t>(j)]));
  }

  // Mode (i, j) is stored at index i * |aut modes| + j.
  for (const auto& pm : plant.modes) {
    for (const auto& am : aut.modes) {
      ContinuousMode mode;
      mode.name = pm.name + "|" + am.name;
      for (const auto& comp : pm.field) {
        mode.field.push_back(substitute_inputs(comp, input_replacements));
      }
      for (const auto& comp : am.field) {
        mode.field.push_back(shift_state_vars(comp, plant.n));
      }
      for (const auto& ineq : pm.invariant) {
        mode.invariant.push_back(
            lift_plant_ineq(ineq, plant.n, aut.n, input.output_indices));
      }
      for (const auto& ineq : am.invariant) {
        mode.invariant.push_back(lift_input_ineq(ineq, plant.n, aut.n));
      }
      out.modes.push_back(std::move(mode));
    }
  }

  const int na = static_cast<int>(aut.modes.size());
  for (const auto& pt : plant.transitions) {
    for (int j = 0; j < na; ++j) {
      Transition t;
      t.from = pt.from * na + j;
      t.to = pt.to * na + j;
      for (const auto& ineq : pt.guard) {
        t.guard.push_back(lift_plant_ineq(ineq, plant.n, aut.n, input.output_indices));
      }
      out.transitions.push_back(std::move(t));
    }
  }
  for (const auto& at : aut.transitions) {
    for (size_t i = 0; i < plant.modes.size(); ++i) {
      Transition t;
      t.from = static_cast<int>(i) * na + at.from;
      t.to = static_cast<int>(i) * na + at.to;
      for (const auto& ineq : at.guard) {
        t.guard.push_back(lift_input_ineq(ineq, plant.n, aut.n));
      }
      out.transitions.push_back(std::move(t));
    }
  }
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Model file loader
// ---------------------------------------------------------------------------

namespace {

struct Line {
  int number;
  std::string text;
};

[[noreturn]] void fail_at(const std::string& origin, int line, const std::string& why) {
  throw ModelError(origin + ":" + std::to_string(line) + ": " + why);
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& origin, int line, const std::string& s) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (trim(s.substr(used)).empty()) return v;
  } catch (...) {
  }
  fail_at(origin, line, "expected a number, got '" + s + "'");
}

// "key = value" split; returns false if no '=' present.
bool split_kv(const std::string& s, std::string* key, std::string* value) {
  const size_t eq = s.find('=');
  if (eq == std::string::npos) return false;
  *key = trim(s.substr(0, eq));
  *value = trim(s.substr(eq + 1));
  return true;
}

struct SectionBlock {
  std::string header;  // inside the brackets
  int line;
  std::vector<Line> lines;
};

std::vector<SectionBlock> split_sections(const std::string& text,
                                         const std::string& origin) {
  std::vector<SectionBlock> blocks;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail_at(origin, lineno, "unterminated section header");
      blocks.push_back({trim(s.substr(1, s.size() - 2)), lineno, {}});
    } else {
      if (blocks.empty()) fail_at(origin, lineno, "content before any section");
      blocks.back().lines.push_back({lineno, s});
    }
  }
  return blocks;
}

struct TransitionText {
  std::string from, to;
  std::vector<std::string> guards;
  int line;
};

Transition resolve_transition(const TransitionText& t, const HybridAutomaton& a,
                              const std::string& origin) {
  Transition out;
  out.from = a.mode_index(t.from);
  out.to = a.mode_index(t.to);
  if (out.from < 0) fail_at(origin, t.line, "unknown mode '" + t.from + "'");
  if (out.to < 0) fail_at(origin, t.line, "unknown mode '" + t.to + "'");
  for (const auto& g : t.guards) {
    try {
      out.guard.push_back(parse_affine_ineq(g, a.state_names, a.input_names));
    } catch (const ModelError& e) {
      fail_at(origin, t.line, e.what());
    }
  }
  return out;
}

}  // namespace

VerificationProblem load_problem_from_text(const std::string& text,
                                           const std::string& origin) {
  VerificationProblem p;
  p.name = origin;
  auto blocks = split_sections(text, origin);

  // Pass 1: dimensions (needed to parse everything else).
  for (const auto& b : blocks) {
    if (b.header != "dimensions") continue;
    for (const auto& ln : b.lines) {
      auto toks = split_ws(ln.text);
      if (toks.empty()) continue;
      if (toks[0] == "state") {
        p.plant.state_names.assign(toks.begin() + 1, toks.end());
      } else if (toks[0] == "input") {
        p.plant.input_names.assign(toks.begin() + 1, toks.end());
      } else {
        fail_at(origin, ln.number, "expected 'state' or 'input'");
      }
    }
  }
  p.plant.n = static_cast<int>(p.plant.state_names.size());
  p.plant.m = static_cast<int>(p.plant.input_names.size());
  if (p.plant.n == 0) throw ModelError(origin + ": no state variables declared");

  std::vector<TransitionText> plant_transitions;
  std::vector<TransitionText> input_transitions;

  // Inline input automaton scaffolding.
  HybridAutomaton input_aut;
  bool has_inline_input = false;
  bool has_builtin_input = false;
  std::string builtin_name;
  std::map<std::string, double> input_params;
  Eigen::VectorXd input_init;
  std::string input_start_mode;
  std::string initial_mode_name;

  for (const auto& b : blocks) {
    auto toks = split_ws(b.header);
    if (b.header == "dimensions") {
      continue;
    } else if (toks.size() == 2 && toks[0] == "mode") {
      ContinuousMode mode;
      mode.name = toks[1];
      std::map<std::string, Expr::Ptr> fields;
      for (const auto& ln : b.lines) {
        if (ln.text.rfind("d/dt", 0) == 0) {
          std::string rest = trim(ln.text.substr(4));
          std::string var, expr_text;
          if (!split_kv(rest, &var, &expr_text)) {
            fail_at(origin, ln.number, "expected 'd/dt <var> = <expr>'");
          }
          try {
            fields[var] = parse_expr(expr_text, p.plant.state_names,
                                     p.plant.input_names);
          } catch (const ParseError& e) {
            fail_at(origin, ln.number, e.what());
          }
        } else if (ln.text.rfind("invariant:", 0) == 0) {
          try {
            mode.invariant.push_back(parse_affine_ineq(
                trim(ln.text.substr(10)), p.plant.state_names, p.plant.input_names));
          } catch (const ModelError& e) {
            fail_at(origin, ln.number, e.what());
          }
        } else {
          fail_at(origin, ln.number, "expected 'd/dt' or 'invariant:' line");
        }
      }
      for (const auto& name : p.plant.state_names) {
        auto it = fields.find(name);
        if (it == fields.end()) {
          fail_at(origin, b.line, "mode '" + mode.name + "' missing d/dt " + name);
        }
        mode.field.push_back(it->second);
      }
      if (fields.size() != p.plant.state_names.size()) {
        fail_at(origin, b.line, "mode '" + mode.name + "' defines an unknown variable");
      }
      p.plant.modes.push_back(std::move(mode));
    } else if (b.header == "transition") {
      TransitionText t;
      t.line = b.line;
      for (const auto& ln : b.lines) {
        std::string key, value;
        if (ln.text.rfind("guard:", 0) == 0) {
          t.guards.push_back(trim(ln.text.substr(6)));
        } else if (split_kv(ln.text, &key, &value) ||
                   (key = ln.text.substr(0, ln.text.find(':')),
                    value = trim(ln.text.substr(ln.text.find(':') + 1)), true)) {
          key = trim(key);
          if (key == "from") {
            t.from = value;
          } else if (key == "to") {
            t.to = value;
          } else {
            fail_at(origin, ln.number, "expected from/to/guard");
          }
        }
      }
      plant_transitions.push_back(std::move(t));
    } else if (b.header == "input") {
      for (const auto& ln : b.lines) {
        auto ltoks = split_ws(ln.text);
        std::string key, value;
        if (ln.text.rfind("builtin:", 0) == 0) {
          has_builtin_input = true;
          builtin_name = trim(ln.text.substr(8));
        } else if (ln.text.rfind("vars:", 0) == 0) {
          has_inline_input = true;
          auto names = split_ws(trim(ln.text.substr(5)));
          input_aut.state_names = names;
          input_aut.n = static_cast<int>(names.size());
          input_aut.m = 0;
        } else if (ln.text.rfind("init:", 0) == 0) {
          auto vals = split_ws(trim(ln.text.substr(5)));
          input_init.resize(static_cast<Eigen::Index>(vals.size()));
          for (size_t i = 0; i < vals.size(); ++i) {
            input_init[static_cast<Eigen::Index>(i)] =
                parse_number(origin, ln.number, vals[i]);
          }
        } else if (ln.text.rfind("start:", 0) == 0) {
          input_start_mode = trim(ln.text.substr(6));
        } else if (split_kv(ln.text, &key, &value)) {
          input_params[key] = parse_number(origin, ln.number, value);
        } else {
          fail_at(origin, ln.number, "unrecognized input line");
        }
        (void)ltoks;
      }
    } else if (toks.size() == 3 && toks[0] == "input" && toks[1] == "mode") {
      has_inline_input = true;
      ContinuousMode mode;
      mode.name = toks[2];
      std::map<std::string, Expr::Ptr> fields;
      for (const auto& ln : b.lines) {
        if (ln.text.rfind("d/dt", 0) == 0) {
          std::string rest = trim(ln.text.substr(4));
          std::string var, expr_text;
          if (!split_kv(rest, &var, &expr_text)) {
            fail_at(origin, ln.number, "expected 'd/dt <var> = <expr>'");
          }
          try {
            fields[var] = parse_expr(expr_text, input_aut.state_names, {});
          } catch (const ParseError& e) {
            fail_at(origin, ln.number, e.what());
          }
        } else if (ln.text.rfind("invariant:", 0) == 0) {
          try {
            mode.invariant.push_back(
                parse_affine_ineq(trim(ln.text.substr(10)), input_aut.state_names, {}));
          } catch (const ModelError& e) {
            fail_at(origin, ln.number, e.what());
          }
        } else {
          fail_at(origin, ln.number, "expected 'd/dt' or 'invariant:' line");
        }
      }
      for (const auto& name : input_aut.state_names) {
        auto it = fields.find(name);
        if (it == fields.end()) {
          fail_at(origin, b.line, "input mode '" + mode.name + "' missing d/dt " + name);
        }
        mode.field.push_back(it->second);
      }
      input_aut.modes.push_back(std::move(mode));
    } else if (b.header == "input transition") {
      TransitionText t;
      t.line = b.line;
      for (const auto& ln : b.lines) {
        if (ln.text.rfind("guard:", 0) == 0) {
          t.guards.push_back(trim(ln.text.substr(6)));
        } else {
          const size_t colon = ln.text.find(':');
          if (colon == std::string::npos) fail_at(origin, ln.number, "expected key: value");
          const std::string key = trim(ln.text.substr(0, colon));
          const std::string value = trim(ln.text.substr(colon + 1));
          if (key == "from") {
            t.from = value;
          } else if (key == "to") {
            t.to = value;
          } else {
            fail_at(origin, ln.number, "expected from/to/guard");
          }
        }
      }
      input_transitions.push_back(std::move(t));
    } else if (b.header == "initial") {
      p.theta.assign(static_cast<size_t>(p.plant.n), Interval::point(0.0));
      std::vector<bool> seen(static_cast<size_t>(p.plant.n), false);
      for (const auto& ln : b.lines) {
        std::string key, value;
        const size_t colon = ln.text.find(':');
        if (ln.text.rfind("mode:", 0) == 0) {
          initial_mode_name = trim(ln.text.substr(5));
          continue;
        }
        if (!split_kv(ln.text, &key, &value)) {
          fail_at(origin, ln.number, "expected '<var> = [lo, hi]'");
        }
        int idx = -1;
        for (size_t i = 0; i < p.plant.state_names.size(); ++i) {
          if (p.plant.state_names[i] == key) idx = static_cast<int>(i);
        }
        if (idx < 0) fail_at(origin, ln.number, "unknown state variable '" + key + "'");
        if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
          fail_at(origin, ln.number, "expected an interval [lo, hi]");
        }
        const std::string inner = value.substr(1, value.size() - 2);
        const size_t comma = inner.find(',');
        if (comma == std::string::npos) fail_at(origin, ln.number, "expected 'lo, hi'");
        const double lo = parse_number(origin, ln.number, trim(inner.substr(0, comma)));
        const double hi = parse_number(origin, ln.number, trim(inner.substr(comma + 1)));
        if (lo > hi) fail_at(origin, ln.number, "empty interval");
        p.theta[static_cast<size_t>(idx)] = Interval(lo, hi);
        seen[static_cast<size_t>(idx)] = true;
        (void)colon;
      }
      for (size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) {
          fail_at(origin, b.line,
                  "initial interval missing for '" + p.plant.state_names[i] + "'");
        }
      }
    } else if (b.header == "unsafe") {
      for (const auto& ln : b.lines) {
        try {
          p.unsafe.push_back(parse_affine_ineq(ln.text, p.plant.state_names, {}));
        } catch (const ModelError& e) {
          fail_at(origin, ln.number, e.what());
        }
      }
    } else if (b.header == "horizon") {
      if (b.lines.size() != 1) fail_at(origin, b.line, "horizon takes one number");
      p.horizon = parse_number(origin, b.lines[0].number, b.lines[0].text);
    } else if (b.header == "params") {
      for (const auto& ln : b.lines) {
        std::string key, value;
        if (!split_kv(ln.text, &key, &value)) {
          fail_at(origin, ln.number, "expected 'key = value'");
        }
        const double v = parse_number(origin, ln.number, value);
        if (key == "eps0") {
          p.eps0 = v;
        } else if (key == "tau0") {
          p.tau0 = v;
        } else {
          fail_at(origin, ln.number, "unknown parameter '" + key + "'");
        }
      }
    } else {
      fail_at(origin, b.line, "unknown section [" + b.header + "]");
    }
  }

  for (const auto& t : plant_transitions) {
    p.plant.transitions.push_back(resolve_transition(t, p.plant, origin));
  }

  if (has_builtin_input) {
    if (builtin_name == "ramp") {
      p.input = circuits::make_ramp_input(input_params);
    } else if (builtin_name == "sig" || builtin_name == "sigmoid") {
      p.input = circuits::make_sig_input(input_params);
    } else {
      throw ModelError(origin + ": unknown builtin input '" + builtin_name + "'");
    }
  } else if (has_inline_input) {
    for (const auto& t : input_transitions) {
      input_aut.transitions.push_back(resolve_transition(t, input_aut, origin));
    }
    InputSignalAutomaton isa;
    isa.automaton = std::move(input_aut);
    // Outputs are the first m automaton variables, matching the plant's
    // declared input names positionally.
    for (int j = 0; j < p.plant.m; ++j) isa.output_indices.push_back(j);
    if (input_init.size() != isa.automaton.n) {
      throw ModelError(origin + ": input 'init:' line missing or wrong length");
    }
    isa.initial_state = input_init;
    isa.initial_mode = input_start_mode.empty()
                           ? 0
                           : isa.automaton.mode_index(input_start_mode);
    if (isa.initial_mode < 0) {
      throw ModelError(origin + ": unknown input start mode '" + input_start_mode + "'");
    }
    p.input = std::move(isa);
  }

  if (!initial_mode_name.empty()) {
    p.initial_mode = p.plant.mode_index(initial_mode_name);
    if (p.initial_mode < 0) {
      throw ModelError(origin + ": unknown initial mode '" + initial_mode_name + "'");
    }
  }

  p.validate();
  return p;
}

VerificationProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_problem_from_text(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Writer
// ---------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string ineq_to_text(const AffineIneq& ineq,
                         const std::vector<std::string>& state_names,
                         const std::vector<std::string>& input_names) {
  std::ostringstream out;
  bool first = true;
  auto emit = [&](double coef, const std::string& name) {
    if (coef == 0.0) return;
    if (!first) out << " + ";
    out << format_double(coef) << "*" << name;
    first = false;
  };
  for (Eigen::Index i = 0; i < ineq.state_coef.size(); ++i) {
    emit(ineq.state_coef[i], state_names[static_cast<size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < ineq.input_coef.size(); ++i) {
    emit(ineq.input_coef[i], input_names[static_cast<size_t>(i)]);
  }
  if (first) out << "0";
  out << " <= " << format_double(ineq.bound);
  return out.str();
}

}  // namespace

std::string problem_to_text(const VerificationProblem& p) {
  std::ostringstream out;
  out << "[dimensions]\nstate";
  for (const auto& nm : p.plant.state_names) out << " " << nm;
  out << "\n";
  if (p.plant.m > 0) {
    out << "input";
    for (const auto& nm : p.plant.input_names) out << " " << nm;
    out << "\n";
  }
  for (const auto& mode : p.plant.modes) {
    out << "\n[mode " << mode.name << "]\n";
    for (int i = 0; i < p.plant.n; ++i) {
      out << "d/dt " << p.plant.state_names[static_cast<size_t>(i)] << " = "
          << to_string(mode.field[static_cast<size_t>(i)], p.plant.state_names,
                       p.plant.input_names)
          << "\n";
    }
    for (const auto& ineq : mode.invariant) {
      out << "invariant: "
          << ineq_to_text(ineq, p.plant.state_names, p.plant.input_names) << "\n";
    }
  }
  for (const auto& t : p.plant.transitions) {
    out << "\n[transition]\nfrom: " << p.plant.modes[static_cast<size_t>(t.from)].name
        << "\nto: " << p.plant.modes[static_cast<size_t>(t.to)].name << "\n";
    for (const auto& g : t.guard) {
      out << "guard: " << ineq_to_text(g, p.plant.state_names, p.plant.input_names)
          << "\n";
    }
  }
  if (p.input) {
    const auto& aut = p.input->automaton;
    out << "\n[input]\nvars:";
    for (const auto& nm : aut.state_names) out << " " << nm;
    out << "\ninit:";
    for (Eigen::Index i = 0; i < p.input->initial_state.size(); ++i) {
      out << " " << format_double(p.input->initial_state[i]);
    }
    out << "\nstart: " << aut.modes[static_cast<size_t>(p.input->initial_mode)].name
        << "\n";
    for (const auto& mode : aut.modes) {
      out << "\n[input mode " << mode.name << "]\n";
      for (int i = 0; i < aut.n; ++i) {
        out << "d/dt " << aut.state_names[static_cast<size_t>(i)] << " = "
            << to_string(mode.field[static_cast<size_t>(i)], aut.state_names, {})
            << "\n";
      }
      for (const auto& ineq : mode.invariant) {
        out << "invariant: " << ineq_to_text(ineq, aut.state_names, {}) << "\n";
      }
    }
    for (const auto& t : aut.transitions) {
      out << "\n[input transition]\nfrom: "
          << aut.modes[static_cast<size_t>(t.from)].name << "\nto: "
          << aut.modes[static_cast<size_t>(t.to)].name << "\n";
      for (const auto& g : t.guard) {
        out << "guard: " << ineq_to_text(g, aut.state_names, {}) << "\n";
      }
    }
  }
  out << "\n[initial]\n";
  for (int i = 0; i < p.plant.n; ++i) {
    out << p.plant.state_names[static_cast<size_t>(i)] << " = ["
        << format_double(p.theta[static_cast<size_t>(i)].lo) << ", "
        << format_double(p.theta[static_cast<size_t>(i)].hi) << "]\n";
  }
  if (p.initial_mode >= 0) {
    out << "mode: " << p.plant.modes[static_cast<size_t>(p.initial_mode)].name << "\n";
  }
  if (!p.unsafe.empty()) {
    out << "\n[unsafe]\n";
    for (const auto& ineq : p.unsafe) {
      out << ineq_to_text(ineq, p.plant.state_names, {}) << "\n";
    }
  }
  out << "\n[horizon]\n" << format_double(p.horizon) << "\n";
  out << "\n[params]\neps0 = " << format_double(p.eps0)
      << "\ntau0 = " << format_double(p.tau0) << "\n";
  return out.str();
}

}  // namespace reachverify
