#ifndef REACHVERIFY_EXPR_HPP
#define REACHVERIFY_EXPR_HPP

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reachverify/interval.hpp"

namespace reachverify {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, size_t position)
      : std::runtime_error(what + " (at position " + std::to_string(position) +
                           ")"),
        position(position) {}
  size_t position;
};

enum class ExprKind {
  kConstant,
  kStateVar,
  kInputVar,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kExp,
  kLog,
  kNeg,
};

// Immutable expression tree over state and input variables. Nodes are
// shared; all operations are pure, so trees are safe to use concurrently.
class Expr {
 public:
  using Ptr = std::shared_ptr<const Expr>;

  ExprKind kind;
  double value = 0.0;   // kConstant
  int index = -1;       // kStateVar / kInputVar
  int exponent = 0;     // kPow
  Ptr a, b;             // children (b only for binary nodes)

  static Ptr constant(double v);
  static Ptr state_var(int index);
  static Ptr input_var(int index);
  // Smart constructors apply structural simplification (0+x -> x, 1*x -> x,
  // 0*x -> 0, constant folding) but never reassociate or factor.
  static Ptr add(Ptr a, Ptr b);
  static Ptr sub(Ptr a, Ptr b);
  static Ptr mul(Ptr a, Ptr b);
  static Ptr div(Ptr a, Ptr b);
  static Ptr pow(Ptr a, int n);
  static Ptr exp(Ptr a);
  static Ptr log(Ptr a);
  static Ptr neg(Ptr a);

  bool is_constant(double v) const {
    return kind == ExprKind::kConstant && value == v;
  }

 private:
  explicit Expr(ExprKind k) : kind(k) {}
  static Ptr make(ExprKind k, Ptr a = nullptr, Ptr b = nullptr);
};

// Point of evaluation: one value per state and input variable.
struct Valuation {
  Eigen::VectorXd state;
  Eigen::VectorXd input;
};

// Identifies a variable to differentiate with respect to.
struct VarRef {
  bool is_input = false;
  int index = 0;
  static VarRef state(int i) { return {false, i}; }
  static VarRef input(int i) { return {true, i}; }
};

// Parses the model grammar: infix + - * /, ^ with integer exponents,
// exp(), log(), parentheses, identifiers resolved against the two name
// lists. Throws ParseError with the offending position.
Expr::Ptr parse_expr(const std::string& text,
                     const std::vector<std::string>& state_names,
                     const std::vector<std::string>& input_names);

// Exact symbolic partial derivative.
Expr::Ptr differentiate(const Expr::Ptr& e, VarRef var);

double eval_point(const Expr::Ptr& e, const Valuation& v);

// Sound enclosure of the range of e over the given boxes. Outward rounding
// on every primitive keeps the enclosure valid in exact arithmetic. No
// subdivision is performed; tightness is the caller's job.
Interval eval_interval(const Expr::Ptr& e, const Box& state_box,
                       const Box& input_box);

std::string to_string(const Expr::Ptr& e,
                      const std::vector<std::string>& state_names,
                      const std::vector<std::string>& input_names);

// Largest variable index referenced, -1 if none.
int max_state_index(const Expr::Ptr& e);
int max_input_index(const Expr::Ptr& e);

using ExprVector = std::vector<Expr::Ptr>;
using ExprMatrix = std::vector<std::vector<Expr::Ptr>>;

enum class JacobianKind { kState, kInput };

// Matrix of symbolic partials d f_i / d x_j (state) or d f_i / d u_j (input).
ExprMatrix jacobian(const ExprVector& f, JacobianKind wrt, int n_vars);

}  // namespace reachverify

#endif  // REACHVERIFY_EXPR_HPP
