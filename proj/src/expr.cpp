#include "reachverify/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace reachverify {

Expr::Ptr Expr::make(ExprKind k, Ptr a, Ptr b) {
  auto e = std::shared_ptr<Expr>(new Expr(k));
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

Expr::Ptr Expr::constant(double v) {
  auto e = std::shared_ptr<Expr>(new Expr(ExprKind::kConstant));
  e->value = v;
  return e;
}

Expr::Ptr Expr::state_var(int index) {
  auto e = std::shared_ptr<Expr>(new Expr(ExprKind::kStateVar));
  e->index = index;
  return e;
}

Expr::Ptr Expr::input_var(int index) {
  auto e = std::shared_ptr<Expr>(new Expr(ExprKind::kInputVar));
  e->index = index;
  return e;
}

namespace {
bool both_const(const Expr::Ptr& a, const Expr::Ptr& b) {
  return a->kind == ExprKind::kConstant && b->kind == ExprKind::kConstant;
}
}  // namespace

Expr::Ptr Expr::add(Ptr a, Ptr b) {
  if (a->is_constant(0.0)) return b;
  if (b->is_constant(0.0)) return a;
  if (both_const(a, b)) {
    const double v = a->value + b->value;
    if (std::isfinite(v)) return constant(v);
  }
  return make(ExprKind::kAdd, std::move(a), std::move(b));
}

Expr::Ptr Expr::sub(Ptr a, Ptr b) {
  if (b->is_constant(0.0)) return a;
  if (a->is_constant(0.0)) return neg(std::move(b));
  if (both_const(a, b)) {
    const double v = a->value - b->value;
    if (std::isfinite(v)) return constant(v);
  }
  return make(ExprKind::kSub, std::move(a), std::move(b));
}

Expr::Ptr Expr::mul(Ptr a, Ptr b) {
  if (a->is_constant(0.0) || b->is_constant(0.0)) return constant(0.0);
  if (a->is_constant(1.0)) return b;
  if (b->is_constant(1.0)) return a;
  if (both_const(a, b)) {
    const double v = a->value * b->value;
    if (std::isfinite(v)) return constant(v);
  }
  return make(ExprKind::kMul, std::move(a), std::move(b));
}

Expr::Ptr Expr::div(Ptr a, Ptr b) {
  if (b->is_constant(1.0)) return a;
  if (a->is_constant(0.0) && !(b->kind == ExprKind::kConstant && b->value == 0.0)) {
    return constant(0.0);
  }
  if (both_const(a, b) && b->value != 0.0) {
    const double v = a->value / b->value;
    if (std::isfinite(v)) return constant(v);
  }
  return make(ExprKind::kDiv, std::move(a), std::move(b));
}

Expr::Ptr Expr::pow(Ptr a, int n) {
  if (n == 0) return constant(1.0);
  if (n == 1) return a;
  if (a->kind == ExprKind::kConstant) {
    double acc = 1.0;
    const double base = a->value;
    const int m = n < 0 ? -n : n;
    for (int i = 0; i < m; ++i) acc *= base;
    if (n < 0 && acc != 0.0) acc = 1.0 / acc;
    if (std::isfinite(acc)) return constant(acc);
  }
  auto e = make(ExprKind::kPow, std::move(a));
  const_cast<Expr*>(e.get())->exponent = n;
  return e;
}

Expr::Ptr Expr::exp(Ptr a) {
  if (a->kind == ExprKind::kConstant) {
    const double v = std::exp(a->value);
    if (std::isfinite(v)) return constant(v);
  }
  return make(ExprKind::kExp, std::move(a));
}

Expr::Ptr Expr::log(Ptr a) {
  if (a->kind == ExprKind::kConstant && a->value > 0.0) {
    const double v = std::log(a->value);
    if (std::isfinite(v)) return constant(v);
  }
  return make(ExprKind::kLog, std::move(a));
}

Expr::Ptr Expr::neg(Ptr a) {
  if (a->kind == ExprKind::kConstant) return constant(-a->value);
  if (a->kind == ExprKind::kNeg) return a->a;
  return make(ExprKind::kNeg, std::move(a));
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  const std::string& text;
  const std::vector<std::string>& state_names;
  const std::vector<std::string>& input_names;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& why) { throw ParseError(why, pos); }

  Expr::Ptr parse() {
    auto e = expression();
    skip_ws();
    if (pos != text.size()) fail("unexpected trailing input");
    return e;
  }

  Expr::Ptr expression() {
    auto e = term();
    for (;;) {
      if (eat('+')) {
        e = Expr::add(e, term());
      } else if (eat('-')) {
        e = Expr::sub(e, term());
      } else {
        return e;
      }
    }
  }

  Expr::Ptr term() {
    auto e = unary();
    for (;;) {
      if (eat('*')) {
        e = Expr::mul(e, unary());
      } else if (eat('/')) {
        e = Expr::div(e, unary());
      } else {
        return e;
      }
    }
  }

  Expr::Ptr unary() {
    if (eat('-')) return Expr::neg(unary());
    if (eat('+')) return unary();
    return power();
  }

  Expr::Ptr power() {
    auto base = primary();
    while (eat('^')) base = Expr::pow(base, integer_exponent());
    return base;
  }

  int integer_exponent() {
    if (eat('(')) {
      const int n = integer_exponent();
      if (!eat(')')) fail("expected ')' after exponent");
      return n;
    }
    bool negative = false;
    if (eat('-')) negative = true;
    skip_ws();
    const size_t start = pos;
    double v = number();
    if (v != std::floor(v) || std::fabs(v) > 1e9) {
      pos = start;
      fail("exponent must be an integer");
    }
    const int n = static_cast<int>(v);
    return negative ? -n : n;
  }

  Expr::Ptr primary() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    const char c = text[pos];
    if (c == '(') {
      ++pos;
      auto e = expression();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return Expr::constant(number());
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return identifier();
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  double number() {
    skip_ws();
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos += static_cast<size_t>(end - begin);
    return v;
  }

  Expr::Ptr identifier() {
    skip_ws();
    const size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
      ++pos;
    }
    const std::string name = text.substr(start, pos - start);
    if (name == "exp" || name == "log") {
      if (!eat('(')) fail("expected '(' after " + name);
      auto arg = expression();
      if (!eat(')')) fail("expected ')'");
      return name == "exp" ? Expr::exp(arg) : Expr::log(arg);
    }
    for (size_t i = 0; i < state_names.size(); ++i) {
      if (state_names[i] == name) return Expr::state_var(static_cast<int>(i));
    }
    for (size_t i = 0; i < input_names.size(); ++i) {
      if (input_names[i] == name) return Expr::input_var(static_cast<int>(i));
    }
    pos = start;
    fail("unknown identifier '" + name + "'");
  }
};

}  // namespace

Expr::Ptr parse_expr(const std::string& text,
                     const std::vector<std::string>& state_names,
                     const std::vector<std::string>& input_names) {
  Parser p{text, state_names, input_names};
  return p.parse();
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

Expr::Ptr differentiate(const Expr::Ptr& e, VarRef var) {
  switch (e->kind) {
    case ExprKind::kConstant:
      return Expr::constant(0.0);
    case ExprKind::kStateVar:
      return Expr::constant(!var.is_input && e->index == var.index ? 1.0 : 0.0);
    case ExprKind::kInputVar:
      return Expr::constant(var.is_input && e->index == var.index ? 1.0 : 0.0);
    case ExprKind::kAdd:
      return Expr::add(differentiate(e->a, var), differentiate(e->b, var));
    case ExprKind::kSub:
      return Expr::sub(differentiate(e->a, var), differentiate(e->b, var));
    case ExprKind::kMul:
      return Expr::add(Expr::mul(differentiate(e->a, var), e->b),
                       Expr::mul(e->a, differentiate(e->b, var)));
    case ExprKind::kDiv:
      // d(a/b) = da/b - a*db/b^2
      return Expr::sub(
          Expr::div(differentiate(e->a, var), e->b),
          Expr::div(Expr::mul(e->a, differentiate(e->b, var)), Expr::pow(e->b, 2)));
    case ExprKind::kPow:
      // d(a^n) = n * a^(n-1) * da
      return Expr::mul(
          Expr::mul(Expr::constant(static_cast<double>(e->exponent)),
                    Expr::pow(e->a, e->exponent - 1)),
          differentiate(e->a, var));
    case ExprKind::kExp:
      return Expr::mul(Expr::exp(e->a), differentiate(e->a, var));
    case ExprKind::kLog:
      return Expr::div(differentiate(e->a, var), e->a);
    case ExprKind::kNeg:
      return Expr::neg(differentiate(e->a, var));
  }
  throw std::logic_error("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

double pow_by_squaring(double base, int n) {
  double acc = 1.0;
  while (n > 0) {
    if (n & 1) acc *= base;
    n >>= 1;
    if (n) base *= base;
  }
  return acc;
}

}  // namespace

double eval_point(const Expr::Ptr& e, const Valuation& v) {
  switch (e->kind) {
    case ExprKind::kConstant:
      return e->value;
    case ExprKind::kStateVar:
      if (e->index >= v.state.size()) {
        throw DomainError("state variable index out of range");
      }
      return v.state[e->index];
    case ExprKind::kInputVar:
      if (e->index >= v.input.size()) {
        throw DomainError("input variable index out of range");
      }
      return v.input[e->index];
    case ExprKind::kAdd:
      return eval_point(e->a, v) + eval_point(e->b, v);
    case ExprKind::kSub:
      return eval_point(e->a, v) - eval_point(e->b, v);
    case ExprKind::kMul:
      return eval_point(e->a, v) * eval_point(e->b, v);
    case ExprKind::kDiv: {
      const double den = eval_point(e->b, v);
      if (den == 0.0) throw DomainError("division by zero in expression");
      return eval_point(e->a, v) / den;
    }
    case ExprKind::kPow: {
      const double base = eval_point(e->a, v);
      if (e->exponent >= 0) return pow_by_squaring(base, e->exponent);
      const double p = pow_by_squaring(base, -e->exponent);
      if (p == 0.0) throw DomainError("zero raised to a negative power");
      return 1.0 / p;
    }
    case ExprKind::kExp:
      return std::exp(eval_point(e->a, v));
    case ExprKind::kLog: {
      const double arg = eval_point(e->a, v);
      if (arg <= 0.0) throw DomainError("log of non-positive value");
      return std::log(arg);
    }
    case ExprKind::kNeg:
      return -eval_point(e->a, v);
  }
  throw std::logic_error("unreachable expression kind");
}

Interval eval_interval(const Expr::Ptr& e, const Box& state_box,
                       const Box& input_box) {
  switch (e->kind) {
    case ExprKind::kConstant:
      return Interval::point(e->value);
    case ExprKind::kStateVar:
      if (static_cast<size_t>(e->index) >= state_box.size()) {
        throw DomainError("state variable index out of range");
      }
      return state_box[static_cast<size_t>(e->index)];
    case ExprKind::kInputVar:
      if (static_cast<size_t>(e->index) >= input_box.size()) {
        throw DomainError("input variable index out of range");
      }
      return input_box[static_cast<size_t>(e->index)];
    case ExprKind::kAdd:
      return eval_interval(e->a, state_box, input_box) +
             eval_interval(e->b, state_box, input_box);
    case ExprKind::kSub:
      return eval_interval(e->a, state_box, input_box) -
             eval_interval(e->b, state_box, input_box);
    case ExprKind::kMul:
      return eval_interval(e->a, state_box, input_box) *
             eval_interval(e->b, state_box, input_box);
    case ExprKind::kDiv:
      return eval_interval(e->a, state_box, input_box) /
             eval_interval(e->b, state_box, input_box);
    case ExprKind::kPow:
      return pow_int(eval_interval(e->a, state_box, input_box), e->exponent);
    case ExprKind::kExp:
      return exp(eval_interval(e->a, state_box, input_box));
    case ExprKind::kLog:
      return log(eval_interval(e->a, state_box, input_box));
    case ExprKind::kNeg:
      return -eval_interval(e->a, state_box, input_box);
  }
  throw std::logic_error("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

void print_rec(const Expr::Ptr& e, std::ostringstream& out,
               const std::vector<std::string>& sn,
               const std::vector<std::string>& in) {
  switch (e->kind) {
    case ExprKind::kConstant: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", e->value);
      if (e->value < 0.0) {
        out << "(" << buf << ")";
      } else {
        out << buf;
      }
      return;
    }
    case ExprKind::kStateVar:
      out << (static_cast<size_t>(e->index) < sn.size()
                  ? sn[static_cast<size_t>(e->index)]
                  : "x" + std::to_string(e->index));
      return;
    case ExprKind::kInputVar:
      out << (static_cast<size_t>(e->index) < in.size()
                  ? in[static_cast<size_t>(e->index)]
                  : "u" + std::to_string(e->index));
      return;
    case ExprKind::kAdd:
      out << "(";
      print_rec(e->a, out, sn, in);
      out << " + ";
      print_rec(e->b, out, sn, in);
      out << ")";
      return;
    case ExprKind::kSub:
      out << "(";
      print_rec(e->a, out, sn, in);
      out << " - ";
      print_rec(e->b, out, sn, in);
      out << ")";
      return;
    case ExprKind::kMul:
      out << "(";
      print_rec(e->a, out, sn, in);
      out << " * ";
      print_rec(e->b, out, sn, in);
      out << ")";
      return;
    case ExprKind::kDiv:
      out << "(";
      print_rec(e->a, out, sn, in);
      out << " / ";
      print_rec(e->b, out, sn, in);
      out << ")";
      return;
    case ExprKind::kPow:
      out << "(";
      print_rec(e->a, out, sn, in);
      out << "^";
      if (e->exponent < 0) {
        out << "(" << e->exponent << ")";
      } else {
        out << e->exponent;
      }
      out << ")";
      return;
    case ExprKind::kExp:
      out << "exp(";
      print_rec(e->a, out, sn, in);
      out << ")";
      return;
    case ExprKind::kLog:
      out << "log(";
      print_rec(e->a, out, sn, in);
      out << ")";
      return;
    case ExprKind::kNeg:
      out << "(-";
      print_rec(e->a, out, sn, in);
      out << ")";
      return;
  }
}

}  // namespace

std::string to_string(const Expr::Ptr& e,
                      const std::vector<std::string>& state_names,
                      const std::vector<std::string>& input_names) {
  std::ostringstream out;
  print_rec(e, out, state_names, input_names);
  return out.str();
}

int max_state_index(const Expr::Ptr& e) {
  int m = e->kind == ExprKind::kStateVar ? e->index : -1;
  if (e->a) m = std::max(m, max_state_index(e->a));
  if (e->b) m = std::max(m, max_state_index(e->b));
  return m;
}

int max_input_index(const Expr::Ptr& e) {
  int m = e->kind == ExprKind::kInputVar ? e->index : -1;
  if (e->a) m = std::max(m, max_input_index(e->a));
  if (e->b) m = std::max(m, max_input_index(e->b));
  return m;
}

ExprMatrix jacobian(const ExprVector& f, JacobianKind wrt, int n_vars) {
  ExprMatrix out(f.size());
  for (size_t i = 0; i < f.size(); ++i) {
    out[i].resize(static_cast<size_t>(n_vars));
    for (int j = 0; j < n_vars; ++j) {
      const VarRef var = wrt == JacobianKind::kState ? VarRef::state(j)
                                                     : VarRef::input(j);
      out[i][static_cast<size_t>(j)] = differentiate(f[i], var);
    }
  }
  return out;
}

}  // namespace reachverify
