// Test-only oracles: independent reference computations used to freeze
// expected values. Nothing here touches the validated code paths it checks.
#ifndef REACHVERIFY_TESTS_ORACLES_HPP
#define REACHVERIFY_TESTS_ORACLES_HPP

#include <cstdlib>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "reachverify/expr.hpp"

namespace oracles {

inline unsigned long test_seed() {
  if (const char* s = std::getenv("REACHVERIFY_SEED")) {
    return std::strtoul(s, nullptr, 10);
  }
  return 20250810ul;
}

inline std::mt19937& rng() {
  static std::mt19937 gen(test_seed());
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng());
}

// Uniform sample inside a box.
inline Eigen::VectorXd sample_box(const reachverify::Box& box) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(box.size()));
  for (size_t i = 0; i < box.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = uniform(box[i].lo, box[i].hi);
  }
  return v;
}

// Uniform sample inside the closed l2 ball B_r(center), by rejection.
inline Eigen::VectorXd sample_ball(const Eigen::VectorXd& center, double r) {
  const Eigen::Index n = center.size();
  for (;;) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(-r, r);
    if (v.norm() <= r) return center + v;
  }
}

// Central finite difference of e with respect to one variable.
inline double finite_difference(const reachverify::Expr::Ptr& e,
                                reachverify::VarRef var,
                                const reachverify::Valuation& at,
                                double h = 1e-6) {
  reachverify::Valuation plus = at;
  reachverify::Valuation minus = at;
  if (var.is_input) {
    plus.input[var.index] += h;
    minus.input[var.index] -= h;
  } else {
    plus.state[var.index] += h;
    minus.state[var.index] -= h;
  }
  return (reachverify::eval_point(e, plus) - reachverify::eval_point(e, minus)) /
         (2.0 * h);
}

// Fixed-step classical RK4, the reference integrator for Monte-Carlo
// containment checks. Deliberately unrelated to the validated stepper.
inline Eigen::VectorXd rk4_integrate(
    const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
    Eigen::VectorXd y, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  double t = t0;
  for (int i = 0; i < steps; ++i) {
    const Eigen::VectorXd k1 = f(t, y);
    const Eigen::VectorXd k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = f(t + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  return y;
}

// Random expression trees of bounded depth that are total on [-2, 2]^n
// boxes: divisions use 2 + v^2 denominators, logs use 1.5 + v^2 arguments.
inline reachverify::Expr::Ptr random_expr(int depth, int n_state, int n_input) {
  using reachverify::Expr;
  std::uniform_int_distribution<int> leaf(0, 2);
  std::uniform_int_distribution<int> node(0, 7);
  if (depth == 0 || (n_state == 0 && n_input == 0)) {
    switch (n_input > 0 ? leaf(rng()) : std::min(leaf(rng()), 1)) {
      case 0:
        return Expr::constant(uniform(-2.0, 2.0));
      case 1:
        return Expr::state_var(static_cast<int>(rng()() % n_state));
      default:
        return Expr::input_var(static_cast<int>(rng()() % n_input));
    }
  }
  auto sub = [&] { return random_expr(depth - 1, n_state, n_input); };
  switch (node(rng())) {
    case 0:
      return Expr::add(sub(), sub());
    case 1:
      return Expr::sub(sub(), sub());
    case 2:
      return Expr::mul(sub(), sub());
    case 3:
      return Expr::div(sub(), Expr::add(Expr::constant(2.0),
                                        Expr::pow(sub(), 2)));
    case 4:
      return Expr::pow(sub(), static_cast<int>(rng()() % 3) + 1);
    case 5:
      // keep exp arguments small so interval bounds stay finite
      return Expr::exp(Expr::div(sub(), Expr::constant(8.0)));
    case 6:
      return Expr::log(Expr::add(Expr::constant(1.5), Expr::pow(sub(), 2)));
    default:
      return Expr::neg(sub());
  }
}

}  // namespace oracles

#endif  // REACHVERIFY_TESTS_ORACLES_HPP
