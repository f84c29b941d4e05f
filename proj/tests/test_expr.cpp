#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "reachverify/expr.hpp"

using namespace reachverify;

namespace {

const std::vector<std::string> kCardiacStates = {"x1", "x2"};
const std::vector<std::string> kCardiacInputs = {"u"};

Expr::Ptr cardiac_f1() {
  return parse_expr("-x1*(x1^2 + 0.9*x1 + 0.9) + 2*x2*u + 1", kCardiacStates,
                    kCardiacInputs);
}

Expr::Ptr cardiac_f2() {
  return parse_expr("x1 - 2*x2", kCardiacStates, kCardiacInputs);
}

Valuation val(std::initializer_list<double> state,
              std::initializer_list<double> input = {}) {
  Valuation v;
  v.state = Eigen::VectorXd(static_cast<Eigen::Index>(state.size()));
  Eigen::Index i = 0;
  for (double s : state) v.state[i++] = s;
  v.input = Eigen::VectorXd(static_cast<Eigen::Index>(input.size()));
  i = 0;
  for (double u : input) v.input[i++] = u;
  return v;
}

}  // namespace

TEST_CASE("parse: single variable is the bare leaf") {
  auto e = parse_expr("x1", kCardiacStates, kCardiacInputs);
  CHECK(e->kind == ExprKind::kStateVar);
  CHECK(e->index == 0);
}

TEST_CASE("parse: exp(log(2.0)) evaluates to 2") {
  auto e = parse_expr("exp(log(2.0))", kCardiacStates, kCardiacInputs);
  CHECK(eval_point(e, val({0.0, 0.0}, {0.0})) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("parse: cardiac f1 evaluates to the hand oracle") {
  // -0.5*(0.25 + 0.45 + 0.9) + 2*0.24*0.15 + 1, worked by hand
  const double expected = -0.5 * (0.25 + 0.45 + 0.9) + 2.0 * 0.24 * 0.15 + 1.0;
  auto e = cardiac_f1();
  CHECK(eval_point(e, val({0.5, 0.24}, {0.15})) ==
        doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("parse: errors carry position and name") {
  CHECK_THROWS_AS(parse_expr("x1 + y", kCardiacStates, kCardiacInputs),
                  ParseError);
  CHECK_THROWS_AS(parse_expr("x1^2.5", kCardiacStates, kCardiacInputs),
                  ParseError);
  CHECK_THROWS_AS(parse_expr("(x1", kCardiacStates, kCardiacInputs), ParseError);
  CHECK_THROWS_WITH(parse_expr("x1 + yz", kCardiacStates, kCardiacInputs),
                    doctest::Contains("yz"));
}

TEST_CASE("parse: precedence and associativity") {
  auto e = parse_expr("2 - 3 - 4", {}, {});
  CHECK(eval_point(e, val({})) == -5.0);
  e = parse_expr("2 + 3 * 4", {}, {});
  CHECK(eval_point(e, val({})) == 14.0);
  e = parse_expr("-x1^2", kCardiacStates, kCardiacInputs);
  CHECK(eval_point(e, val({3.0, 0.0}, {0.0})) == -9.0);
  e = parse_expr("12 / 2 / 3", {}, {});
  CHECK(eval_point(e, val({})) == 2.0);
}

TEST_CASE("eval_point: constants and simple arithmetic") {
  CHECK(eval_point(Expr::constant(3.5), val({})) == 3.5);
  CHECK(eval_point(cardiac_f2(), val({0.5, 0.24}, {0.0})) ==
        doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("eval_point: domain errors identify the problem") {
  auto e = parse_expr("log(x1)", kCardiacStates, kCardiacInputs);
  CHECK_THROWS_AS(eval_point(e, val({-1.0, 0.0}, {0.0})), DomainError);
  e = parse_expr("1 / x1", kCardiacStates, kCardiacInputs);
  CHECK_THROWS_AS(eval_point(e, val({0.0, 0.0}, {0.0})), DomainError);
}

TEST_CASE("differentiate: cardiac df1/dx1 against finite differences") {
  auto d = differentiate(cardiac_f1(), VarRef::state(0));
  for (int i = 0; i < 100; ++i) {
    auto v = val({oracles::uniform(-2.0, 2.0), oracles::uniform(-2.0, 2.0)},
                 {oracles::uniform(0.0, 1.0)});
    const double fd = oracles::finite_difference(cardiac_f1(), VarRef::state(0), v);
    const double sym = eval_point(d, v);
    CHECK(std::fabs(sym - fd) <= 1e-6 * (1.0 + std::fabs(sym)));
    // and the closed form -(3 x1^2 + 1.8 x1 + 0.9)
    const double x1 = v.state[0];
    const double closed = -(3.0 * x1 * x1 + 1.8 * x1 + 0.9);
    CHECK(sym == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("differentiate: product and input rules") {
  auto e = parse_expr("x1*x2", kCardiacStates, kCardiacInputs);
  auto d = differentiate(e, VarRef::state(1));
  auto v = val({0.7, -1.3}, {0.4});
  CHECK(eval_point(d, v) == 0.7);

  auto g = parse_expr("2*x2*u", kCardiacStates, kCardiacInputs);
  auto dg = differentiate(g, VarRef::input(0));
  CHECK(eval_point(dg, v) == doctest::Approx(2.0 * -1.3));
}

TEST_CASE("differentiate: random expressions vs central differences") {
  for (int trial = 0; trial < 60; ++trial) {
    auto e = oracles::random_expr(4, 2, 1);
    auto d0 = differentiate(e, VarRef::state(0));
    for (int pt = 0; pt < 5; ++pt) {
      auto v = val({oracles::uniform(-1.5, 1.5), oracles::uniform(-1.5, 1.5)},
                   {oracles::uniform(-1.5, 1.5)});
      double sym, fd;
      try {
        sym = eval_point(d0, v);
        fd = oracles::finite_difference(e, VarRef::state(0), v, 1e-5);
      } catch (const DomainError&) {
        continue;  // sampled too close to a pole
      }
      if (!std::isfinite(fd) || std::fabs(sym) > 1e6) continue;
      CHECK(std::fabs(sym - fd) <= 1e-5 * (1.0 + std::fabs(sym)) + 1e-5);
    }
  }
}

TEST_CASE("eval_interval: Example-2 Jacobian entries") {
  auto d11 = differentiate(cardiac_f1(), VarRef::state(0));
  const Box sbox = {Interval(0.4, 0.6), Interval(-10.0, 10.0)};
  const Box ubox = {Interval(0.1, 0.2)};
  const Interval j11 = eval_interval(d11, sbox, ubox);
  CHECK(j11.lo == doctest::Approx(-3.06).epsilon(1e-9));
  CHECK(j11.hi == doctest::Approx(-2.1).epsilon(1e-9));
  CHECK(j11.contains(-3.06));
  CHECK(j11.contains(-2.1));

  auto d12 = differentiate(cardiac_f1(), VarRef::state(1));
  const Interval j12 = eval_interval(d12, sbox, ubox);
  CHECK(j12.lo == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(j12.hi == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("eval_interval: constants give point intervals") {
  const Box sbox = {Interval(-5.0, 5.0)};
  const Interval r = eval_interval(Expr::constant(3.25), sbox, {});
  CHECK(r.lo == 3.25);
  CHECK(r.hi == 3.25);
}

TEST_CASE("eval_interval: domain preconditions fail loudly") {
  auto e = parse_expr("log(x1)", kCardiacStates, kCardiacInputs);
  CHECK_THROWS_AS(eval_interval(e, {Interval(-1.0, 2.0), Interval(0, 1)},
                                {Interval(0, 1)}),
                  DomainError);
  auto q = parse_expr("1/x1", kCardiacStates, kCardiacInputs);
  CHECK_THROWS_AS(eval_interval(q, {Interval(-1.0, 2.0), Interval(0, 1)},
                                {Interval(0, 1)}),
                  DomainError);
}

TEST_CASE("property: interval soundness over 1000 sampled points") {
  for (int trial = 0; trial < 40; ++trial) {
    auto e = oracles::random_expr(4, 2, 1);
    const Box sbox = {Interval(oracles::uniform(-2.0, 0.0), oracles::uniform(0.0, 2.0)),
                      Interval(oracles::uniform(-2.0, 0.0), oracles::uniform(0.0, 2.0))};
    const Box ubox = {Interval(oracles::uniform(-2.0, 0.0), oracles::uniform(0.0, 2.0))};
    Interval enc;
    try {
      enc = eval_interval(e, sbox, ubox);
    } catch (const DomainError&) {
      continue;
    }
    const int samples = trial < 4 ? 1000 : 100;
    for (int s = 0; s < samples; ++s) {
      Valuation v{oracles::sample_box(sbox), oracles::sample_box(ubox)};
      const double p = eval_point(e, v);
      CHECK(enc.contains(p));
    }
  }
}

TEST_CASE("property: interval monotonicity under box inclusion") {
  for (int trial = 0; trial < 40; ++trial) {
    auto e = oracles::random_expr(4, 2, 0);
    const Box inner = {Interval(-0.5, 0.6), Interval(-0.4, 0.7)};
    const Box outer = {Interval(-0.9, 1.0), Interval(-0.8, 1.1)};
    Interval ri, ro;
    try {
      ri = eval_interval(e, inner, {});
      ro = eval_interval(e, outer, {});
    } catch (const DomainError&) {
      continue;
    }
    CHECK(ro.contains(ri));
  }
}

TEST_CASE("property: parse/print round trip evaluates identically") {
  for (int trial = 0; trial < 50; ++trial) {
    auto e = oracles::random_expr(4, 2, 1);
    const std::string printed = to_string(e, kCardiacStates, kCardiacInputs);
    auto back = parse_expr(printed, kCardiacStates, kCardiacInputs);
    for (int pt = 0; pt < 10; ++pt) {
      auto v = val({oracles::uniform(-1.5, 1.5), oracles::uniform(-1.5, 1.5)},
                   {oracles::uniform(-1.5, 1.5)});
      double orig;
      try {
        orig = eval_point(e, v);
      } catch (const DomainError&) {
        continue;
      }
      CHECK(eval_point(back, v) == orig);
    }
  }
}

TEST_CASE("jacobian: cardiac system matches entry formulas") {
  ExprVector f = {cardiac_f1(), cardiac_f2()};
  auto jx = jacobian(f, JacobianKind::kState, 2);
  auto ju = jacobian(f, JacobianKind::kInput, 1);
  REQUIRE(jx.size() == 2);
  REQUIRE(jx[0].size() == 2);

  for (int i = 0; i < 20; ++i) {
    auto v = val({oracles::uniform(-1.0, 1.0), oracles::uniform(-1.0, 1.0)},
                 {oracles::uniform(0.0, 1.0)});
    const double x1 = v.state[0];
    CHECK(eval_point(jx[0][0], v) ==
          doctest::Approx(-(3 * x1 * x1 + 1.8 * x1 + 0.9)).epsilon(1e-12));
    CHECK(eval_point(jx[0][1], v) == doctest::Approx(2 * v.input[0]));
    CHECK(eval_point(jx[1][0], v) == 1.0);
    CHECK(eval_point(jx[1][1], v) == -2.0);
    CHECK(eval_point(ju[0][0], v) == doctest::Approx(2 * v.state[1]));
    CHECK(eval_point(ju[1][0], v) == 0.0);
    // finite-difference cross-check on each entry
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const double fd = oracles::finite_difference(f[r], VarRef::state(c), v);
        CHECK(std::fabs(eval_point(jx[r][c], v) - fd) <= 1e-5);
      }
    }
  }
}

TEST_CASE("jacobian: linear system gives the constant matrix") {
  ExprVector f = {parse_expr("2*x1 - 0.5*x2", kCardiacStates, {}),
                  parse_expr("x1 + 3*x2", kCardiacStates, {})};
  auto jx = jacobian(f, JacobianKind::kState, 2);
  auto v = val({7.0, -3.0});
  CHECK(eval_point(jx[0][0], v) == 2.0);
  CHECK(eval_point(jx[0][1], v) == -0.5);
  CHECK(eval_point(jx[1][0], v) == 1.0);
  CHECK(eval_point(jx[1][1], v) == 3.0);
}

TEST_CASE("jacobian: identity map has identity structure") {
  ExprVector f = {Expr::state_var(0), Expr::state_var(1)};
  auto jx = jacobian(f, JacobianKind::kState, 2);
  auto v = val({1.7, 2.9});
  CHECK(eval_point(jx[0][0], v) == 1.0);
  CHECK(eval_point(jx[0][1], v) == 0.0);
  CHECK(eval_point(jx[1][0], v) == 0.0);
  CHECK(eval_point(jx[1][1], v) == 1.0);
}

TEST_CASE("interval: pow handles even/odd and zero-straddling") {
  const Interval x(-2.0, 3.0);
  const Interval sq = pow_int(x, 2);
  CHECK(sq.lo == 0.0);
  CHECK(sq.hi >= 9.0);
  CHECK(sq.hi == doctest::Approx(9.0));
  const Interval cu = pow_int(x, 3);
  CHECK(cu.lo == doctest::Approx(-8.0));
  CHECK(cu.hi == doctest::Approx(27.0));
  CHECK_THROWS_AS(pow_int(x, -1), DomainError);
  const Interval inv = pow_int(Interval(2.0, 4.0), -2);
  CHECK(inv.lo == doctest::Approx(1.0 / 16.0));
  CHECK(inv.hi == doctest::Approx(0.25));
}

TEST_CASE("interval: outward rounding keeps endpoint arithmetic sound") {
  const Interval a(0.1, 0.1);
  const Interval b(0.2, 0.2);
  const Interval s = a + b;
  CHECK(s.lo < 0.1 + 0.2);
  CHECK(s.hi > 0.30000000000000001);
  // 0.1 + 0.2 is famously not 0.3; both readings must be inside.
  CHECK(s.contains(0.1 + 0.2));
  CHECK(s.contains(0.3));
}
