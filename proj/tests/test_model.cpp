#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "reachverify/circuits.hpp"
#include "reachverify/model.hpp"
#include "reachverify/sim.hpp"

using namespace reachverify;

namespace {

const char* kCardiacText = R"(
# cardiac oscillator with a logistic pulse input
[dimensions]
state x1 x2
input u

[mode osc]
d/dt x1 = -x1*(x1^2 + 0.9*x1 + 0.9) + 2*x2*u + 1
d/dt x2 = x1 - 2*x2

[input]
builtin: sig
u0 = 0.1
t_fall = 5.0

[initial]
x1 = [0.4, 0.6]
x2 = [0.14, 0.34]

[unsafe]
x1 >= 2.0

[horizon]
10.0

[params]
eps0 = 0.04
tau0 = 0.1
)";

}  // namespace

TEST_CASE("affine parsing: normal form and closed strict forms") {
  const std::vector<std::string> sn = {"x", "y"};
  auto ineq = parse_affine_ineq("2*x - y <= 3", sn, {});
  CHECK(ineq.state_coef[0] == 2.0);
  CHECK(ineq.state_coef[1] == -1.0);
  CHECK(ineq.bound == 3.0);

  auto flipped = parse_affine_ineq("x > 1.32", sn, {});
  CHECK(flipped.state_coef[0] == -1.0);
  CHECK(flipped.bound == -1.32);

  CHECK_THROWS_AS(parse_affine_ineq("x*y <= 1", sn, {}), ModelError);
  CHECK_THROWS_AS(parse_affine_ineq("x + 1", sn, {}), ModelError);
}

TEST_CASE("check_unsafe_intersection: inverter threshold cases") {
  const std::vector<std::string> sn = {"vout"};
  Predicate unsafe = {parse_affine_ineq("vout > 1.32", sn, {})};
  CHECK(check_unsafe_intersection({Interval(1.0, 1.1)}, unsafe) ==
        SetRelation::kDisjoint);
  CHECK(check_unsafe_intersection({Interval(1.4, 1.5)}, unsafe) ==
        SetRelation::kContained);
  CHECK(check_unsafe_intersection({Interval(1.3, 1.4)}, unsafe) ==
        SetRelation::kOverlapping);
}

TEST_CASE("check_unsafe_intersection: trichotomy on random boxes") {
  const std::vector<std::string> sn = {"x", "y"};
  Predicate unsafe = {parse_affine_ineq("x + y >= 1", sn, {}),
                      parse_affine_ineq("x <= 2", sn, {})};
  for (int i = 0; i < 200; ++i) {
    const double x0 = oracles::uniform(-2, 3), y0 = oracles::uniform(-2, 3);
    const Box box = {Interval(x0, x0 + oracles::uniform(0.01, 1.5)),
                     Interval(y0, y0 + oracles::uniform(0.01, 1.5))};
    const SetRelation rel = check_unsafe_intersection(box, unsafe);
    // sampled cross-check
    int inside = 0, total = 200;
    for (int s = 0; s < total; ++s) {
      const Eigen::VectorXd p = oracles::sample_box(box);
      if (p[0] + p[1] >= 1.0 && p[0] <= 2.0) ++inside;
    }
    if (rel == SetRelation::kDisjoint) CHECK(inside == 0);
    if (rel == SetRelation::kContained) CHECK(inside == total);
    if (inside > 0 && inside < total) CHECK(rel == SetRelation::kOverlapping);
  }
}

TEST_CASE("check_unsafe_intersection: conjunction emptiness is exact") {
  const std::vector<std::string> sn = {"x"};
  // x >= 1 and x <= 0 is empty: every box is disjoint from it.
  Predicate impossible = {parse_affine_ineq("x >= 1", sn, {}),
                          parse_affine_ineq("x <= 0", sn, {})};
  CHECK(check_unsafe_intersection({Interval(-5.0, 5.0)}, impossible) ==
        SetRelation::kDisjoint);
  // Diagonal strip intersecting only a corner of the box.
  const std::vector<std::string> sn2 = {"x", "y"};
  Predicate strip = {parse_affine_ineq("x + y >= 1.9", sn2, {}),
                     parse_affine_ineq("x + y <= 2.1", sn2, {})};
  CHECK(classify_box({Interval(0, 1), Interval(0, 1)}, {}, strip) ==
        SetRelation::kOverlapping);
  CHECK(classify_box({Interval(0, 0.9), Interval(0, 0.9)}, {}, strip) ==
        SetRelation::kDisjoint);
}

TEST_CASE("loader: cardiac model file") {
  const VerificationProblem p = load_problem_from_text(kCardiacText, "cardiac");
  CHECK(p.plant.n == 2);
  CHECK(p.plant.m == 1);
  CHECK(p.plant.modes.size() == 1);
  REQUIRE(p.input.has_value());
  CHECK(p.input->automaton.modes.size() == 2);  // sig: rise, fall
  CHECK(p.theta[0].lo == 0.4);
  CHECK(p.theta[0].hi == 0.6);
  CHECK(p.horizon == 10.0);
  CHECK(p.eps0 == 0.04);
  // f1 at the Example-1 point
  const Valuation v{Eigen::Vector2d(0.5, 0.24), Eigen::VectorXd::Constant(1, 0.15)};
  CHECK(eval_point(p.plant.modes[0].field[0], v) ==
        doctest::Approx(-0.5 * (0.25 + 0.45 + 0.9) + 2 * 0.24 * 0.15 + 1));
}

TEST_CASE("loader: errors carry position and name") {
  CHECK_THROWS_WITH(load_problem_from_text(R"(
[dimensions]
state x
[mode m]
d/dt x = -x + y
[initial]
x = [0, 1]
[horizon]
1
)", "bad"), doctest::Contains("y"));

  CHECK_THROWS_AS(load_problem_from_text("[dimensions]\ninput u\n", "nostate"),
                  ModelError);
  // missing initial interval
  CHECK_THROWS_AS(load_problem_from_text(R"(
[dimensions]
state x y
[mode m]
d/dt x = -x
d/dt y = -y
[initial]
x = [0, 1]
[horizon]
1
)", "partial"), ModelError);
}

TEST_CASE("compose: mode counts multiply") {
  const auto spec = circuits::CircuitSpec::defaults();
  const HybridAutomaton inv = circuits::inverter_hybrid_automaton(spec);
  CHECK(inv.modes.size() == 7);

  const auto ramp = circuits::make_ramp_input({});
  const auto sig = circuits::make_sig_input({});
  CHECK(compose(inv, ramp).modes.size() == 28);
  CHECK(compose(inv, sig).modes.size() == 14);

  // 1-mode plant x 1-mode input -> 1 mode, no transitions
  VerificationProblem cardiac = load_problem_from_text(kCardiacText, "cardiac");
  InputSignalAutomaton one_mode = *cardiac.input;
  one_mode.automaton.modes.resize(1);
  one_mode.automaton.transitions.clear();
  const HybridAutomaton prod = compose(cardiac.plant, one_mode);
  CHECK(prod.modes.size() == 1);
  CHECK(prod.transitions.empty());
  CHECK(prod.n == cardiac.plant.n + 2);
}

TEST_CASE("compose: dimension mismatch rejected") {
  VerificationProblem cardiac = load_problem_from_text(kCardiacText, "cardiac");
  InputSignalAutomaton bad = *cardiac.input;
  bad.output_indices = {0, 1};  // plant expects one input
  CHECK_THROWS_AS(compose(cardiac.plant, bad), ModelError);
}

TEST_CASE("compose: trajectories match plant driven by the input trace") {
  // Simulate the composed automaton and the plant-with-input-trace
  // separately; the plant states must agree pointwise.
  const auto spec = circuits::CircuitSpec::defaults();
  const VerificationProblem p = circuits::build_inverter_hybrid(spec, "ramp");
  const double T = 3.0;

  SimOptions opts;
  opts.eps = 0.05;
  opts.tau = 0.05;

  const InputTrace u = simulate_input(*p.input, T, 5e-4, 0.02);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 1.18);
  const SimTrace plant_trace =
      hybrid_simulate(p.plant, p.resolve_initial_mode(x0), x0, u, 0.0, T, opts);

  const HybridAutomaton prod = compose(p.plant, *p.input);
  Eigen::VectorXd z0(prod.n);
  z0.head(1) = x0;
  z0.tail(p.input->automaton.n) = p.input->initial_state;
  int z_mode = prod.initial_mode_for(z0, Eigen::VectorXd());
  if (z_mode < 0) z_mode = 0;
  const SimTrace prod_trace =
      hybrid_simulate(prod, z_mode, z0, InputTrace(), 0.0, T, opts);

  for (size_t i = 0; i < plant_trace.times.size(); i += 7) {
    const double t = plant_trace.times[i];
    // locate the product step covering t and compare the plant block
    const SimStep& ps = prod_trace.step_at(t);
    const double vout_plant = plant_trace.points[i][0];
    CHECK(vout_plant >= ps.rect[0].lo - 0.05);
    CHECK(vout_plant <= ps.rect[0].hi + 0.05);
  }
}

TEST_CASE("initial mode inference uses file order on ties") {
  const auto spec = circuits::CircuitSpec::defaults();
  VerificationProblem p = circuits::build_inverter_hybrid(spec, "ramp");
  // vin starts at 0, vout at 1.175: PMOS ohmic, NMOS subthreshold -> mode A
  const int mode = p.resolve_initial_mode(Eigen::VectorXd::Constant(1, 1.175));
  CHECK(p.plant.modes[static_cast<size_t>(mode)].name == "A");
}

TEST_CASE("problem_to_text round trips through the loader") {
  const VerificationProblem orig = load_problem_from_text(kCardiacText, "cardiac");
  const std::string text = problem_to_text(orig);
  const VerificationProblem back = load_problem_from_text(text, "roundtrip");
  CHECK(back.plant.n == orig.plant.n);
  CHECK(back.plant.modes.size() == orig.plant.modes.size());
  CHECK(back.theta[1].hi == orig.theta[1].hi);
  CHECK(back.horizon == orig.horizon);
  REQUIRE(back.input.has_value());
  CHECK(back.input->automaton.modes.size() == orig.input->automaton.modes.size());
  // field values agree at random points
  for (int i = 0; i < 20; ++i) {
    const Valuation v{Eigen::Vector2d(oracles::uniform(-1, 1), oracles::uniform(-1, 1)),
                      Eigen::VectorXd::Constant(1, oracles::uniform(0, 1))};
    CHECK(eval_point(back.plant.modes[0].field[0], v) ==
          eval_point(orig.plant.modes[0].field[0], v));
  }
}
