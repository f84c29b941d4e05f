#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "reachverify/circuits.hpp"
#include "reachverify/sim.hpp"

using namespace reachverify;

namespace {

VerificationProblem toy(const std::string& text) {
  return load_problem_from_text(text, "toy");
}

const char* kDecay = R"(
[dimensions]
state x
[mode m]
d/dt x = -x
[initial]
x = [1, 1]
[horizon]
1
)";

const char* kRotor = R"(
[dimensions]
state x y
[mode m]
d/dt x = -0.2*x + y
d/dt y = -x - 0.2*y
[initial]
x = [1, 1]
y = [0, 0]
[horizon]
6
)";

const char* kTwoMode = R"(
[dimensions]
state x
[mode up]
d/dt x = 1
invariant: x <= 1
[mode down]
d/dt x = -1
invariant: x >= 1
[transition]
from: up
to: down
guard: x >= 1
[initial]
x = [0, 0]
mode: up
[horizon]
2
)";

}  // namespace

TEST_CASE("simulate: exponential decay contains the closed form") {
  const auto p = toy(kDecay);
  SimOptions opts;
  opts.eps = 0.02;
  opts.tau = 0.1;
  const auto trace = simulate(p.plant, 0, Eigen::VectorXd::Constant(1, 1.0),
                              InputTrace(), 0.0, 1.0, opts);
  // final rectangle contains e^-1
  CHECK(trace.final_rect()[0].contains(std::exp(-1.0)));
  // containment at every step, over the whole window (sampled)
  for (const auto& s : trace.steps) {
    for (double t : {s.t_start, 0.5 * (s.t_start + s.t_end), s.t_end}) {
      CHECK(s.rect[0].contains(std::exp(-t)));
    }
    CHECK(s.t_end - s.t_start <= opts.tau + 1e-12);
    CHECK(box_diameter(s.rect) <= opts.eps + 1e-12);
  }
  // abutting time windows covering [0, 1]
  CHECK(trace.steps.front().t_start == 0.0);
  CHECK(trace.steps.back().t_end == doctest::Approx(1.0));
  for (size_t i = 1; i < trace.steps.size(); ++i) {
    CHECK(trace.steps[i].t_start == doctest::Approx(trace.steps[i - 1].t_end));
  }
}

TEST_CASE("simulate: 2-D linear system vs matrix exponential oracle") {
  const auto p = toy(kRotor);
  SimOptions opts;
  opts.eps = 0.05;
  opts.tau = 0.1;
  const auto trace = simulate(p.plant, 0, Eigen::Vector2d(1.0, 0.0), InputTrace(),
                              0.0, 6.0, opts);
  // x(t) = e^{-0.2 t} (cos t, -sin t) for A = [[-0.2, 1], [-1, -0.2]]
  auto exact = [](double t) {
    return Eigen::Vector2d(std::exp(-0.2 * t) * std::cos(t),
                           -std::exp(-0.2 * t) * std::sin(t));
  };
  int checked = 0;
  for (const auto& s : trace.steps) {
    for (double t : {s.t_start, s.t_end}) {
      const Eigen::Vector2d x = exact(t);
      CHECK(s.rect[0].contains(x[0]));
      CHECK(s.rect[1].contains(x[1]));
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("simulate: determinism is bit-exact") {
  const auto p = toy(kRotor);
  SimOptions opts;
  opts.eps = 0.03;
  opts.tau = 0.07;
  const auto a = simulate(p.plant, 0, Eigen::Vector2d(1.0, 0.0), InputTrace(), 0.0,
                          6.0, opts);
  const auto b = simulate(p.plant, 0, Eigen::Vector2d(1.0, 0.0), InputTrace(), 0.0,
                          6.0, opts);
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].rect[0].lo == b.steps[i].rect[0].lo);
    CHECK(a.steps[i].rect[1].hi == b.steps[i].rect[1].hi);
    CHECK(a.times[i] == b.times[i]);
  }
}

TEST_CASE("simulate: refinement keeps rectangles within the halved bound") {
  const auto p = toy(kRotor);
  SimOptions coarse;
  coarse.eps = 0.08;
  coarse.tau = 0.2;
  SimOptions fine = coarse;
  fine.eps = 0.04;
  fine.tau = 0.1;
  const auto tc = simulate(p.plant, 0, Eigen::Vector2d(1.0, 0.0), InputTrace(), 0.0,
                           4.0, coarse);
  const auto tf = simulate(p.plant, 0, Eigen::Vector2d(1.0, 0.0), InputTrace(), 0.0,
                           4.0, fine);
  for (const auto& s : tf.steps) CHECK(box_diameter(s.rect) <= fine.eps + 1e-12);
  // At matched timestamps the refined rectangle is never materially wider;
  // the small slack absorbs window-hull misalignment between the two
  // adaptive grids.
  for (size_t i = 0; i < tc.steps.size(); ++i) {
    const double t = 0.5 * (tc.steps[i].t_start + tc.steps[i].t_end);
    const SimStep& sf = tf.step_at(t);
    CHECK(box_diameter(sf.rect) <=
          std::max(box_diameter(tc.steps[i].rect) * 1.2, fine.eps));
  }
}

TEST_CASE("simulate: zero horizon yields the single initial rectangle") {
  const auto p = toy(kDecay);
  SimOptions opts;
  const auto trace = simulate(p.plant, 0, Eigen::VectorXd::Constant(1, 1.0),
                              InputTrace(), 0.0, 0.0, opts);
  REQUIRE(trace.steps.size() == 1);
  CHECK(trace.steps[0].rect[0].contains(1.0));
}

TEST_CASE("hybrid_simulate: one mode matches simulate bit-exactly") {
  const auto p = toy(kRotor);
  SimOptions opts;
  opts.eps = 0.05;
  opts.tau = 0.1;
  const auto a = simulate(p.plant, 0, Eigen::Vector2d(1.0, 0.0), InputTrace(), 0.0,
                          3.0, opts);
  const auto b = hybrid_simulate(p.plant, 0, Eigen::Vector2d(1.0, 0.0), InputTrace(),
                                 0.0, 3.0, opts);
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].rect[0].lo == b.steps[i].rect[0].lo);
  }
}

TEST_CASE("hybrid_simulate: two-mode toy localizes the crossing") {
  const auto p = toy(kTwoMode);
  SimOptions opts;
  opts.eps = 0.05;
  opts.tau = 0.1;
  const auto trace = hybrid_simulate(p.plant, 0, Eigen::VectorXd::Zero(1),
                                     InputTrace(), 0.0, 2.0, opts);
  // find the switch step
  double t_switch = -1.0;
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    if (trace.fired[i] >= 0) {
      t_switch = trace.steps[i].t_end;
      break;
    }
  }
  REQUIRE(t_switch > 0.0);
  CHECK(std::fabs(t_switch - 1.0) <= opts.tau);
  // closed form: x(t) = t before 1, 2 - t after
  for (const auto& s : trace.steps) {
    for (double t : {s.t_start, s.t_end}) {
      const double x = t <= 1.0 ? t : 2.0 - t;
      CHECK(s.rect[0].lo <= x + 1e-9);
      CHECK(s.rect[0].hi >= x - 1e-9);
    }
  }
  // ends near 0 again
  CHECK(trace.points.back()[0] == doctest::Approx(0.0).epsilon(0.02));
}

TEST_CASE("hybrid_simulate: chattering guards raise livelock") {
  const char* text = R"(
[dimensions]
state x
[mode a]
d/dt x = 1
[mode b]
d/dt x = -1
[transition]
from: a
to: b
guard: x >= 0
[transition]
from: b
to: a
guard: x <= 0
[initial]
x = [-0.01, -0.01]
mode: a
[horizon]
5
)";
  const auto p = toy(text);
  SimOptions opts;
  opts.eps = 0.5;
  opts.tau = 0.2;
  opts.max_mode_switches = 40;
  CHECK_THROWS_AS(hybrid_simulate(p.plant, 0, Eigen::VectorXd::Constant(1, -0.01),
                                  InputTrace(), 0.0, 5.0, opts),
                  SimError);
}

TEST_CASE("input traces: ramp is piecewise linear within range") {
  const auto ramp = circuits::make_ramp_input({});
  const InputTrace u = simulate_input(ramp, 6.4);
  double prev = u.at(0.0)[0];
  for (double t = 0.0; t <= 6.4; t += 0.01) {
    const double v = u.at(t)[0];
    CHECK(v >= -1e-4);  // urgent-crossing undershoot is ~slope * tol_loc
    CHECK(v <= 1.2 + 1e-6);
    CHECK(std::fabs(v - prev) < 0.02 + 1e-6);  // continuity (slope 1.5 * 0.01)
    prev = v;
  }
  // reaches the plateau and returns
  CHECK(u.at(2.0)[0] == doctest::Approx(1.2).epsilon(1e-3));
  CHECK(u.at(6.0)[0] == doctest::Approx(0.0).epsilon(1e-2));
}

TEST_CASE("input traces: sig rise matches the closed-form logistic") {
  const auto sig = circuits::make_sig_input({{"u0", 0.1}, {"t_fall", 3.2}});
  const InputTrace u = simulate_input(sig, 3.0, 1e-4, 0.02);
  // du/dt = -1.5 (u - u_hi)(u - u_lo) with roots u_hi/u_lo of the quadratic
  const double disc = std::sqrt(1.8 * 1.8 + 4 * 1.5 * 0.0015);
  const double u_hi = (1.8 + disc) / 3.0;
  const double u_lo = (1.8 - disc) / 3.0;
  const double rate = 1.5 * (u_hi - u_lo);
  const double c0 = (0.1 - u_lo) / (u_hi - 0.1);
  for (double t = 0.0; t <= 3.0; t += 0.11) {
    const double e = c0 * std::exp(rate * t);
    const double exact = (u_hi * e + u_lo) / (e + 1.0);
    CHECK(u.at(t)[0] == doctest::Approx(exact).epsilon(1e-3));
  }
}

TEST_CASE("input traces: steep ramp approximates a step") {
  const auto ramp = circuits::make_ramp_input(
      {{"t_start", 0.1}, {"rise_time", 0.002}, {"t_fall", 3.0}});
  const InputTrace u = simulate_input(ramp, 1.0, 1e-4, 0.001);
  CHECK(u.at(0.5)[0] == doctest::Approx(1.2).epsilon(1e-3 / 1.2));
  CHECK(std::fabs(u.at(0.5)[0] - 1.2) < 1e-3);
}

TEST_CASE("simulate: cardiac trajectory rises then settles") {
  const auto p = circuits::build_cardiac();
  const InputTrace u = simulate_input(*p.input, p.horizon);
  SimOptions opts;
  opts.eps = 0.05;
  opts.tau = 0.1;
  const auto trace = simulate(p.plant, 0, Eigen::Vector2d(0.5, 0.24), u, 0.0,
                              p.horizon, opts);
  double x1_peak = 0.0;
  for (const auto& pt : trace.points) x1_peak = std::max(x1_peak, pt[0]);
  CHECK(x1_peak > 0.7);          // rises under the pulse
  CHECK(x1_peak < 2.0);          // stays bounded
  const double x1_end = trace.points.back()[0];
  CHECK(x1_end < x1_peak - 0.05);  // settles back down after the pulse
}

TEST_CASE("hybrid inverter: ramp drive stays consistent with its regions") {
  const auto spec = circuits::CircuitSpec::defaults();
  const auto p = circuits::build_inverter_hybrid(spec, "ramp");
  const InputTrace u = simulate_input(*p.input, p.horizon);
  SimOptions opts;
  opts.eps = 0.1;
  opts.tau = 0.05;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 1.18);
  const auto trace =
      hybrid_simulate(p.plant, p.resolve_initial_mode(x0), x0, u, 0.0, p.horizon, opts);
  // Every sampled point satisfies the invariant of the mode the simulation
  // says it is in; a missing arc would strand the run in a stale mode.
  int switches = 0;
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    if (trace.fired[i] >= 0) ++switches;
    const auto& mode = p.plant.modes[static_cast<size_t>(trace.steps[i].mode)];
    const Eigen::VectorXd& x = trace.points[i + 1];
    CHECK(predicate_holds(mode.invariant, x, u.at(trace.times[i + 1]), 0.02));
  }
  CHECK(switches >= 6);  // down and up the mode ladder
  // output ends high again after the pulse
  CHECK(trace.points.back()[0] > 1.0);
}
