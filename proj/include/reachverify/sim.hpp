#ifndef REACHVERIFY_SIM_HPP
#define REACHVERIFY_SIM_HPP

#include <vector>

#include <Eigen/Dense>

#include "reachverify/model.hpp"

namespace reachverify {

class SimError : public std::runtime_error {
 public:
  enum class Kind { kStiffness, kPrecision, kLivelock };
  SimError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind(kind) {}
  Kind kind;
};

// One time-stamped rectangle of a validated simulation: guaranteed to
// contain the true trajectory over [t_start, t_end].
struct SimStep {
  Box rect;
  double t_start = 0.0;
  double t_end = 0.0;
  int mode = 0;
};

// (eps, tau, T)-simulation: rectangles of l2 diameter <= eps, time steps
// <= tau, abutting over [t0, T], containing one trajectory. The numeric
// path and its rigorous error radius ride along for diagnostics and
// counterexample confirmation.
struct SimTrace {
  std::vector<SimStep> steps;
  std::vector<double> times;              // step boundaries, size steps+1
  std::vector<Eigen::VectorXd> points;    // numeric path at times
  std::vector<double> point_err;          // l2 bound on |true - numeric|
  std::vector<int> fired;                 // transition taken at step end, -1 if none
  double eps = 0.0;
  double tau = 0.0;
  double t0 = 0.0;
  double T = 0.0;

  const SimStep& step_at(double t) const;  // step whose window contains t
  Box final_rect() const { return steps.back().rect; }
};

// Piecewise-linear readout of a fixed input signal, with the validated
// rectangles kept for sound window hulls.
class InputTrace {
 public:
  InputTrace() = default;
  static InputTrace fixed(const Eigen::VectorXd& value, double t0, double t1);
  static InputTrace from_trace(const SimTrace& trace,
                               const std::vector<int>& output_indices);

  int dim() const { return dim_; }
  bool empty() const { return dim_ == 0; }
  Eigen::VectorXd at(double t) const;
  // Hull of the validated input rectangles over the window.
  Box window_box(double t0, double t1) const;
  // Bound on |u_true(t) - at(t)| over the window.
  double window_deviation(double t0, double t1) const;

 private:
  int dim_ = 0;
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> values_;
  std::vector<Box> interval_boxes_;  // per [times_[i], times_[i+1]]
};

struct SimOptions {
  double eps = 0.05;
  double tau = 0.1;
  double init_radius = 0.0;   // containment radius carried in at t0
  double h_floor = 1e-10;
  int max_mode_switches = 10000;  // within one tau window -> livelock
};

// Validated simulation of a single mode (transitions ignored).
SimTrace simulate(const HybridAutomaton& aut, int mode, const Eigen::VectorXd& x0,
                  const InputTrace& u, double t0, double T, const SimOptions& opts);

// Validated simulation with urgent transitions: switches at the first step
// where a guard crossing is detected, localized by time bisection to
// tau/2^6. Identity resets.
SimTrace hybrid_simulate(const HybridAutomaton& aut, int mode0,
                         const Eigen::VectorXd& x0, const InputTrace& u,
                         double t0, double T, const SimOptions& opts);

// Simulates the input automaton and packages it for plant consumption.
InputTrace simulate_input(const InputSignalAutomaton& input, double T,
                          double eps = 1e-3, double tau = 0.05);

Eigen::VectorXd eval_field(const ExprVector& field, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u);
Box eval_field_interval(const ExprVector& field, const Box& x, const Box& u);

}  // namespace reachverify

#endif  // REACHVERIFY_SIM_HPP
