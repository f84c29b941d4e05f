#include "reachverify/sim.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "reachverify/discrepancy.hpp"

namespace reachverify {

// ---------------------------------------------------------------------------
// Field evaluation
// ---------------------------------------------------------------------------

Eigen::VectorXd eval_field(const ExprVector& field, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(field.size()));
  const Valuation v{x, u};
  for (size_t i = 0; i < field.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = eval_point(field[i], v);
  }
  return out;
}

Box eval_field_interval(const ExprVector& field, const Box& x, const Box& u) {
  Box out(field.size());
  for (size_t i = 0; i < field.size(); ++i) {
    out[i] = eval_interval(field[i], x, u);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SimTrace / InputTrace
// ---------------------------------------------------------------------------

const SimStep& SimTrace::step_at(double t) const {
  for (const auto& s : steps) {
    if (t <= s.t_end) return s;
  }
  return steps.back();
}

InputTrace InputTrace::fixed(const Eigen::VectorXd& value, double t0, double t1) {
  InputTrace out;
  out.dim_ = static_cast<int>(value.size());
  out.times_ = {t0, t1};
  out.values_ = {value, value};
  Box b(static_cast<size_t>(value.size()));
  for (Eigen::Index i = 0; i < value.size(); ++i) {
    b[static_cast<size_t>(i)] = Interval::point(value[i]);
  }
  out.interval_boxes_ = {b};
  return out;
}

InputTrace InputTrace::from_trace(const SimTrace& trace,
                                  const std::vector<int>& output_indices) {
  InputTrace out;
  out.dim_ = static_cast<int>(output_indices.size());
  out.times_ = trace.times;
  for (const auto& p : trace.points) {
    Eigen::VectorXd v(out.dim_);
    for (int j = 0; j < out.dim_; ++j) v[j] = p[output_indices[static_cast<size_t>(j)]];
    out.values_.push_back(v);
  }
  for (const auto& s : trace.steps) {
    Box b(output_indices.size());
    for (size_t j = 0; j < output_indices.size(); ++j) {
      b[j] = s.rect[static_cast<size_t>(output_indices[j])];
    }
    out.interval_boxes_.push_back(b);
  }
  return out;
}

Eigen::VectorXd InputTrace::at(double t) const {
  if (dim_ == 0) return Eigen::VectorXd();
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const size_t hi = static_cast<size_t>(it - times_.begin());
  const size_t lo = hi - 1;
  const double span = times_[hi] - times_[lo];
  if (span <= 0.0) return values_[lo];
  const double w = (t - times_[lo]) / span;
  return (1.0 - w) * values_[lo] + w * values_[hi];
}

Box InputTrace::window_box(double t0, double t1) const {
  if (dim_ == 0) return {};
  Box acc;
  bool first = true;
  for (size_t i = 0; i + 1 < times_.size(); ++i) {
    if (times_[i + 1] < t0 || times_[i] > t1) continue;
    acc = first ? interval_boxes_[i] : hull(acc, interval_boxes_[i]);
    first = false;
  }
  if (first) {
    // Window beyond the sampled range: clamp to the nearest rectangle.
    acc = t1 <= times_.front() ? interval_boxes_.front() : interval_boxes_.back();
  }
  return acc;
}

double InputTrace::window_deviation(double t0, double t1) const {
  if (dim_ == 0) return 0.0;
  double dev = 0.0;
  for (size_t i = 0; i + 1 < times_.size(); ++i) {
    if (times_[i + 1] < t0 || times_[i] > t1) continue;
    dev = std::max(dev, box_diameter(interval_boxes_[i]));
  }
  return dev;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) single step
// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd dp45_step(const ExprVector& field, const InputTrace& u, double t,
                          const Eigen::VectorXd& y, double h) {
  auto f = [&](double tt, const Eigen::VectorXd& yy) {
    return eval_field(field, yy, u.at(tt));
  };
  const Eigen::VectorXd k1 = f(t, y);
  const Eigen::VectorXd k2 = f(t + h / 5.0, y + h * (k1 / 5.0));
  const Eigen::VectorXd k3 = f(t + 3.0 * h / 10.0, y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
  const Eigen::VectorXd k4 =
      f(t + 4.0 * h / 5.0, y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
  const Eigen::VectorXd k5 =
      f(t + 8.0 * h / 9.0,
        y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3 -
                 212.0 / 729.0 * k4));
  const Eigen::VectorXd k6 =
      f(t + h, y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 +
                        49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5));
  return y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                  2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
}

// First-order Picard iteration: a box W with start + [0,h] f(W) inside W
// encloses every solution from the start box over the window.
std::optional<Box> picard_enclosure(const ExprVector& field, const Box& start,
                                    const Box& u_box, double h,
                                    const Box& initial_guess) {
  Box w = initial_guess;
  for (int iter = 0; iter < 10; ++iter) {
    Box f;
    try {
      f = eval_field_interval(field, w, u_box);
    } catch (const DomainError&) {
      return std::nullopt;
    }
    Box next(start.size());
    for (size_t i = 0; i < start.size(); ++i) {
      const double lo = start[i].lo + std::min(0.0, h * f[i].lo);
      const double hi = start[i].hi + std::max(0.0, h * f[i].hi);
      next[i] = Interval(rounding::down(lo), rounding::up(hi));
    }
    if (contains(w, next)) {
      // One tightening pass; monotone, so containment is preserved.
      Box f2;
      try {
        f2 = eval_field_interval(field, next, u_box);
      } catch (const DomainError&) {
        return next;
      }
      Box tight(start.size());
      for (size_t i = 0; i < start.size(); ++i) {
        const double lo = start[i].lo + std::min(0.0, h * f2[i].lo);
        const double hi = start[i].hi + std::max(0.0, h * f2[i].hi);
        tight[i] = Interval(rounding::down(lo), rounding::up(hi));
      }
      return contains(next, tight) ? tight : next;
    }
    // Inflate around the failed iterate and retry.
    Box grown(start.size());
    for (size_t i = 0; i < start.size(); ++i) {
      const Interval merged = hull(w[i], next[i]);
      const double pad = 0.3 * merged.width() + 1e-14;
      grown[i] = merged.inflated(pad);
    }
    w = grown;
  }
  return std::nullopt;
}

double growth_integral(double gamma, double h) {
  // int_0^h e^{gamma s} ds, robust near gamma = 0
  if (std::fabs(gamma * h) < 1e-8) return h;
  return std::expm1(gamma * h) / gamma;
}

struct ModeJacobians {
  ExprMatrix jx;
  ExprMatrix ju;
};

std::vector<ModeJacobians> build_jacobians(const HybridAutomaton& aut) {
  std::vector<ModeJacobians> out;
  out.reserve(aut.modes.size());
  for (const auto& mode : aut.modes) {
    out.push_back({jacobian(mode.field, JacobianKind::kState, aut.n),
                   jacobian(mode.field, JacobianKind::kInput, aut.m)});
  }
  return out;
}

struct StepAttempt {
  Eigen::VectorXd y_next;
  double r_next = 0.0;
  Box rect;
  double step_double_err = 0.0;
};

// One candidate step of size h with the full containment bookkeeping:
//   - Picard box W enclosing all solutions from B_r(y) over the window,
//   - cumulative radius propagated by e^{gamma h} (Jacobian log-norm bound)
//   - local error: step-doubling estimate x 10 + L h^2 |f| remainder,
//   - input interpolation error via the J_u norm.
std::optional<StepAttempt> attempt_step(const ContinuousMode& mode,
                                        const ModeJacobians& jac,
                                        const InputTrace& u, double t,
                                        const Eigen::VectorXd& y, double r,
                                        double h, double eps,
                                        double local_budget) {
  Eigen::VectorXd y_full, y_half, y_next;
  try {
    y_full = dp45_step(mode.field, u, t, y, h);
    y_half = dp45_step(mode.field, u, t, y, 0.5 * h);
    y_next = dp45_step(mode.field, u, t + 0.5 * h, y_half, 0.5 * h);
  } catch (const DomainError&) {
    return std::nullopt;
  }
  if (!y_next.allFinite() || !y_full.allFinite()) return std::nullopt;

  const double sd_err = (y_full - y_next).norm();
  const Box u_box = u.window_box(t, t + h);

  const Box start = box_around(y, r);
  Box guess = hull(start, box_around(y_next, r));
  for (size_t i = 0; i < guess.size(); ++i) {
    guess[i] = guess[i].inflated(0.2 * guess[i].width() + 2.0 * sd_err + 1e-13);
  }
  const auto w = picard_enclosure(mode.field, start, u_box, h, guess);
  if (!w) return std::nullopt;

  double gamma, lip, ju_norm = 0.0, f_max;
  try {
    const IntervalMatrix jxi = interval_jacobian(jac.jx, *w, u_box);
    gamma = gamma_bound(jxi);
    lip = jxi.magnitude().cwiseAbs().rowwise().sum().maxCoeff();
    if (u.dim() > 0) {
      const IntervalMatrix jui = interval_jacobian(jac.ju, *w, u_box);
      ju_norm = jui.magnitude().cwiseAbs().rowwise().sum().maxCoeff();
    }
    Box f = eval_field_interval(mode.field, *w, u_box);
    double acc = 0.0;
    for (const auto& iv : f) acc += iv.mag() * iv.mag();
    f_max = std::sqrt(acc);
  } catch (const DomainError&) {
    return std::nullopt;
  }

  // Endpoint error carried forward: previous radius propagated at the
  // Jacobian log-norm rate, the input-interpolation term, and the local
  // integration error (step-doubling x 10).
  const double local = 10.0 * sd_err;
  if (local > local_budget) return std::nullopt;
  const double u_dev = u.dim() > 0 ? u.window_deviation(t, t + h) : 0.0;
  const double r_next =
      r * std::exp(gamma * h) + ju_norm * u_dev * growth_integral(gamma, h) + local;

  StepAttempt out;
  out.y_next = y_next;
  out.r_next = r_next;
  // The window rectangle takes the Lipschitz remainder on top of the
  // Picard enclosure; it does not accumulate across steps.
  out.rect = inflate(hull(*w, box_around(y_next, r_next)), lip * h * h * f_max);
  out.step_double_err = sd_err;
  if (box_diameter(out.rect) > eps) return std::nullopt;
  return out;
}

bool guard_true(const Transition& tr, const Eigen::VectorXd& x,
                const Eigen::VectorXd& u) {
  return predicate_holds(tr.guard, x, u);
}

struct CrossingInfo {
  double gap = 0.0;      // sup |f_new - f_old| over the crossing rectangle
  double v_state = 0.0;  // slowest guard-normal speed from the state part
  bool state_dependent = false;
};

CrossingInfo crossing_info(const HybridAutomaton& aut, const Transition& tr,
                           const Box& rect, const Box& u_box) {
  CrossingInfo info;
  Box f_old, f_new;
  try {
    f_old = eval_field_interval(aut.modes[static_cast<size_t>(tr.from)].field,
                                rect, u_box);
    f_new = eval_field_interval(aut.modes[static_cast<size_t>(tr.to)].field,
                                rect, u_box);
  } catch (const DomainError&) {
    info.gap = std::numeric_limits<double>::infinity();
    return info;
  }
  double diff_sq = 0.0;
  for (size_t i = 0; i < f_old.size(); ++i) {
    const double d = std::max(std::fabs(f_new[i].hi - f_old[i].lo),
                              std::fabs(f_old[i].hi - f_new[i].lo));
    diff_sq += d * d;
  }
  info.gap = std::sqrt(diff_sq);

  info.v_state = std::numeric_limits<double>::infinity();
  for (const auto& ineq : tr.guard) {
    const double norm = ineq.state_coef.size() ? ineq.state_coef.norm() : 0.0;
    if (norm == 0.0) continue;
    info.state_dependent = true;
    Interval speed = Interval::point(0.0);
    for (Eigen::Index i = 0; i < ineq.state_coef.size(); ++i) {
      if (ineq.state_coef[i] == 0.0) continue;
      speed = speed + Interval::point(ineq.state_coef[i] / norm) *
                          f_old[static_cast<size_t>(i)];
    }
    info.v_state = std::min(info.v_state, speed.mig());
  }
  return info;
}

}  // namespace

// ---------------------------------------------------------------------------
// Simulation loops
// ---------------------------------------------------------------------------

namespace {

SimTrace run_simulation(const HybridAutomaton& aut, int mode0,
                        const Eigen::VectorXd& x0, const InputTrace& u, double t0,
                        double T, const SimOptions& opts, bool hybrid) {
  if (mode0 < 0 || mode0 >= static_cast<int>(aut.modes.size())) {
    throw ModelError("initial mode out of range");
  }
  SimTrace trace;
  trace.eps = opts.eps;
  trace.tau = opts.tau;
  trace.t0 = t0;
  trace.T = T;
  trace.times.push_back(t0);
  trace.points.push_back(x0);
  trace.point_err.push_back(opts.init_radius);

  if (T <= t0) {
    trace.steps.push_back({box_around(x0, opts.init_radius), t0, t0, mode0});
    return trace;
  }

  const auto jacs = build_jacobians(aut);
  const double span = T - t0;

  double t = t0;
  Eigen::VectorXd y = x0;
  double r = opts.init_radius;
  int mode = mode0;
  double h = std::min(opts.tau, span / 16.0);
  int switches_in_window = 0;
  double switch_window_start = t0;

  while (t < T - 1e-14 * span) {
    h = std::min({h, opts.tau, T - t});
    const double local_budget =
        std::max(0.02 * opts.eps * (h / span), 1e-300);

    auto attempt = attempt_step(aut.modes[static_cast<size_t>(mode)],
                                jacs[static_cast<size_t>(mode)], u, t, y, r, h,
                                opts.eps, local_budget);
    if (!attempt) {
      h *= 0.5;
      if (h < opts.h_floor) {
        if (2.0 * r > 0.8 * opts.eps) {
          throw SimError(SimError::Kind::kPrecision,
                         "accumulated enclosure radius exceeds eps at t=" +
                             std::to_string(t));
        }
        throw SimError(SimError::Kind::kStiffness,
                       "step size underflow at t=" + std::to_string(t));
      }
      continue;
    }

    double h_taken = h;
    int fired = -1;
    if (hybrid) {
      const Eigen::VectorXd u_start = u.at(t);
      Eigen::VectorXd u_end = u.at(t + h_taken);
      const auto& mode_ref = aut.modes[static_cast<size_t>(mode)];
      auto eligible = [&](const Eigen::VectorXd& x_at, const Eigen::VectorXd& u_at)
          -> int {
        for (size_t k = 0; k < aut.transitions.size(); ++k) {
          const auto& tr = aut.transitions[k];
          if (tr.from != mode) continue;
          if (!guard_true(tr, x_at, u_at)) continue;
          const bool was_true = guard_true(tr, y, u_start);
          const bool inv_broken = !predicate_holds(mode_ref.invariant, x_at, u_at, 1e-9);
          if (!was_true || inv_broken) return static_cast<int>(k);
        }
        return -1;
      };
      fired = eligible(attempt->y_next, u_end);
      if (fired >= 0) {
        const Box u_box = u.window_box(t, t + h_taken);
        const CrossingInfo info = crossing_info(
            aut, aut.transitions[static_cast<size_t>(fired)], attempt->rect, u_box);
        // Localize the earliest crossing by bisection on the step length.
        // tau/2^6 is the guaranteed tolerance; when the fields disagree
        // across the switch we bisect deeper so the crossing-time slack
        // stays well under eps.
        const double tol_loc = std::max(
            std::min(opts.tau / 64.0,
                     2e-3 * opts.eps / std::max(info.gap, 1e-12)),
            64.0 * opts.h_floor);
        double lo = 0.0, hi = h_taken;
        int iters = 0;
        while (hi - lo > tol_loc && ++iters < 60) {
          const double mid = 0.5 * (lo + hi);
          Eigen::VectorXd y_mid;
          try {
            y_mid = dp45_step(aut.modes[static_cast<size_t>(mode)].field, u, t, y, mid);
          } catch (const DomainError&) {
            break;
          }
          if (eligible(y_mid, u.at(t + mid)) >= 0) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        if (hi < h_taken) {
          // Re-validate the shortened step.
          double h_cross = std::max(hi, opts.h_floor * 4.0);
          std::optional<StepAttempt> shortened;
          while (!(shortened = attempt_step(
                       aut.modes[static_cast<size_t>(mode)],
                       jacs[static_cast<size_t>(mode)], u, t, y, r, h_cross,
                       opts.eps, local_budget)) &&
                 h_cross > opts.h_floor) {
            h_cross *= 0.5;
          }
          if (shortened) {
            attempt = shortened;
            h_taken = h_cross;
          }
        }
        u_end = u.at(t + h_taken);
        fired = eligible(attempt->y_next, u_end);
        if (fired >= 0) {
          // The true trajectory crosses within tol_loc of the numeric
          // crossing, plus its own position error divided by the guard-
          // normal speed; over that offset the two fields disagree by gap.
          double offset = tol_loc;
          if (info.state_dependent) {
            offset += attempt->r_next / std::max(info.v_state, 1e-12);
          }
          double slack = info.gap * offset;
          // Tangential crossings: fall back to the rectangle scale.
          slack = std::min(slack, 0.5 * box_diameter(attempt->rect) +
                                      info.gap * h_taken);
          attempt->r_next += slack;
          attempt->rect = hull(attempt->rect,
                               box_around(attempt->y_next, attempt->r_next));
        }
      }
    }

    trace.steps.push_back({attempt->rect, t, t + h_taken, mode});
    trace.fired.push_back(fired);
    t += h_taken;
    y = attempt->y_next;
    r = attempt->r_next;
    trace.times.push_back(t);
    trace.points.push_back(y);
    trace.point_err.push_back(r);

    if (fired >= 0) {
      mode = aut.transitions[static_cast<size_t>(fired)].to;
      if (t - switch_window_start > opts.tau) {
        switch_window_start = t;
        switches_in_window = 0;
      }
      if (++switches_in_window > opts.max_mode_switches) {
        throw SimError(SimError::Kind::kLivelock,
                       "chattering guard: >" +
                           std::to_string(opts.max_mode_switches) +
                           " switches within tau at t=" + std::to_string(t));
      }
    }

    // Step-size control on the step-doubling estimate.
    if (attempt->step_double_err < 0.1 * local_budget) {
      h = std::min(h * 1.5, opts.tau);
    } else if (attempt->step_double_err > 0.5 * local_budget) {
      h *= 0.7;
    }
  }
  return trace;
}

}  // namespace

SimTrace simulate(const HybridAutomaton& aut, int mode, const Eigen::VectorXd& x0,
                  const InputTrace& u, double t0, double T, const SimOptions& opts) {
  return run_simulation(aut, mode, x0, u, t0, T, opts, /*hybrid=*/false);
}

SimTrace hybrid_simulate(const HybridAutomaton& aut, int mode0,
                         const Eigen::VectorXd& x0, const InputTrace& u,
                         double t0, double T, const SimOptions& opts) {
  return run_simulation(aut, mode0, x0, u, t0, T, opts, /*hybrid=*/true);
}

InputTrace simulate_input(const InputSignalAutomaton& input, double T, double eps,
                          double tau) {
  SimOptions opts;
  opts.eps = eps;
  opts.tau = tau;
  const SimTrace trace = hybrid_simulate(input.automaton, input.initial_mode,
                                         input.initial_state, InputTrace(), 0.0,
                                         T, opts);
  return InputTrace::from_trace(trace, input.output_indices);
}

}  // namespace reachverify
