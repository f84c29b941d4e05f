#include "reachverify/discrepancy.hpp"
#include <cstdio>
#include <cstdlib>

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace reachverify {

// ---------------------------------------------------------------------------
// PiecewiseDiscrepancy
// ---------------------------------------------------------------------------

double PiecewiseDiscrepancy::factor(double t) const {
  if (pieces.empty()) return 1.0;
  if (t <= pieces.front().t_start) return pieces.front().factor_start;
  for (const auto& p : pieces) {
    if (t <= p.t_end) {
      return p.factor_start * std::exp(p.gamma * (t - p.t_start));
    }
  }
  const auto& last = pieces.back();
  return last.factor_start * std::exp(last.gamma * (last.t_end - last.t_start));
}

double PiecewiseDiscrepancy::max_factor(double t0, double t1) const {
  if (pieces.empty()) return 1.0;
  double best = 0.0;
  bool touched = false;
  for (const auto& p : pieces) {
    if (p.t_end < t0 || p.t_start > t1) continue;
    const double a = std::max(t0, p.t_start);
    const double b = std::min(t1, p.t_end);
    const double fa = p.factor_start * std::exp(p.gamma * (a - p.t_start));
    const double fb = p.factor_start * std::exp(p.gamma * (b - p.t_start));
    best = std::max({best, fa, fb});
    touched = true;
  }
  if (!touched) best = std::max(factor(t0), factor(t1));
  return best;
}

const TubeSegment& Reachtube::segment_at(double t) const {
  for (const auto& s : segments) {
    if (t <= s.t_end) return s;
  }
  return segments.back();
}

// ---------------------------------------------------------------------------
// Interval Jacobian and gamma
// ---------------------------------------------------------------------------

IntervalMatrix interval_jacobian(const ExprMatrix& jac_exprs, const Box& s,
                                 const Box& u) {
  const Eigen::Index rows = static_cast<Eigen::Index>(jac_exprs.size());
  const Eigen::Index cols =
      rows > 0 ? static_cast<Eigen::Index>(jac_exprs[0].size()) : 0;
  Eigen::MatrixXd lo(rows, cols), hi(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Interval r = eval_interval(
          jac_exprs[static_cast<size_t>(i)][static_cast<size_t>(j)], s, u);
      lo(i, j) = r.lo;
      hi(i, j) = r.hi;
    }
  }
  return IntervalMatrix(std::move(lo), std::move(hi));
}

IntervalMatrix interval_jacobian(const ExprVector& f, const Box& s, const Box& u) {
  return interval_jacobian(jacobian(f, JacobianKind::kState, static_cast<int>(s.size())),
                           s, u);
}

double gamma_bound(const IntervalMatrix& m) {
  const Eigen::MatrixXd c = m.center();
  const Eigen::MatrixXd sym_c = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym_c, Eigen::EigenvaluesOnly);
  const double lam_center = es.eigenvalues().maxCoeff();

  // Weyl: lambda_max(sym_c + D) <= lambda_max(sym_c) + rho(D), and rho(D)
  // is bounded by both the Frobenius norm and the max row sum of the
  // symmetrized half-width.
  const Eigen::MatrixXd e = m.half_width();
  const Eigen::MatrixXd sym_e = 0.5 * (e + e.transpose());
  const double perturbation =
      std::min(sym_e.norm(), sym_e.rowwise().sum().maxCoeff());

  const double safeguard = static_cast<double>(m.rows()) *
                           std::numeric_limits<double>::epsilon() * sym_c.norm();
  return lam_center + perturbation + safeguard;
}

double lipschitz_bound(const ExprMatrix& jx_exprs, const Box& s, const Box& u) {
  const IntervalMatrix j = interval_jacobian(jx_exprs, s, u);
  const Eigen::MatrixXd mag = j.magnitude();
  // l2 log/operator norms are bounded by sqrt(|A|_1 |A|_inf).
  const double row = mag.rowwise().sum().maxCoeff();
  const double col = mag.colwise().sum().maxCoeff();
  return std::sqrt(row * col);
}

Box coarse_enclosure(const std::vector<SimStep>& segment, double delta, double L) {
  if (segment.empty()) throw DiscrepancyError("empty trace segment", 0);
  Box acc = segment.front().rect;
  for (size_t i = 1; i < segment.size(); ++i) acc = hull(acc, segment[i].rect);
  const double t_s = segment.back().t_end - segment.front().t_start;
  const double radius = delta * std::exp(L * t_s);
  if (!std::isfinite(radius) || radius > 1e12) {
    throw DiscrepancyError("coarse enclosure radius diverged; shorten the segment", 0);
  }
  return inflate(acc, radius);
}

// ---------------------------------------------------------------------------
// discrepancy_for_trace
// ---------------------------------------------------------------------------

namespace {

double matrix_change(const IntervalMatrix& a, const IntervalMatrix& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double scale =
          std::max({1.0, std::fabs(a.lower(i, j)), std::fabs(a.upper(i, j))});
      worst = std::max(worst, std::fabs(a.lower(i, j) - b.lower(i, j)) / scale);
      worst = std::max(worst, std::fabs(a.upper(i, j) - b.upper(i, j)) / scale);
    }
  }
  return worst;
}

struct SegmentAnalysis {
  Box enclosure;
  double gamma = 0.0;
  IntervalMatrix jac;
};

// Lipschitz constant iterated to a fixed point (<= 3 passes) as the
// pre-condition of the coarse enclosure demands.
double iterated_lipschitz(const ExprMatrix& jx, const std::vector<SimStep>& segment,
                          double delta, const Box& u_box) {
  Box guess = segment.front().rect;
  for (size_t i = 1; i < segment.size(); ++i) guess = hull(guess, segment[i].rect);
  guess = inflate(guess, delta);
  double L = lipschitz_bound(jx, guess, u_box);
  const double t_s = segment.back().t_end - segment.front().t_start;
  for (int pass = 0; pass < 3; ++pass) {
    if (L * t_s > 30.0) {
      throw DiscrepancyError("Lipschitz fixed point diverged; segment too long", 0);
    }
    const Box s = coarse_enclosure(segment, delta, L);
    const double l_next = lipschitz_bound(jx, s, u_box);
    if (l_next <= L * 1.0001) break;
    L = l_next;
  }
  if (L * t_s > 30.0) {
    throw DiscrepancyError("Lipschitz fixed point diverged; segment too long", 0);
  }
  return L;
}

SegmentAnalysis analyze_segment(const ExprMatrix& jx,
                                const std::vector<SimStep>& segment, double delta,
                                const InputTrace& u) {
  const Box u_box = u.dim() > 0
                        ? u.window_box(segment.front().t_start, segment.back().t_end)
                        : Box{};
  const double L = iterated_lipschitz(jx, segment, delta, u_box);
  SegmentAnalysis out;
  out.enclosure = coarse_enclosure(segment, delta, L);
  out.jac = interval_jacobian(jx, out.enclosure, u_box);
  out.gamma = gamma_bound(out.jac);
  return out;
}

// Neighboring trajectories cross a guard later than the reference by up to
// beta / (normal crossing speed); during the delay the two mode fields
// disagree by |f_new - f_old|. The resulting growth is multiplicative in
// beta, which keeps the discrepancy exactly linear in the initial distance.
// Input-driven guards (no state dependence) switch synchronously: factor 1.
double switch_multiplier(const HybridAutomaton& aut, const SimStep& step,
                         int transition, const InputTrace& u) {
  const Transition& tr = aut.transitions[static_cast<size_t>(transition)];
  const Box u_box =
      u.dim() > 0 ? u.window_box(step.t_start, step.t_end) : Box{};
  const ExprVector& f_old = aut.modes[static_cast<size_t>(tr.from)].field;
  const ExprVector& f_new = aut.modes[static_cast<size_t>(tr.to)].field;
  Box old_f, new_f;
  try {
    old_f = eval_field_interval(f_old, step.rect, u_box);
    new_f = eval_field_interval(f_new, step.rect, u_box);
  } catch (const DomainError&) {
    return 100.0;  // conservative fallback
  }
  double diff_sq = 0.0;
  for (size_t i = 0; i < old_f.size(); ++i) {
    const double d = std::max(std::fabs(new_f[i].hi - old_f[i].lo),
                              std::fabs(old_f[i].hi - new_f[i].lo));
    diff_sq += d * d;
  }
  const double field_gap = std::sqrt(diff_sq);
  if (field_gap == 0.0) return 1.0;

  // Slowest traversal speed normal to the guard, from the state part only.
  double v_min = std::numeric_limits<double>::infinity();
  bool state_dependent = false;
  for (const auto& ineq : tr.guard) {
    const double norm = ineq.state_coef.size() ? ineq.state_coef.norm() : 0.0;
    if (norm == 0.0) continue;
    state_dependent = true;
    Interval speed = Interval::point(0.0);
    for (Eigen::Index i = 0; i < ineq.state_coef.size(); ++i) {
      if (ineq.state_coef[i] == 0.0) continue;
      speed = speed + Interval::point(ineq.state_coef[i] / norm) *
                          old_f[static_cast<size_t>(i)];
    }
    v_min = std::min(v_min, speed.mig());
  }
  if (!state_dependent) return 1.0;  // synchronous switch
  if (v_min <= 1e-12 * field_gap) return 100.0;  // tangential: branches cover
  return std::min(100.0, 1.0 + field_gap / v_min);
}

}  // namespace

PiecewiseDiscrepancy discrepancy_for_trace(const HybridAutomaton& aut,
                                           const SimTrace& trace, double delta,
                                           const InputTrace& u,
                                           const DiscrepancyOptions& opts) {
  PiecewiseDiscrepancy disc;
  disc.delta0 = delta;
  if (trace.steps.empty()) return disc;

  std::vector<ExprMatrix> jx_cache(aut.modes.size());
  auto jx_for = [&](int mode) -> const ExprMatrix& {
    auto& slot = jx_cache[static_cast<size_t>(mode)];
    if (slot.empty()) {
      slot = jacobian(aut.modes[static_cast<size_t>(mode)].field,
                      JacobianKind::kState, aut.n);
    }
    return slot;
  };

  double factor = 1.0;
  size_t i = 0;
  int segment_index = 0;
  while (i < trace.steps.size()) {
    const int mode = trace.steps[i].mode;
    const ExprMatrix& jx = jx_for(mode);
    const double delta_here = delta * factor;

    // Degenerate step (zero-duration horizon): nothing to analyze.
    if (trace.steps[i].t_end <= trace.steps[i].t_start) {
      ++i;
      continue;
    }

    // Grow the segment while the Jacobian interval stays put.
    std::vector<SimStep> segment = {trace.steps[i]};
    SegmentAnalysis current;
    try {
      current = analyze_segment(jx, segment, delta_here, u);
    } catch (const DomainError& e) {
      throw DiscrepancyError(e.what(), segment_index);
    } catch (const DiscrepancyError& e) {
      throw DiscrepancyError(e.what(), segment_index);
    }
    size_t j = i + 1;
    while (j < trace.steps.size() &&
           static_cast<int>(segment.size()) < opts.max_merge_steps &&
           trace.steps[j].mode == mode) {
      std::vector<SimStep> extended = segment;
      extended.push_back(trace.steps[j]);
      SegmentAnalysis cand;
      try {
        cand = analyze_segment(jx, extended, delta_here, u);
      } catch (const DomainError&) {
        break;
      } catch (const DiscrepancyError&) {
        break;
      }
      if (matrix_change(current.jac, cand.jac) > opts.jacobian_change_tol) break;
      segment = std::move(extended);
      current = std::move(cand);
      ++j;
    }

    // Feedback: the enclosure must contain the tube this gamma implies.
    const double t0 = segment.front().t_start;
    const double t1 = segment.back().t_end;
    bool ok = false;
    for (int retry = 0; retry <= opts.max_enclosure_retries; ++retry) {
      const double beta_max =
          delta_here * std::max(1.0, std::exp(current.gamma * (t1 - t0)));
      if (!std::isfinite(beta_max) || beta_max > 1e12) break;  // force a split
      Box needed = segment.front().rect;
      for (size_t k = 1; k < segment.size(); ++k) needed = hull(needed, segment[k].rect);
      needed = inflate(needed, beta_max);
      if (contains(current.enclosure, needed)) {
        ok = true;
        break;
      }
      // Recompute once over the enlarged set; if gamma grows the check
      // repeats, up to the retry limit.
      current.enclosure = inflate(needed, 0.05 * beta_max);
      const Box u_box = u.dim() > 0 ? u.window_box(t0, t1) : Box{};
      try {
        current.jac = interval_jacobian(jx, current.enclosure, u_box);
        current.gamma = gamma_bound(current.jac);
      } catch (const DomainError& e) {
        throw DiscrepancyError(e.what(), segment_index);
      }
    }
    if (!ok && segment.size() > 1) {
      // Split: retry from i with the single-step segment.
      segment.resize(1);
      try {
        current = analyze_segment(jx, segment, delta_here, u);
      } catch (const DomainError& e) {
        throw DiscrepancyError(e.what(), segment_index);
      }
      j = i + 1;
      const double tb = segment.back().t_end;
      for (int retry = 0; retry <= opts.max_enclosure_retries && !ok; ++retry) {
        const double beta_max =
            delta_here * std::max(1.0, std::exp(current.gamma * (tb - t0)));
        if (!std::isfinite(beta_max) || beta_max > 1e12) break;
        Box needed = inflate(segment.front().rect, beta_max);
        if (contains(current.enclosure, needed)) {
          ok = true;
          break;
        }
        current.enclosure = inflate(needed, 0.05 * beta_max);
        const Box u_box = u.dim() > 0 ? u.window_box(t0, tb) : Box{};
        current.jac = interval_jacobian(jx, current.enclosure, u_box);
        current.gamma = gamma_bound(current.jac);
      }
    }
    if (!ok) {
      if (std::getenv("REACHVERIFY_DEBUG")) {
        std::fprintf(stderr,
                     "[disc] segment %d: steps %zu..%zu delta_here=%g gamma=%g "
                     "t0=%g t1=%g enclosure[0]=[%g,%g]\n",
                     segment_index, i, i + segment.size() - 1, delta_here,
                     current.gamma, t0, t1, current.enclosure[0].lo,
                     current.enclosure[0].hi);
      }
      throw DiscrepancyError("enclosure failed to stabilize", segment_index);
    }

    // Guard-crossing spread at a mode switch: neighbors cross earlier or
    // later than the reference, so the inflation must already cover the
    // straddle window leading up to the switch. Applying it from the start
    // of the segment that ends in the switch does that conservatively.
    const size_t last_step = i + segment.size() - 1;
    if (last_step < trace.fired.size() && trace.fired[last_step] >= 0) {
      factor *=
          switch_multiplier(aut, trace.steps[last_step], trace.fired[last_step], u);
    }

    DiscrepancyPiece piece;
    piece.gamma = current.gamma;
    piece.t_start = segment.front().t_start;
    piece.t_end = segment.back().t_end;
    piece.factor_start = factor;
    piece.beta_start = delta * factor;
    disc.pieces.push_back(piece);

    factor *= std::exp(current.gamma * (piece.t_end - piece.t_start));
    i += segment.size();
    ++segment_index;
  }
  return disc;
}

Reachtube bloat(const SimTrace& trace, double delta, double eps,
                const PiecewiseDiscrepancy& disc) {
  Reachtube tube;
  tube.segments.reserve(trace.steps.size());
  const double d = delta + eps;
  for (const auto& step : trace.steps) {
    const double radius = disc.max_value(d, step.t_start, step.t_end);
    tube.segments.push_back(
        {inflate(step.rect, radius), step.t_start, step.t_end, step.mode});
  }
  return tube;
}

}  // namespace reachverify
