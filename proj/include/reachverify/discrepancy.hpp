#ifndef REACHVERIFY_DISCREPANCY_HPP
#define REACHVERIFY_DISCREPANCY_HPP

#include <vector>

#include "reachverify/sim.hpp"

namespace reachverify {

class DiscrepancyError : public std::runtime_error {
 public:
  DiscrepancyError(const std::string& what, int segment)
      : std::runtime_error(what + " (segment " + std::to_string(segment) + ")"),
        segment(segment) {}
  int segment;
};

// One exponential piece of the discrepancy function: over
// [t_start, t_end] the bound is beta_start * e^{gamma (t - t_start)}.
struct DiscrepancyPiece {
  double gamma = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double beta_start = 0.0;   // value at t_start for initial distance delta0
  double factor_start = 1.0; // growth factor at t_start (1 at trace start)
};

// Piecewise-exponential discrepancy function beta(d, t) = d * g(t) where
// g chains e^{gamma_i dt} across pieces. Linear in the initial distance by
// construction, so beta(d/2, t) == beta(d, t)/2 exactly.
class PiecewiseDiscrepancy {
 public:
  double delta0 = 0.0;
  std::vector<DiscrepancyPiece> pieces;

  double factor(double t) const;
  double value(double delta, double t) const { return delta * factor(t); }
  // max over the window; attained at window ends or piece junctions since
  // each piece is a monotone exponential.
  double max_factor(double t0, double t1) const;
  double max_value(double delta, double t0, double t1) const {
    return delta * max_factor(t0, t1);
  }
};

struct TubeSegment {
  Box box;
  double t_start = 0.0;
  double t_end = 0.0;
  int mode = 0;
};

// Time-stamped boxes over-approximating all trajectories from the ball the
// discrepancy was built for.
struct Reachtube {
  std::vector<TubeSegment> segments;
  double t_start() const { return segments.front().t_start; }
  double t_end() const { return segments.back().t_end; }
  const TubeSegment& segment_at(double t) const;
};

// Entry-wise interval evaluation of the symbolic Jacobian over S x U.
IntervalMatrix interval_jacobian(const ExprMatrix& jac_exprs, const Box& s,
                                 const Box& u);
IntervalMatrix interval_jacobian(const ExprVector& f, const Box& s, const Box& u);

// gamma with lambda_max((A + A^T)/2) <= gamma for every member A:
// lambda_max of the symmetric center plus a Weyl perturbation term,
// min(Frobenius, max row sum) of the symmetrized half-width.
double gamma_bound(const IntervalMatrix& m);

// Row-sum bound on |J_x| over the box: a Lipschitz constant for f.
double lipschitz_bound(const ExprMatrix& jx_exprs, const Box& s, const Box& u);

// Coarse reach enclosure for a trace segment: hull of the rectangles,
// Minkowski-summed with a ball of radius delta * e^{L Ts}.
Box coarse_enclosure(const std::vector<SimStep>& segment, double delta, double L);

struct DiscrepancyOptions {
  int max_merge_steps = 10;       // segment merge limit
  double jacobian_change_tol = 0.05;
  int max_enclosure_retries = 5;
};

// The four-step procedure per segment: coarse enclosure, interval
// Jacobian, gamma, chained exponential pieces. The enclosure is re-checked
// against the bloated tube it implies and enlarged or split on violation.
PiecewiseDiscrepancy discrepancy_for_trace(const HybridAutomaton& aut,
                                           const SimTrace& trace, double delta,
                                           const InputTrace& u,
                                           const DiscrepancyOptions& opts = {});

// O_i = R_i (+) ball of radius max beta(delta + eps, t) over the window,
// outer-boxed per coordinate. Requires disc built for radius delta + eps.
Reachtube bloat(const SimTrace& trace, double delta, double eps,
                const PiecewiseDiscrepancy& disc);

}  // namespace reachverify

#endif  // REACHVERIFY_DISCREPANCY_HPP
