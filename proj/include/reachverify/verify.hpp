#ifndef REACHVERIFY_VERIFY_HPP
#define REACHVERIFY_VERIFY_HPP

#include <string>
#include <vector>

#include "reachverify/discrepancy.hpp"

namespace reachverify {

// Unit of work of the verification loop: the ball B_delta(center) of
// initial states plus the simulation precision to use for it.
struct CoverTriple {
  Eigen::VectorXd center;
  double delta = 0.0;
  double eps = 0.0;
  double tau = 0.0;
  int depth = 0;
};

enum class VerdictKind { kSafe, kUnsafe, kBudgetExceeded };

struct TimingSplit {
  double sim_seconds = 0.0;
  double discrepancy_seconds = 0.0;
  double io_seconds = 0.0;
};

struct VerifyStats {
  int triples_processed = 0;
  int max_depth = 0;
  long simulation_steps = 0;
  int spurious_branches = 0;
  TimingSplit timing;
};

struct Verdict {
  VerdictKind kind = VerdictKind::kSafe;
  std::vector<Reachtube> tubes;          // SAFE: the accumulated tube store
  SimTrace witness;                      // UNSAFE: simulation inside unsafe
  Eigen::VectorXd witness_start;
  std::vector<CoverTriple> remaining;    // BUDGET_EXCEEDED
  VerifyStats stats;
};

struct VerifyOptions {
  int budget = 12;             // refinement depth limit
  int jobs = 1;
  int max_branch_depth = 6;    // spurious continuation nesting
  int max_branches_per_triple = 64;
  double input_eps = 1e-3;     // input co-simulation precision
  double input_tau = 0.05;
};

// Axis-aligned grid of centers spaced 2 delta / sqrt(n) per axis, so the
// l2 balls of radius delta cover theta.
std::vector<CoverTriple> cover(const Box& theta, double delta, double eps,
                               double tau, int depth = 0);

// The simulate/bloat/classify/refine loop. SAFE requires every branch
// (including possibly-spurious guard continuations) to miss the unsafe
// set; UNSAFE requires a genuine simulation rectangle inside it.
Verdict verify(const VerificationProblem& problem, const VerifyOptions& opts = {});

std::string verdict_name(VerdictKind kind);

struct ClosedComparisonReport {
  double fixed_final_diameter = 0.0;
  double closed_final_diameter = 0.0;
  double ratio = 0.0;           // closed / fixed, capped
  double compare_time = 0.0;    // both diameters measured here
  bool closed_overflowed = false;
  std::string note;
};

// Runs the tube construction twice: with the input held as an external
// signal (this tool's method) and with the input folded into the state
// vector. The ratio of final tube diameters-over the plant states only-
// measures the closed-model blow-up.
ClosedComparisonReport closed_model_comparison(const VerificationProblem& problem,
                                               double delta_override = -1.0);

}  // namespace reachverify

#endif  // REACHVERIFY_VERIFY_HPP
