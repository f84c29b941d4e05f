#include "reachverify/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <queue>
#include <thread>

namespace reachverify {

std::string verdict_name(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::kSafe:
      return "SAFE";
    case VerdictKind::kUnsafe:
      return "UNSAFE";
    case VerdictKind::kBudgetExceeded:
      return "BUDGET_EXCEEDED";
  }
  return "?";
}

std::vector<CoverTriple> cover(const Box& theta, double delta, double eps,
                               double tau, int depth) {
  const int n = static_cast<int>(theta.size());
  const double spacing = 2.0 * delta / std::sqrt(static_cast<double>(n));
  std::vector<int> counts(static_cast<size_t>(n));
  std::vector<double> steps(static_cast<size_t>(n));
  long total = 1;
  for (int i = 0; i < n; ++i) {
    const double w = theta[static_cast<size_t>(i)].width();
    const int c = std::max(1, static_cast<int>(std::ceil(w / spacing - 1e-12)));
    counts[static_cast<size_t>(i)] = c;
    steps[static_cast<size_t>(i)] = w / c;
    total *= c;
  }
  std::vector<CoverTriple> out;
  out.reserve(static_cast<size_t>(total));
  std::vector<int> idx(static_cast<size_t>(n), 0);
  for (long k = 0; k < total; ++k) {
    CoverTriple t;
    t.center.resize(n);
    for (int i = 0; i < n; ++i) {
      t.center[i] = theta[static_cast<size_t>(i)].lo +
                    steps[static_cast<size_t>(i)] * (idx[static_cast<size_t>(i)] + 0.5);
    }
    t.delta = delta;
    t.eps = eps;
    t.tau = tau;
    t.depth = depth;
    out.push_back(std::move(t));
    for (int i = 0; i < n; ++i) {
      if (++idx[static_cast<size_t>(i)] < counts[static_cast<size_t>(i)]) break;
      idx[static_cast<size_t>(i)] = 0;
    }
  }
  return out;
}

namespace {

double theta_diameter(const Box& theta) { return box_diameter(theta); }

// Work item: the genuine run of a cover triple or a possibly-spurious
// guard continuation spawned from a tube straddle.
struct BranchJob {
  Eigen::VectorXd center;
  double delta = 0.0;
  double t_start = 0.0;
  int mode = -1;
  bool spurious = false;
  int branch_depth = 0;
};

enum class TripleOutcome { kSafe, kUnsafe, kInconclusive };

struct TripleResult {
  TripleOutcome outcome = TripleOutcome::kInconclusive;
  std::vector<Reachtube> tubes;
  SimTrace witness;
  Eigen::VectorXd witness_start;
  long steps = 0;
  int branches = 0;
  double sim_seconds = 0.0;
  double disc_seconds = 0.0;
  std::string note;
};

class Timer {
 public:
  explicit Timer(double* sink) : sink_(sink), start_(clock::now()) {}
  ~Timer() {
    *sink_ += std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  double* sink_;
  clock::time_point start_;
};

class Verifier {
 public:
  Verifier(const VerificationProblem& problem, const VerifyOptions& opts)
      : problem_(problem), opts_(opts) {
    if (problem_.input) {
      Timer t(&stats_.timing.sim_seconds);
      u_ = simulate_input(*problem_.input, problem_.horizon, opts_.input_eps,
                          opts_.input_tau);
    }
  }

  Verdict run() {
    Verdict verdict;
    const double delta0 = std::max(theta_diameter(problem_.theta), 1e-9);
    for (auto& t : cover(problem_.theta, delta0, problem_.eps0, problem_.tau0, 0)) {
      push_triple(std::move(t));
    }

    std::vector<std::thread> workers;
    const int jobs = std::max(1, opts_.jobs);
    for (int i = 0; i < jobs; ++i) {
      workers.emplace_back([this] { worker_loop(); });
    }
    for (auto& w : workers) w.join();

    std::lock_guard<std::mutex> lock(mu_);
    verdict.stats = stats_;
    if (unsafe_found_) {
      verdict.kind = VerdictKind::kUnsafe;
      verdict.witness = witness_;
      verdict.witness_start = witness_start_;
    } else if (!remaining_.empty()) {
      verdict.kind = VerdictKind::kBudgetExceeded;
      verdict.remaining = remaining_;
      verdict.tubes = tubes_;
    } else {
      verdict.kind = VerdictKind::kSafe;
      verdict.tubes = tubes_;
    }
    return verdict;
  }

 private:
  void push_triple(CoverTriple t) {
    std::lock_guard<std::mutex> lock(mu_);
    const long seq = seq_++;
    queue_.push({{t.delta, seq}, std::move(t)});
    cv_.notify_one();
  }

  void worker_loop() {
    std::unique_lock<std::mutex> lock(mu_);
    for (;;) {
      cv_.wait(lock, [this] {
        return stop_ || !queue_.empty() || active_ == 0;
      });
      if (stop_ || (queue_.empty() && active_ == 0)) {
        cv_.notify_all();
        return;
      }
      if (queue_.empty()) continue;
      CoverTriple triple = std::move(const_cast<QueueEntry&>(queue_.top()).triple);
      queue_.pop();
      ++active_;
      lock.unlock();

      TripleResult result = process_triple(triple);

      lock.lock();
      --active_;
      stats_.triples_processed += 1;
      stats_.max_depth = std::max(stats_.max_depth, triple.depth);
      stats_.simulation_steps += result.steps;
      stats_.spurious_branches += result.branches;
      stats_.timing.sim_seconds += result.sim_seconds;
      stats_.timing.discrepancy_seconds += result.disc_seconds;
      switch (result.outcome) {
        case TripleOutcome::kSafe:
          for (auto& tube : result.tubes) tubes_.push_back(std::move(tube));
          break;
        case TripleOutcome::kUnsafe:
          if (!unsafe_found_) {
            unsafe_found_ = true;
            witness_ = std::move(result.witness);
            witness_start_ = std::move(result.witness_start);
          }
          stop_ = true;
          break;
        case TripleOutcome::kInconclusive: {
          if (triple.depth + 1 > opts_.budget) {
            remaining_.push_back(triple);
            break;
          }
          // Refine: cover the ball with delta/2, eps/2; tau is halved in
          // the refined subtree only.
          Box ball(static_cast<size_t>(triple.center.size()));
          bool nonempty = true;
          for (Eigen::Index i = 0; i < triple.center.size(); ++i) {
            const double lo = std::max(triple.center[i] - triple.delta,
                                       problem_.theta[static_cast<size_t>(i)].lo);
            const double hi = std::min(triple.center[i] + triple.delta,
                                       problem_.theta[static_cast<size_t>(i)].hi);
            if (lo > hi) {
              nonempty = false;
              break;
            }
            ball[static_cast<size_t>(i)] = Interval(lo, hi);
          }
          if (nonempty) {
            for (auto& t : cover(ball, triple.delta / 2.0, triple.eps / 2.0,
                                 triple.tau / 2.0, triple.depth + 1)) {
              const long seq = seq_++;
              queue_.push(QueueEntry{{t.delta, seq}, std::move(t)});
            }
          }
          break;
        }
      }
      cv_.notify_all();
    }
  }

  TripleResult process_triple(const CoverTriple& triple) {
    TripleResult result;
    std::vector<BranchJob> jobs;
    BranchJob root;
    root.center = triple.center;
    root.delta = triple.delta;
    root.t_start = 0.0;
    root.mode = -1;
    root.spurious = false;
    jobs.push_back(std::move(root));

    while (!jobs.empty()) {
      if (stop_after_branches(result)) return result;
      BranchJob job = std::move(jobs.back());
      jobs.pop_back();

      int mode = job.mode;
      if (mode < 0) {
        try {
          mode = problem_.resolve_initial_mode(job.center);
        } catch (const ModelError&) {
          result.outcome = TripleOutcome::kInconclusive;
          result.note = "no mode invariant holds at a cover center";
          return result;
        }
      }

      SimOptions sim_opts;
      sim_opts.eps = triple.eps;
      sim_opts.tau = triple.tau;

      SimTrace trace;
      try {
        Timer t(&result.sim_seconds);
        trace = hybrid_simulate(problem_.plant, mode, job.center, u_, job.t_start,
                                problem_.horizon, sim_opts);
      } catch (const SimError& e) {
        result.outcome = TripleOutcome::kInconclusive;
        result.note = e.what();
        return result;
      } catch (const DomainError& e) {
        result.outcome = TripleOutcome::kInconclusive;
        result.note = e.what();
        return result;
      }
      result.steps += static_cast<long>(trace.steps.size());

      // UNSAFE only from a genuine simulation rectangle inside unsafe.
      if (!job.spurious) {
        for (const auto& step : trace.steps) {
          if (check_unsafe_intersection(step.rect, problem_.unsafe) ==
              SetRelation::kContained) {
            result.outcome = TripleOutcome::kUnsafe;
            result.witness = trace;
            result.witness_start = job.center;
            return result;
          }
        }
      }

      PiecewiseDiscrepancy disc;
      try {
        Timer t(&result.disc_seconds);
        disc = discrepancy_for_trace(problem_.plant, trace, job.delta + triple.eps,
                                     u_);
      } catch (const DiscrepancyError& e) {
        result.outcome = TripleOutcome::kInconclusive;
        result.note = e.what();
        return result;
      } catch (const DomainError& e) {
        result.outcome = TripleOutcome::kInconclusive;
        result.note = e.what();
        return result;
      }
      Reachtube tube = bloat(trace, job.delta, triple.eps, disc);

      for (const auto& seg : tube.segments) {
        if (check_unsafe_intersection(seg.box, problem_.unsafe) !=
            SetRelation::kDisjoint) {
          result.outcome = TripleOutcome::kInconclusive;
          result.note = "tube reaches the unsafe set";
          return result;
        }
      }

      // Tube-level guard straddles spawn possibly-spurious continuations.
      if (job.branch_depth < opts_.max_branch_depth) {
        spawn_spurious(trace, tube, job, &jobs, &result);
      } else if (tube_straddles_any_guard(trace, tube)) {
        result.outcome = TripleOutcome::kInconclusive;
        result.note = "guard straddle beyond branch depth";
        return result;
      }

      result.tubes.push_back(std::move(tube));
    }
    result.outcome = TripleOutcome::kSafe;
    return result;
  }

  bool stop_after_branches(TripleResult& result) {
    if (result.branches <= opts_.max_branches_per_triple && !stop_) return false;
    result.outcome = TripleOutcome::kInconclusive;
    result.note = "too many guard-straddle branches";
    return true;
  }

  // A transition taken by the genuine trace near this segment is covered by
  // the genuine continuation; everything else that the tube touches is not.
  bool fired_nearby(const SimTrace& trace, size_t seg, size_t transition) const {
    const size_t lo = seg >= 3 ? seg - 3 : 0;
    const size_t hi = std::min(trace.fired.size(), seg + 4);
    for (size_t k = lo; k < hi; ++k) {
      if (trace.fired[k] == static_cast<int>(transition)) return true;
    }
    return false;
  }

  bool tube_straddles_any_guard(const SimTrace& trace, const Reachtube& tube) const {
    for (size_t i = 0; i < tube.segments.size(); ++i) {
      const auto& seg = tube.segments[i];
      for (size_t k = 0; k < problem_.plant.transitions.size(); ++k) {
        const auto& tr = problem_.plant.transitions[k];
        if (tr.from != seg.mode || fired_nearby(trace, i, k)) continue;
        const Box u_box = u_.dim() > 0 ? u_.window_box(seg.t_start, seg.t_end) : Box{};
        if (classify_box(seg.box, u_box, tr.guard) != SetRelation::kDisjoint) {
          return true;
        }
      }
    }
    return false;
  }

  void spawn_spurious(const SimTrace& trace, const Reachtube& tube,
                      const BranchJob& parent, std::vector<BranchJob>* jobs,
                      TripleResult* result) const {
    // One open seed per transition, merged across contiguous segments.
    struct Seed {
      Box box;
      double t_first = 0.0;
      bool open = false;
    };
    std::vector<Seed> seeds(problem_.plant.transitions.size());
    auto close_seed = [&](size_t k) {
      Seed& s = seeds[k];
      if (!s.open) return;
      s.open = false;
      BranchJob job;
      job.center = box_center(s.box);
      job.delta = 0.5 * box_diameter(s.box) + 1e-12;
      job.t_start = s.t_first;
      job.mode = problem_.plant.transitions[k].to;
      job.spurious = true;
      job.branch_depth = parent.branch_depth + 1;
      jobs->push_back(std::move(job));
      result->branches += 1;
    };

    for (size_t i = 0; i < tube.segments.size(); ++i) {
      const auto& seg = tube.segments[i];
      for (size_t k = 0; k < problem_.plant.transitions.size(); ++k) {
        const auto& tr = problem_.plant.transitions[k];
        Seed& s = seeds[k];
        const bool relevant = tr.from == seg.mode && !fired_nearby(trace, i, k);
        bool straddles = false;
        if (relevant) {
          const Box u_box =
              u_.dim() > 0 ? u_.window_box(seg.t_start, seg.t_end) : Box{};
          straddles = classify_box(seg.box, u_box, tr.guard) != SetRelation::kDisjoint;
        }
        if (straddles) {
          if (!s.open) {
            s.open = true;
            s.box = seg.box;
            s.t_first = seg.t_start;
          } else {
            s.box = hull(s.box, seg.box);
          }
        } else {
          close_seed(k);
        }
      }
    }
    for (size_t k = 0; k < seeds.size(); ++k) close_seed(k);
  }

  const VerificationProblem& problem_;
  const VerifyOptions opts_;
  InputTrace u_;

  std::mutex mu_;
  std::condition_variable cv_;
  struct QueueEntry {
    std::pair<double, long> key;  // (delta, insertion sequence)
    CoverTriple triple;
  };
  struct QueueOrder {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
      if (a.key.first != b.key.first) return a.key.first < b.key.first;
      return a.key.second > b.key.second;  // FIFO among equal deltas
    }
  };
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> queue_;
  long seq_ = 0;
  int active_ = 0;
  std::atomic<bool> stop_ = false;
  bool unsafe_found_ = false;
  SimTrace witness_;
  Eigen::VectorXd witness_start_;
  std::vector<Reachtube> tubes_;
  std::vector<CoverTriple> remaining_;
  VerifyStats stats_;
};

}  // namespace

Verdict verify(const VerificationProblem& problem, const VerifyOptions& opts) {
  problem.validate();
  Verifier verifier(problem, opts);
  return verifier.run();
}

// ---------------------------------------------------------------------------
// Closed-model comparison
// ---------------------------------------------------------------------------

namespace {

double plant_diameter(const Box& box, int n_plant) {
  double acc = 0.0;
  for (int i = 0; i < n_plant && i < static_cast<int>(box.size()); ++i) {
    const double w = box[static_cast<size_t>(i)].width();
    acc += w * w;
  }
  return std::sqrt(acc);
}

struct TubeRun {
  Reachtube tube;
  SimTrace trace;
  bool failed = false;
  double t_end = 0.0;
  std::string note;
};

TubeRun build_tube(const HybridAutomaton& aut, int mode0, const Eigen::VectorXd& x0,
                   const InputTrace& u, double T, double delta, double eps,
                   double tau) {
  TubeRun run;
  SimOptions opts;
  opts.eps = eps;
  opts.tau = tau;
  try {
    run.trace = hybrid_simulate(aut, mode0, x0, u, 0.0, T, opts);
    // The comparison metric uses the pure delta-bloat so that delta = 0
    // degenerates to the bare simulations on both sides.
    const PiecewiseDiscrepancy disc = discrepancy_for_trace(aut, run.trace, delta, u);
    run.tube = bloat(run.trace, delta, 0.0, disc);
    run.t_end = run.tube.segments.back().t_end;
  } catch (const std::exception& e) {
    run.failed = true;
    run.note = e.what();
  }
  return run;
}

}  // namespace

ClosedComparisonReport closed_model_comparison(const VerificationProblem& problem,
                                               double delta_override) {
  problem.validate();
  if (!problem.input) {
    throw ModelError("closed-model comparison needs an input automaton");
  }
  ClosedComparisonReport report;
  const double cap = 1e12;
  const double delta =
      delta_override >= 0.0 ? delta_override : theta_diameter(problem.theta);
  const Eigen::VectorXd x0 = box_center(problem.theta);
  const double T = problem.horizon;

  // (a) fixed-input discrepancy.
  const InputTrace u = simulate_input(*problem.input, T);
  const int mode0 = problem.resolve_initial_mode(x0);
  TubeRun fixed = build_tube(problem.plant, mode0, x0, u, T, delta,
                             problem.eps0, problem.tau0);
  if (fixed.failed) {
    report.note = "fixed-input run failed: " + fixed.note;
    report.closed_overflowed = true;
    report.ratio = cap;
    return report;
  }

  // (b) input as additional state variables.
  const HybridAutomaton closed = compose(problem.plant, *problem.input);
  Eigen::VectorXd z0(closed.n);
  z0.head(problem.plant.n) = x0;
  z0.tail(problem.input->automaton.n) = problem.input->initial_state;
  int closed_mode = closed.initial_mode_for(z0, Eigen::VectorXd());
  if (closed_mode < 0) closed_mode = 0;
  TubeRun closed_run = build_tube(closed, closed_mode, z0, InputTrace(), T, delta,
                                  problem.eps0, problem.tau0);

  double t_cmp = fixed.t_end;
  double closed_dia, closed_excess;
  if (closed_run.failed && closed_run.tube.segments.empty()) {
    // Blew up immediately; report the cap.
    report.closed_overflowed = true;
    report.note = "closed-model run failed: " + closed_run.note;
    closed_dia = cap;
    closed_excess = cap;
  } else {
    if (closed_run.failed) {
      report.closed_overflowed = true;
      report.note = "closed-model run stopped early: " + closed_run.note;
      t_cmp = std::min(t_cmp, closed_run.tube.segments.back().t_end);
    }
    const TubeSegment& seg = closed_run.tube.segment_at(t_cmp);
    closed_dia = plant_diameter(seg.box, problem.plant.n);
    const double rect_dia =
        plant_diameter(closed_run.trace.step_at(t_cmp).rect, problem.plant.n);
    closed_excess = std::max(closed_dia - rect_dia, 0.0);
    if (!std::isfinite(closed_dia) || closed_dia > cap) {
      closed_dia = cap;
      closed_excess = cap;
      report.closed_overflowed = true;
    }
  }

  const TubeSegment& fixed_seg = fixed.tube.segment_at(t_cmp);
  const double fixed_dia = plant_diameter(fixed_seg.box, problem.plant.n);
  const double fixed_rect_dia =
      plant_diameter(fixed.trace.step_at(t_cmp).rect, problem.plant.n);
  const double fixed_excess = std::max(fixed_dia - fixed_rect_dia, 0.0);

  report.fixed_final_diameter = fixed_dia;
  report.closed_final_diameter = closed_dia;
  report.compare_time = t_cmp;
  // Ratio of the delta-induced bloat; when delta = 0 both sides carry no
  // bloat beyond the simulation rectangles and the ratio is 1 by
  // definition.
  const double tol = 1e-12 + 1e-6 * std::max(fixed_rect_dia, 1e-12);
  if (closed_excess <= tol && fixed_excess <= tol) {
    report.ratio = 1.0;
  } else {
    report.ratio = std::min(cap, closed_excess / std::max(fixed_excess, 1e-300));
  }
  return report;
}

}  // namespace reachverify
