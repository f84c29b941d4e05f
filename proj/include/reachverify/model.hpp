#ifndef REACHVERIFY_MODEL_HPP
#define REACHVERIFY_MODEL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reachverify/expr.hpp"
#include "reachverify/interval.hpp"

namespace reachverify {

class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// One affine inequality: state_coef . x + input_coef . u <= bound.
struct AffineIneq {
  Eigen::VectorXd state_coef;
  Eigen::VectorXd input_coef;
  double bound = 0.0;

  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
  bool holds(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
             double tol = 0.0) const;
  // Exact range of the left-hand side over boxes.
  Interval range(const Box& state_box, const Box& input_box) const;
};

// Conjunction of affine inequalities; empty list means "everywhere".
using Predicate = std::vector<AffineIneq>;

bool predicate_holds(const Predicate& p, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, double tol = 0.0);

enum class SetRelation { kDisjoint, kContained, kOverlapping };

// Classifies a box against the set defined by a conjunction of affine
// inequalities. Exact for affine predicates vs. boxes: emptiness of the
// intersection is decided by vertex enumeration of the joint polytope.
SetRelation classify_box(const Box& state_box, const Box& input_box,
                         const Predicate& p);

// Specialization over state-only predicates (the unsafe set).
SetRelation check_unsafe_intersection(const Box& box, const Predicate& unsafe);

// Parses "lhs <=|>=|<|> rhs" with affine sides into normal form. Strict
// comparisons are closed (the paper's sets are closed); throws ModelError
// on nonlinear terms.
AffineIneq parse_affine_ineq(const std::string& text,
                             const std::vector<std::string>& state_names,
                             const std::vector<std::string>& input_names);

struct ContinuousMode {
  std::string name;
  ExprVector field;      // d/dt of each state variable
  Predicate invariant;
};

struct Transition {
  int from = -1;
  int to = -1;
  Predicate guard;
};

struct HybridAutomaton {
  int n = 0;  // state dimension
  int m = 0;  // input dimension
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;
  std::vector<ContinuousMode> modes;
  std::vector<Transition> transitions;

  int mode_index(const std::string& name) const;
  // First mode (file order) whose invariant holds at (x, u); -1 if none.
  int initial_mode_for(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       double tol = 1e-9) const;
  void validate() const;
};

// Autonomous hybrid automaton whose selected state variables drive the
// plant's input channels.
struct InputSignalAutomaton {
  HybridAutomaton automaton;          // must have m == 0
  std::vector<int> output_indices;    // size = plant input dimension
  Eigen::VectorXd initial_state;
  int initial_mode = 0;
};

struct VerificationProblem {
  std::string name;
  HybridAutomaton plant;
  std::optional<InputSignalAutomaton> input;
  Box theta;              // initial set
  int initial_mode = -1;  // -1: infer from invariants at the center of theta
  Predicate unsafe;
  double horizon = 1.0;
  double eps0 = 0.01;
  double tau0 = 0.1;

  void validate() const;
  int resolve_initial_mode(const Eigen::VectorXd& x0) const;
};

// Product automaton over state (+) input-automaton variables. Plant input
// references are rewired to the input automaton's output states; a factor
// transition fires while the other factor stays put.
HybridAutomaton compose(const HybridAutomaton& plant,
                        const InputSignalAutomaton& input);

// Replaces InputVar(j) with replacements[j] throughout.
Expr::Ptr substitute_inputs(const Expr::Ptr& e,
                            const std::vector<Expr::Ptr>& replacements);
// Shifts every StateVar index by offset.
Expr::Ptr shift_state_vars(const Expr::Ptr& e, int offset);

VerificationProblem load_problem(const std::string& path);
VerificationProblem load_problem_from_text(const std::string& text,
                                           const std::string& origin = "<string>");

// Model-file representation; load_problem_from_text round-trips it.
std::string problem_to_text(const VerificationProblem& p);

}  // namespace reachverify

#endif  // REACHVERIFY_MODEL_HPP
