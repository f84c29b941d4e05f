#ifndef REACHVERIFY_CIRCUITS_HPP
#define REACHVERIFY_CIRCUITS_HPP

#include <map>
#include <string>
#include <vector>

#include "reachverify/model.hpp"

namespace reachverify::circuits {

enum class Polarity { kNmos, kPmos };
enum class Region { kSubthreshold, kOhmic, kSaturation };

struct TransistorParams {
  Polarity polarity = Polarity::kNmos;
  double k = 1.0;         // transconductance, A/V^2
  double v_th = 0.3;      // threshold voltage magnitude, V
  double lambda = 0.05;   // channel-length modulation, 1/V
  double n_slope = 1.05;  // subthreshold slope factor
  double v_t = 0.026;     // thermal voltage, V
  double i_s = -1.0;      // subthreshold scale current; <0 selects the
                          // default 2 k n^2 VT^2 that matches the uniform
                          // model's deep-subthreshold asymptote
  double i_s_value() const {
    return i_s > 0.0 ? i_s : 2.0 * k * n_slope * n_slope * v_t * v_t;
  }
};

struct CircuitSpec {
  std::string name = "circuit";
  TransistorParams nmos;
  TransistorParams pmos;
  double c_load = 0.25;    // C_L
  double cm_ratio = 1e-3;  // C_M / C_L; the stiffness knob
  double v_dd = 1.2;
  double c_m() const { return cm_ratio * c_load; }

  static CircuitSpec defaults();
};

// Shichman-Hodges per-region drain current. NMOS conventions; PMOS mirrors
// signs (pass source-referenced voltages, get source->drain current).
double region_current(const TransistorParams& p, Region region, double v_gs,
                      double v_ds);

// Region the device operates in at these terminal voltages.
Region classify_region(const TransistorParams& p, double v_gs, double v_ds);

// Smooth single-equation current valid across all regions (EKV-style
// log(1+exp) blending), terminal voltages absolute.
double uniform_current(const TransistorParams& p, double v_g, double v_d,
                       double v_s);

// The same current as an expression over named terminal voltages, for use
// inside model vector fields.
std::string uniform_current_text(const TransistorParams& p, const std::string& v_g,
                                 const std::string& v_d, const std::string& v_s);

// Plain automata (no input attached).
HybridAutomaton inverter_hybrid_automaton(const CircuitSpec& spec);
HybridAutomaton inverter_uniform_automaton(const CircuitSpec& spec);
HybridAutomaton nor_automaton(const CircuitSpec& spec);
HybridAutomaton or_automaton(const CircuitSpec& spec);
HybridAutomaton inv_loop_automaton(const CircuitSpec& spec);
HybridAutomaton or_feedback_automaton(const CircuitSpec& spec);

// Input signal generators. Parameter keys (all optional):
//   ramp: u_low, u_high, t_start, rise_time, t_fall, fall_time
//   sig:  u0, t_fall
InputSignalAutomaton make_ramp_input(const std::map<std::string, double>& params);
InputSignalAutomaton make_sig_input(const std::map<std::string, double>& params);

// Complete verification problems: Table-1 initial sets, unsafe
// V_out > 1.32 V, default horizon. input_kind: "ramp", "sig", or "" for
// circuits without an external input.
VerificationProblem build_cardiac();
VerificationProblem build_inverter_hybrid(const CircuitSpec& spec,
                                          const std::string& input_kind);
VerificationProblem build_inverter_uniform(const CircuitSpec& spec,
                                           const std::string& input_kind);
VerificationProblem build_nor(const CircuitSpec& spec, const std::string& input_kind);
VerificationProblem build_or(const CircuitSpec& spec, const std::string& input_kind);
VerificationProblem build_inv_loop(const CircuitSpec& spec);
VerificationProblem build_or_feedback(const CircuitSpec& spec, double pulse_width);

// Lookup by name ("cardiac", "inv-hybrid", "inv-uniform", "nor", "or",
// "inv-loop", "or-feedback"), with the default spec. input_kind overrides
// the builtin's default input where applicable.
VerificationProblem builtin_problem(const std::string& name,
                                    const std::string& input_kind = "");
std::vector<std::string> builtin_names();

}  // namespace reachverify::circuits

#endif  // REACHVERIFY_CIRCUITS_HPP
