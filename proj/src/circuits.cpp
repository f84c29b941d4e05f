#include "reachverify/circuits.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace reachverify::circuits {

CircuitSpec CircuitSpec::defaults() {
  CircuitSpec spec;
  spec.nmos.polarity = Polarity::kNmos;
  spec.pmos.polarity = Polarity::kPmos;
  return spec;
}

// ---------------------------------------------------------------------------
// Transistor currents
// ---------------------------------------------------------------------------

namespace {

double st_current(const TransistorParams& p, double v_gs, double v_ds) {
  return p.i_s_value() * std::exp((v_gs - p.v_th) / (p.n_slope * p.v_t)) *
         (1.0 - std::exp(-v_ds / p.v_t));
}

double ohm_current(const TransistorParams& p, double v_gs, double v_ds) {
  return p.k * ((v_gs - p.v_th) * v_ds - 0.5 * v_ds * v_ds);
}

double sat_current(const TransistorParams& p, double v_gs, double v_ds) {
  const double over = v_gs - p.v_th;
  return 0.5 * p.k * over * over * (1.0 + p.lambda * v_ds);
}

}  // namespace

double region_current(const TransistorParams& p, Region region, double v_gs,
                      double v_ds) {
  // PMOS mirrors: source-referenced magnitudes, current source->drain.
  const double g = p.polarity == Polarity::kNmos ? v_gs : -v_gs;
  const double d = p.polarity == Polarity::kNmos ? v_ds : -v_ds;
  switch (region) {
    case Region::kSubthreshold:
      return st_current(p, g, d);
    case Region::kOhmic:
      return ohm_current(p, g, d);
    case Region::kSaturation:
      return sat_current(p, g, d);
  }
  throw std::logic_error("unreachable region");
}

Region classify_region(const TransistorParams& p, double v_gs, double v_ds) {
  const double g = p.polarity == Polarity::kNmos ? v_gs : -v_gs;
  const double d = p.polarity == Polarity::kNmos ? v_ds : -v_ds;
  if (g <= p.v_th) return Region::kSubthreshold;
  return d >= g - p.v_th ? Region::kSaturation : Region::kOhmic;
}

double uniform_current(const TransistorParams& p, double v_g, double v_d,
                       double v_s) {
  double v_gs, v_ds;
  if (p.polarity == Polarity::kNmos) {
    v_gs = v_g - v_s;
    v_ds = v_d - v_s;
  } else {
    v_gs = v_s - v_g;
    v_ds = v_s - v_d;
  }
  const double denom = 2.0 * p.n_slope * p.v_t;
  const double fwd = std::log1p(std::exp((v_gs - p.v_th) / denom));
  const double rev = std::log1p(std::exp((v_gs - p.v_th - p.n_slope * v_ds) / denom));
  return 2.0 * p.n_slope * p.k * p.v_t * p.v_t * (fwd * fwd - rev * rev) *
         (1.0 + p.lambda * v_ds);
}

// ---------------------------------------------------------------------------
// Expression text helpers
// ---------------------------------------------------------------------------

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return v < 0.0 ? "(" + std::string(buf) + ")" : std::string(buf);
}

// EKV-style current with v_gs/v_ds given as (parenthesized) expressions.
std::string ekv_text(const TransistorParams& p, const std::string& v_gs,
                     const std::string& v_ds) {
  const double inv_denom = 1.0 / (2.0 * p.n_slope * p.v_t);
  const double pref = 2.0 * p.n_slope * p.k * p.v_t * p.v_t;
  std::ostringstream out;
  out << "(" << num(pref) << " * (log(1 + exp((" << v_gs << " - " << num(p.v_th)
      << ") * " << num(inv_denom) << "))^2 - log(1 + exp((" << v_gs << " - "
      << num(p.v_th) << " - " << num(p.n_slope) << " * " << v_ds << ") * "
      << num(inv_denom) << "))^2) * (1 + " << num(p.lambda) << " * " << v_ds
      << "))";
  return out.str();
}

std::string diff_text(const std::string& a, const std::string& b) {
  return "(" + a + " - " + b + ")";
}

}  // namespace

std::string uniform_current_text(const TransistorParams& p, const std::string& v_g,
                                 const std::string& v_d, const std::string& v_s) {
  if (p.polarity == Polarity::kNmos) {
    return ekv_text(p, diff_text(v_g, v_s), diff_text(v_d, v_s));
  }
  return ekv_text(p, diff_text(v_s, v_g), diff_text(v_s, v_d));
}

// ---------------------------------------------------------------------------
// Input signal automata
// ---------------------------------------------------------------------------

namespace {

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

ContinuousMode input_mode(const std::string& name, const std::string& du,
                          const std::vector<std::string>& vars) {
  ContinuousMode mode;
  mode.name = name;
  mode.field.push_back(parse_expr(du, vars, {}));
  mode.field.push_back(parse_expr("1", vars, {}));
  return mode;
}

Transition guarded(const HybridAutomaton& aut, const std::string& from,
                   const std::string& to, const std::vector<std::string>& guards) {
  Transition t;
  t.from = aut.mode_index(from);
  t.to = aut.mode_index(to);
  for (const auto& g : guards) {
    t.guard.push_back(parse_affine_ineq(g, aut.state_names, {}));
  }
  return t;
}

}  // namespace

InputSignalAutomaton make_ramp_input(const std::map<std::string, double>& params) {
  const double u_low = param_or(params, "u_low", 0.0);
  const double u_high = param_or(params, "u_high", 1.2);
  const double t_start = param_or(params, "t_start", 0.4);
  const double rise_time = param_or(params, "rise_time", 0.8);
  const double t_fall = param_or(params, "t_fall", 3.4);
  const double fall_time = param_or(params, "fall_time", 0.8);
  if (rise_time <= 0.0 || fall_time <= 0.0 || t_fall <= t_start) {
    throw ModelError("ramp input: need rise_time, fall_time > 0 and t_fall > t_start");
  }
  const double slope = (u_high - u_low) / rise_time;

  HybridAutomaton aut;
  aut.state_names = {"u", "clk"};
  aut.n = 2;
  aut.m = 0;
  aut.modes.push_back(input_mode("low", "0", aut.state_names));
  aut.modes.push_back(input_mode("rise", num(slope), aut.state_names));
  aut.modes.push_back(input_mode("high", "0", aut.state_names));
  aut.modes.push_back(input_mode("fall", num(-slope * rise_time / fall_time),
                                 aut.state_names));
  aut.transitions.push_back(guarded(aut, "low", "rise",
                                    {"clk >= " + num(t_start), "clk <= " + num(t_fall)}));
  aut.transitions.push_back(guarded(aut, "rise", "high", {"u >= " + num(u_high)}));
  aut.transitions.push_back(guarded(aut, "high", "fall", {"clk >= " + num(t_fall)}));
  aut.transitions.push_back(guarded(aut, "fall", "low", {"u <= " + num(u_low)}));
  aut.validate();

  InputSignalAutomaton out;
  out.automaton = std::move(aut);
  out.output_indices = {0};
  out.initial_state = Eigen::Vector2d(u_low, 0.0);
  out.initial_mode = 0;
  return out;
}

InputSignalAutomaton make_sig_input(const std::map<std::string, double>& params) {
  const double u0 = param_or(params, "u0", 0.1);
  const double t_fall = param_or(params, "t_fall", 3.2);

  HybridAutomaton aut;
  aut.state_names = {"u", "clk"};
  aut.n = 2;
  aut.m = 0;
  // Rising phase of the smoothed pulse; the falling phase mirrors it.
  aut.modes.push_back(
      input_mode("rise", "u*(1.8 - 1.5*u) + 0.0015", aut.state_names));
  aut.modes.push_back(
      input_mode("fall", "-(u*(1.8 - 1.5*u) + 0.0015)", aut.state_names));
  aut.transitions.push_back(guarded(aut, "rise", "fall", {"clk >= " + num(t_fall)}));
  aut.validate();

  InputSignalAutomaton out;
  out.automaton = std::move(aut);
  out.output_indices = {0};
  out.initial_state = Eigen::Vector2d(u0, 0.0);
  out.initial_mode = 0;
  return out;
}

namespace {

// Adds a constant-zero variable to an input automaton and routes it as the
// first output: gates with a tied-low first input share the generator.
InputSignalAutomaton with_grounded_first_output(InputSignalAutomaton in) {
  HybridAutomaton& aut = in.automaton;
  aut.state_names.push_back("zero");
  aut.n += 1;
  for (auto& mode : aut.modes) {
    mode.field.push_back(Expr::constant(0.0));
  }
  Eigen::VectorXd init(aut.n);
  init.head(in.initial_state.size()) = in.initial_state;
  init[aut.n - 1] = 0.0;
  in.initial_state = init;
  in.output_indices = {aut.n - 1, in.output_indices[0]};
  aut.validate();
  return in;
}

InputSignalAutomaton input_by_kind(const std::string& kind,
                                   const std::map<std::string, double>& params) {
  if (kind == "ramp") return make_ramp_input(params);
  if (kind == "sig" || kind == "sigmoid") return make_sig_input(params);
  throw ModelError("unknown input kind '" + kind + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Gate automata
// ---------------------------------------------------------------------------

HybridAutomaton inverter_hybrid_automaton(const CircuitSpec& spec) {
  const TransistorParams& n = spec.nmos;
  const TransistorParams& pp = spec.pmos;
  const double vdd = spec.v_dd;
  const std::vector<std::string> sn = {"vout"};
  const std::vector<std::string> in = {"vin"};

  // NMOS terminal expressions: v_gs = vin, v_ds = vout.
  // PMOS source-referenced: v_sg = vdd - vin, v_sd = vdd - vout.
  const std::string ngs = "vin", nds = "vout";
  const std::string pgs = "(" + num(vdd) + " - vin)";
  const std::string pds = "(" + num(vdd) + " - vout)";

  auto st = [](const TransistorParams& p, const std::string& gs,
               const std::string& ds) {
    return "(" + num(p.i_s_value()) + " * exp((" + gs + " - " + num(p.v_th) +
           ") * " + num(1.0 / (p.n_slope * p.v_t)) + ") * (1 - exp(-" + ds +
           " * " + num(1.0 / p.v_t) + ")))";
  };
  auto ohm = [](const TransistorParams& p, const std::string& gs,
                const std::string& ds) {
    return "(" + num(p.k) + " * ((" + gs + " - " + num(p.v_th) + ") * " + ds +
           " - " + ds + "^2 / 2))";
  };
  auto sat = [](const TransistorParams& p, const std::string& gs,
                const std::string& ds) {
    return "(" + num(0.5 * p.k) + " * (" + gs + " - " + num(p.v_th) + ")^2 * (1 + " +
           num(p.lambda) + " * " + ds + "))";
  };

  auto current = [&](const TransistorParams& p, Region r, const std::string& gs,
                     const std::string& ds) {
    switch (r) {
      case Region::kSubthreshold:
        return st(p, gs, ds);
      case Region::kOhmic:
        return ohm(p, gs, ds);
      case Region::kSaturation:
        return sat(p, gs, ds);
    }
    throw std::logic_error("unreachable region");
  };

  // Region boundary predicates.
  const std::string n_on = "vin >= " + num(n.v_th);
  const std::string n_off = "vin <= " + num(n.v_th);
  const std::string n_sat = "vout >= vin - " + num(n.v_th);   // with n_on
  const std::string n_ohm = "vout <= vin - " + num(n.v_th);
  const std::string p_on = "vin <= " + num(vdd - pp.v_th);
  const std::string p_off = "vin >= " + num(vdd - pp.v_th);
  const std::string p_sat = "vout <= vin + " + num(pp.v_th);  // with p_on
  const std::string p_ohm = "vout >= vin + " + num(pp.v_th);

  struct ModeSpec {
    const char* name;
    Region p_region;
    Region n_region;
    std::vector<std::string> inv;
  };
  using R = Region;
  const std::vector<ModeSpec> mode_specs = {
      {"A", R::kOhmic, R::kSubthreshold, {p_on, p_ohm, n_off}},
      {"B", R::kOhmic, R::kSaturation, {p_on, p_ohm, n_on, n_sat}},
      {"C", R::kSaturation, R::kSubthreshold, {p_on, p_sat, n_off}},
      {"D", R::kSaturation, R::kSaturation, {p_on, p_sat, n_on, n_sat}},
      {"E", R::kSaturation, R::kOhmic, {p_on, p_sat, n_on, n_ohm}},
      {"F", R::kSubthreshold, R::kSaturation, {p_off, n_on, n_sat}},
      {"G", R::kSubthreshold, R::kOhmic, {p_off, n_on, n_ohm}},
  };

  HybridAutomaton aut;
  aut.n = 1;
  aut.m = 1;
  aut.state_names = sn;
  aut.input_names = in;
  for (const auto& ms : mode_specs) {
    ContinuousMode mode;
    mode.name = ms.name;
    const std::string ip = current(pp, ms.p_region, pgs, pds);
    const std::string inn = current(n, ms.n_region, ngs, nds);
    mode.field.push_back(
        parse_expr("(" + ip + " - " + inn + ") * " + num(1.0 / spec.c_load), sn, in));
    for (const auto& g : ms.inv) {
      mode.invariant.push_back(parse_affine_ineq(g, sn, in));
    }
    aut.modes.push_back(std::move(mode));
  }

  // The arc set drawn in the 7-mode inverter diagram, one region change per
  // arc; guards are the boundary of the region being entered.
  struct Arc {
    const char* from;
    const char* to;
    std::string guard;
  };
  const std::vector<Arc> arcs = {
      {"A", "B", n_on},  {"B", "A", n_off}, {"B", "D", p_sat}, {"C", "A", p_ohm},
      {"C", "D", n_on},  {"D", "B", p_ohm}, {"D", "C", n_off}, {"D", "E", n_ohm},
      {"D", "F", p_off}, {"E", "D", n_sat}, {"E", "G", p_off}, {"F", "D", p_on},
      {"F", "G", n_ohm}, {"G", "E", p_on},
  };
  for (const auto& arc : arcs) {
    Transition t;
    t.from = aut.mode_index(arc.from);
    t.to = aut.mode_index(arc.to);
    t.guard.push_back(parse_affine_ineq(arc.guard, sn, in));
    aut.transitions.push_back(std::move(t));
  }
  aut.validate();
  return aut;
}

HybridAutomaton inverter_uniform_automaton(const CircuitSpec& spec) {
  const std::vector<std::string> sn = {"vout"};
  const std::vector<std::string> in = {"vin"};
  const std::string ip = uniform_current_text(spec.pmos, "vin", "vout", num(spec.v_dd));
  const std::string inn = uniform_current_text(spec.nmos, "vin", "vout", "0");
  HybridAutomaton aut;
  aut.n = 1;
  aut.m = 1;
  aut.state_names = sn;
  aut.input_names = in;
  ContinuousMode mode;
  mode.name = "uniform";
  mode.field.push_back(
      parse_expr("(" + ip + " - " + inn + ") * " + num(1.0 / spec.c_load), sn, in));
  aut.modes.push_back(std::move(mode));
  aut.validate();
  return aut;
}

namespace {

// The internal series node of NOR-style gates is written in capacitance-
// normalized units: wm = vm / s with s = sqrt(C_L / C_M). This balances
// the off-diagonal Jacobian entries of the stiff node against the output
// node, which keeps the symmetric-part eigenvalue bound (and with it the
// discrepancy) from blowing up while C_M << C_L.
struct NorText {
  std::string wm_dot;    // d/dt wm
  std::string out_dot;   // d/dt of the NOR output node
  std::string vm;        // vm expressed through wm
  double scale;          // s
};

NorText nor_equations(const CircuitSpec& spec, const std::string& gate_a,
                      const std::string& gate_b, const std::string& out_node) {
  NorText txt;
  txt.scale = std::sqrt(spec.c_load / spec.c_m());
  txt.vm = "(" + num(txt.scale) + " * wm)";
  const std::string vdd = num(spec.v_dd);
  const std::string i1 = uniform_current_text(spec.pmos, gate_a, txt.vm, vdd);
  const std::string i2 = uniform_current_text(spec.pmos, gate_b, out_node, txt.vm);
  const std::string i3 = uniform_current_text(spec.nmos, gate_a, out_node, "0");
  const std::string i4 = uniform_current_text(spec.nmos, gate_b, out_node, "0");
  // d/dt vm = (I1 - I2)/C_M  =>  d/dt wm = (I1 - I2)/sqrt(C_M C_L)
  txt.wm_dot = "(" + i1 + " - " + i2 + ") * " +
               num(1.0 / std::sqrt(spec.c_m() * spec.c_load));
  txt.out_dot = "(" + i2 + " - " + i3 + " - " + i4 + ") * " + num(1.0 / spec.c_load);
  return txt;
}

HybridAutomaton single_mode(const std::vector<std::string>& sn,
                            const std::vector<std::string>& in,
                            const std::vector<std::string>& fields) {
  HybridAutomaton aut;
  aut.n = static_cast<int>(sn.size());
  aut.m = static_cast<int>(in.size());
  aut.state_names = sn;
  aut.input_names = in;
  ContinuousMode mode;
  mode.name = "uniform";
  for (const auto& f : fields) mode.field.push_back(parse_expr(f, sn, in));
  aut.modes.push_back(std::move(mode));
  aut.validate();
  return aut;
}

}  // namespace

HybridAutomaton nor_automaton(const CircuitSpec& spec) {
  const std::vector<std::string> sn = {"wm", "vout"};
  const std::vector<std::string> in = {"va", "vb"};
  const NorText txt = nor_equations(spec, "va", "vb", "vout");
  return single_mode(sn, in, {txt.wm_dot, txt.out_dot});
}

HybridAutomaton or_automaton(const CircuitSpec& spec) {
  const std::vector<std::string> sn = {"wm", "vnor", "vout"};
  const std::vector<std::string> in = {"va", "vb"};
  const NorText txt = nor_equations(spec, "va", "vb", "vnor");
  const std::string ip = uniform_current_text(spec.pmos, "vnor", "vout", num(spec.v_dd));
  const std::string inn = uniform_current_text(spec.nmos, "vnor", "vout", "0");
  const std::string inv_out =
      "(" + ip + " - " + inn + ") * " + num(1.0 / spec.c_load);
  return single_mode(sn, in, {txt.wm_dot, txt.out_dot, inv_out});
}

HybridAutomaton inv_loop_automaton(const CircuitSpec& spec) {
  const std::vector<std::string> sn = {"v1", "v2"};
  const std::string vdd = num(spec.v_dd);
  const std::string f1 = "(" + uniform_current_text(spec.pmos, "v2", "v1", vdd) +
                         " - " + uniform_current_text(spec.nmos, "v2", "v1", "0") +
                         ") * " + num(1.0 / spec.c_load);
  const std::string f2 = "(" + uniform_current_text(spec.pmos, "v1", "v2", vdd) +
                         " - " + uniform_current_text(spec.nmos, "v1", "v2", "0") +
                         ") * " + num(1.0 / spec.c_load);
  return single_mode(sn, {}, {f1, f2});
}

HybridAutomaton or_feedback_automaton(const CircuitSpec& spec) {
  // OR gate with the output wired back to input a; the external pulse
  // drives input b.
  const std::vector<std::string> sn = {"wm", "vnor", "vout"};
  const std::vector<std::string> in = {"u"};
  const NorText txt = nor_equations(spec, "vout", "u", "vnor");
  const std::string ip = uniform_current_text(spec.pmos, "vnor", "vout", num(spec.v_dd));
  const std::string inn = uniform_current_text(spec.nmos, "vnor", "vout", "0");
  const std::string inv_out =
      "(" + ip + " - " + inn + ") * " + num(1.0 / spec.c_load);
  return single_mode(sn, in, {txt.wm_dot, txt.out_dot, inv_out});
}

// ---------------------------------------------------------------------------
// Verification problems
// ---------------------------------------------------------------------------

VerificationProblem build_cardiac() {
  VerificationProblem p;
  p.name = "cardiac";
  const std::vector<std::string> sn = {"x1", "x2"};
  const std::vector<std::string> in = {"u"};
  p.plant.n = 2;
  p.plant.m = 1;
  p.plant.state_names = sn;
  p.plant.input_names = in;
  ContinuousMode mode;
  mode.name = "osc";
  mode.field.push_back(
      parse_expr("-x1*(x1^2 + 0.9*x1 + 0.9) + 2*x2*u + 1", sn, in));
  mode.field.push_back(parse_expr("x1 - 2*x2", sn, in));
  p.plant.modes.push_back(std::move(mode));
  p.input = make_sig_input({{"u0", 0.1}, {"t_fall", 4.0}});
  p.theta = {Interval(0.4, 0.6), Interval(0.14, 0.34)};  // B_0.1((0.5, 0.24))
  p.unsafe.push_back(parse_affine_ineq("x1 >= 2.0", sn, {}));
  p.horizon = 10.0;
  p.eps0 = 0.04;
  p.tau0 = 0.1;
  p.validate();
  return p;
}

namespace {

VerificationProblem wrap_gate(HybridAutomaton plant, const std::string& name,
                              InputSignalAutomaton input, Box theta,
                              const std::string& unsafe_ineq, double horizon,
                              double eps0, double tau0) {
  VerificationProblem p;
  p.name = name;
  p.plant = std::move(plant);
  p.input = std::move(input);
  p.theta = std::move(theta);
  p.unsafe.push_back(parse_affine_ineq(unsafe_ineq, p.plant.state_names, {}));
  p.horizon = horizon;
  p.eps0 = eps0;
  p.tau0 = tau0;
  p.validate();
  return p;
}

}  // namespace

VerificationProblem build_inverter_hybrid(const CircuitSpec& spec,
                                          const std::string& input_kind) {
  return wrap_gate(inverter_hybrid_automaton(spec), "inv-hybrid(" + input_kind + ")",
                   input_by_kind(input_kind, {{"u_high", spec.v_dd}}),
                   {Interval(1.15, 1.2)}, "vout >= 1.32", 6.4, 0.08, 0.1);
}

VerificationProblem build_inverter_uniform(const CircuitSpec& spec,
                                           const std::string& input_kind) {
  return wrap_gate(inverter_uniform_automaton(spec), "inv-uniform(" + input_kind + ")",
                   input_by_kind(input_kind, {{"u_high", spec.v_dd}}),
                   {Interval(1.15, 1.2)}, "vout >= 1.32", 6.4, 0.08, 0.1);
}

VerificationProblem build_nor(const CircuitSpec& spec, const std::string& input_kind) {
  const double wm0 = spec.v_dd / std::sqrt(spec.c_load / spec.c_m());
  return wrap_gate(nor_automaton(spec), "nor(" + input_kind + ")",
                   with_grounded_first_output(
                       input_by_kind(input_kind, {{"u_high", spec.v_dd}})),
                   {Interval::point(wm0), Interval(1.15, 1.2)}, "vout >= 1.32",
                   6.4, 0.08, 0.05);
}

VerificationProblem build_or(const CircuitSpec& spec, const std::string& input_kind) {
  const double wm0 = spec.v_dd / std::sqrt(spec.c_load / spec.c_m());
  return wrap_gate(or_automaton(spec), "or(" + input_kind + ")",
                   with_grounded_first_output(
                       input_by_kind(input_kind, {{"u_high", spec.v_dd}})),
                   {Interval::point(wm0), Interval(1.199, 1.201), Interval(0.0, 0.002)},
                   "vout >= 1.32", 6.4, 0.08, 0.05);
}

VerificationProblem build_inv_loop(const CircuitSpec& spec) {
  VerificationProblem p;
  p.name = "inv-loop";
  p.plant = inv_loop_automaton(spec);
  p.theta = {Interval(1.0, 1.2), Interval(0.5, 0.6)};
  p.unsafe.push_back(parse_affine_ineq("v1 >= 1.32", p.plant.state_names, {}));
  p.horizon = 6.4;
  p.eps0 = 0.08;
  p.tau0 = 0.1;
  p.validate();
  return p;
}

VerificationProblem build_or_feedback(const CircuitSpec& spec, double pulse_width) {
  const double wm0 = spec.v_dd / std::sqrt(spec.c_load / spec.c_m());
  const double t_on = 0.3;
  const double edge = 0.04;
  return wrap_gate(
      or_feedback_automaton(spec), "or-feedback",
      make_ramp_input({{"u_high", spec.v_dd},
                       {"t_start", t_on},
                       {"rise_time", edge},
                       {"t_fall", t_on + edge + pulse_width},
                       {"fall_time", edge}}),
      {Interval::point(wm0), Interval(1.199, 1.201), Interval(0.0, 0.002)},
      "vout >= 1.32", 8.0, 0.08, 0.05);
}

VerificationProblem builtin_problem(const std::string& name,
                                    const std::string& input_kind) {
  const CircuitSpec spec = CircuitSpec::defaults();
  auto kind = [&](const char* fallback) {
    return input_kind.empty() ? std::string(fallback) : input_kind;
  };
  if (name == "cardiac") return build_cardiac();
  if (name == "inv-hybrid") return build_inverter_hybrid(spec, kind("ramp"));
  if (name == "inv-uniform") return build_inverter_uniform(spec, kind("ramp"));
  if (name == "nor") return build_nor(spec, kind("ramp"));
  if (name == "or") return build_or(spec, kind("ramp"));
  if (name == "inv-loop") return build_inv_loop(spec);
  if (name == "or-feedback") return build_or_feedback(spec, 0.5);
  throw ModelError("unknown builtin model '" + name + "'");
}

std::vector<std::string> builtin_names() {
  return {"cardiac", "inv-hybrid", "inv-uniform", "nor",
          "or",      "inv-loop",   "or-feedback"};
}

}  // namespace reachverify::circuits
