#pragma once

// Global-control gate synthesis.
//
// All donors see the same resonant drive. A gate is built from segments in which
// selected donors are detuned through their hyperfine control while everyone else
// keeps rotating about x at the resonant rate W0 = 2 mu_B B_ac / hbar. Each schedule
// ends with a correction that brings every spectator to a whole number of
// revolutions, so gate durations are multiples of the spectator period.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "donorspin/core.hpp"
#include "donorspin/metrics.hpp"
#include "donorspin/params.hpp"
#include "donorspin/propagator.hpp"
#include "donorspin/spin_model.hpp"

namespace donorspin {

enum class GateKind { x, y, z, hadamard, cnot, swap, idle };
enum class CnotMode { exchange, dipole, combined };
enum class CorrectionMode {
  minimal,  ///< smallest feasible closing correction
  extended,  ///< one extra spectator revolution in the closing correction of two-qubit gates
};

inline std::string_view to_string(GateKind k) {
  switch (k) {
    case GateKind::x: return "x";
    case GateKind::y: return "y";
    case GateKind::z: return "z";
    case GateKind::hadamard: return "hadamard";
    case GateKind::cnot: return "cnot";
    case GateKind::swap: return "swap";
    case GateKind::idle: return "idle";
  }
  return "?";
}

inline GateKind gate_kind_from_string(std::string_view s) {
  for (GateKind k : {GateKind::x, GateKind::y, GateKind::z, GateKind::hadamard, GateKind::cnot,
                     GateKind::swap, GateKind::idle})
    if (to_string(k) == s) return k;
  if (s == "h") return GateKind::hadamard;
  throw InvalidArgument("unknown gate '" + std::string(s) + "'");
}

inline std::string_view to_string(CnotMode m) {
  switch (m) {
    case CnotMode::exchange: return "exchange";
    case CnotMode::dipole: return "dipole";
    case CnotMode::combined: return "combined";
  }
  return "?";
}

inline CnotMode cnot_mode_from_string(std::string_view s) {
  for (CnotMode m : {CnotMode::exchange, CnotMode::dipole, CnotMode::combined})
    if (to_string(m) == s) return m;
  throw InvalidArgument("unknown CNOT mode '" + std::string(s) + "'");
}

inline std::string_view to_string(CorrectionMode m) { return m == CorrectionMode::minimal ? "minimal" : "extended"; }

inline CorrectionMode correction_mode_from_string(std::string_view s) {
  if (s == "minimal") return CorrectionMode::minimal;
  if (s == "extended") return CorrectionMode::extended;
  throw InvalidArgument("unknown correction mode '" + std::string(s) + "'");
}

struct GateSpec {
  GateKind kind = GateKind::x;
  double theta = 0.0;       ///< rotation angle for x, y, z
  std::vector<int> qubits;  ///< target; for cnot {control, target}; for swap the pair
  CnotMode mode = CnotMode::exchange;
  std::optional<double> J;  ///< exchange energy; defaults to exchange_strength(d)
  double idle_duration = 0.0;
  CorrectionMode correction = CorrectionMode::minimal;
  bool x_conjugation = true;  ///< cnot: false replaces the X steps by idles of equal length

  static GateSpec x(double theta, int q) { return {.kind = GateKind::x, .theta = theta, .qubits = {q}}; }
  static GateSpec y(double theta, int q) { return {.kind = GateKind::y, .theta = theta, .qubits = {q}}; }
  static GateSpec z(double theta, int q) { return {.kind = GateKind::z, .theta = theta, .qubits = {q}}; }
  static GateSpec hadamard(int q) { return {.kind = GateKind::hadamard, .qubits = {q}}; }
  static GateSpec cnot(int control, int target, CnotMode mode = CnotMode::exchange,
                       std::optional<double> J = std::nullopt,
                       CorrectionMode correction = CorrectionMode::minimal) {
    return {.kind = GateKind::cnot, .qubits = {control, target}, .mode = mode, .J = J, .correction = correction};
  }
  static GateSpec swap(int a, int b, std::optional<double> J = std::nullopt) {
    return {.kind = GateKind::swap, .qubits = {a, b}, .J = J};
  }
  static GateSpec idle(double duration) { return {.kind = GateKind::idle, .idle_duration = duration}; }

  std::size_t arity() const {
    switch (kind) {
      case GateKind::cnot:
      case GateKind::swap: return 2;
      case GateKind::idle: return 0;
      default: return 1;
    }
  }

  void validate(const SpinSystem& sys) const {
    if (qubits.size() != arity()) throw InvalidArgument("wrong number of qubits for gate " + std::string(to_string(kind)));
    for (int q : qubits)
      if (q < 0 || q >= sys.num_donors) throw InvalidArgument("qubit index out of range");
    if (qubits.size() == 2 && qubits[0] == qubits[1]) throw InvalidArgument("qubit indices must be distinct");
    if (!(theta > -two_pi && theta < two_pi)) throw InvalidArgument("rotation angle must lie in (-2pi, 2pi)");
    if (J && !(*J > 0.0)) throw InvalidArgument("exchange energy must be positive");
    if (!(idle_duration >= 0.0)) throw InvalidArgument("idle duration must be non-negative");
  }
};

// ---------------------------------------------------------------------------
// Timing primitives.

/// Time for one full resonant revolution, pi hbar / (mu_B B_ac).
inline double spectator_period(const DeviceParameters& p) {
  return pi * p.constants.hbar() / drive_energy(p);
}

/// Largest rotation energy sqrt((mu_B B_ac)^2 + (hbar dw_max)^2) a donor can reach.
inline double max_rotation_energy(const DeviceParameters& p) {
  return std::hypot(drive_energy(p), p.constants.hbar() * max_detuning(p));
}

/// Shortest time in which a detuned donor completes a full revolution.
inline double min_revolution_period(const DeviceParameters& p) {
  return pi * p.constants.hbar() / max_rotation_energy(p);
}

/// Largest X angle one correct-then-resonant step can implement.
inline double max_x_step(const DeviceParameters& p) {
  return two_pi * (1.0 - drive_energy(p) / max_rotation_energy(p));
}

/// Largest tilt of the rotation axis, atan(hbar dw_max / (mu_B B_ac)).
inline double max_axis_angle(const DeviceParameters& p) {
  return std::atan(p.constants.hbar() * max_detuning(p) / drive_energy(p));
}

/// Detuning (rad/s) that makes a donor precess at rotation energy `omega` (>= mu_B B_ac).
inline double detuning_for_rotation_energy(double omega, const DeviceParameters& p) {
  const double mu = drive_energy(p);
  const double dw = std::sqrt(std::max(0.0, omega * omega - mu * mu)) / p.constants.hbar();
  return -std::min(dw, max_detuning(p));
}

/// Wraps an angle into [0, 2pi), mapping values within 1e-9 of 2pi to 0.
inline double wrap_angle(double a) {
  double w = std::fmod(a, two_pi);
  if (w < 0.0) w += two_pi;
  if (w < 1e-9 || w > two_pi - 1e-9) return 0.0;
  return w;
}

struct IdleRevolutions {
  int revolutions = 0;
  double detuning = 0.0;  ///< rad/s, <= 0
};

/// Fewest whole revolutions filling `duration` with a reachable revolution period.
inline std::optional<IdleRevolutions> idle_revolutions(double duration, const DeviceParameters& p) {
  const double t_min = min_revolution_period(p) * (1.0 - 1e-12);
  const double t_max = spectator_period(p) * (1.0 + 1e-12);
  if (!(duration > 0.0)) return std::nullopt;
  const int n = std::max(1, static_cast<int>(std::ceil(duration / t_max)));
  if (duration / n < t_min) return std::nullopt;
  const double omega = n * pi * p.constants.hbar() / duration;
  return IdleRevolutions{n, detuning_for_rotation_energy(omega, p)};
}

struct CorrectionPlan {
  double deficit = 0.0;  ///< spectator angle still missing, rad in [0, 2pi)
  int wraps = 0;         ///< extra full spectator revolutions k
  int revolutions = 0;   ///< full revolutions n of each idle target
  double duration = 0.0;
  double idle_detuning = 0.0;  ///< rad/s applied to every idle target
  std::vector<int> idle_targets;
};

inline constexpr int kMaxCorrectionWraps = 4;

/// Minimal correction: t_c = (deficit + 2 pi k) / W0 with the smallest feasible k.
inline CorrectionPlan plan_correction(double deficit, const std::vector<int>& idle_targets,
                                      const DeviceParameters& p, int extra_wraps = 0) {
  if (!(deficit >= 0.0 && deficit < two_pi + 1e-9)) throw InvalidArgument("deficit must lie in [0, 2pi)");
  deficit = wrap_angle(deficit);
  CorrectionPlan plan{.deficit = deficit, .idle_targets = idle_targets};
  const double w0 = resonant_rotation_rate(p);
  if (deficit == 0.0 && extra_wraps == 0) return plan;
  for (int k = 0; k <= kMaxCorrectionWraps; ++k) {
    const double t = (deficit + two_pi * k) / w0;
    if (t == 0.0) continue;
    if (idle_targets.empty()) {
      if (extra_wraps-- > 0) continue;
      plan.wraps = k;
      plan.duration = t;
      return plan;
    }
    if (auto idle = idle_revolutions(t, p)) {
      if (extra_wraps-- > 0) continue;
      plan.wraps = k;
      plan.duration = t;
      plan.revolutions = idle->revolutions;
      plan.idle_detuning = idle->detuning;
      return plan;
    }
  }
  throw InfeasibleControl("no feasible correction within " + std::to_string(kMaxCorrectionWraps) +
                          " spectator revolutions");
}

namespace detail {
inline PulseSegment resonant_segment(const SpinSystem& sys, const DeviceParameters& p, double duration,
                                     std::string label) {
  return {.duration = duration, .hyperfine = std::vector<double>(sys.num_donors, p.A0), .label = std::move(label)};
}
}  // namespace detail

/// Segments realising a correction plan (empty when nothing is missing).
inline std::vector<PulseSegment> synth_correction(double deficit, const std::vector<int>& idle_targets,
                                                  const SpinSystem& sys, const DeviceParameters& p,
                                                  int extra_wraps = 0) {
  const CorrectionPlan plan = plan_correction(deficit, idle_targets, p, extra_wraps);
  if (plan.duration == 0.0) return {};
  PulseSegment seg = detail::resonant_segment(sys, p, plan.duration, "correction");
  for (int q : idle_targets) seg.hyperfine.at(q) = hyperfine_for_detuning(plan.idle_detuning, p);
  return {seg};
}

/// Exchange energy giving an interaction step pi hbar / (8 J) of length t.
inline double exchange_for_interaction_time(double t, const DeviceParameters& p) {
  if (!(t > 0.0)) throw InvalidArgument("interaction time must be positive");
  return pi * p.constants.hbar() / (8.0 * t);
}

// ---------------------------------------------------------------------------
// Schedule construction.

/// Appends segments while tracking the spectator phase. Step names group segments in reports.
class ScheduleBuilder {
 public:
  ScheduleBuilder(SpinSystem sys, DeviceParameters p) : sys_(sys), p_(std::move(p)) {
    sys_.validate();
    p_.validate();
  }

  ScheduleBuilder& step(std::string name) {
    step_ = std::move(name);
    return *this;
  }

  /// Everyone resonant for a rotation of `angle`; donors in `idle` complete whole revolutions instead.
  ScheduleBuilder& resonant(double angle, const std::vector<int>& idle = {}) {
    if (angle < 0.0) throw InvalidArgument("rotation angle must be non-negative");
    const double t = angle / resonant_rotation_rate(p_);
    if (t == 0.0) return *this;
    PulseSegment seg = detail::resonant_segment(sys_, p_, t, label(idle.empty() ? "resonant" : "resonant, idle"));
    if (!idle.empty()) {
      auto rev = idle_revolutions(t, p_);
      if (!rev) throw InfeasibleControl("idle donors cannot complete whole revolutions in this step");
      for (int q : idle) seg.hyperfine.at(q) = hyperfine_for_detuning(rev->detuning, p_);
    }
    return push(std::move(seg));
  }

  /// Donor q detuned by dw (rad/s) for `duration`; everyone else resonant.
  ScheduleBuilder& detuned(int q, double dw, double duration) {
    PulseSegment seg = detail::resonant_segment(sys_, p_, duration, label("detune q" + std::to_string(q)));
    seg.hyperfine.at(q) = hyperfine_for_detuning(dw, p_);
    return push(std::move(seg));
  }

  /// Exchange J between a and b for `duration` with every donor resonant.
  ScheduleBuilder& interact(int a, int b, double J, double duration) {
    PulseSegment seg = detail::resonant_segment(sys_, p_, duration, label("interact"));
    if (J > 0.0) seg.exchange.push_back({a, b, J});
    return push(std::move(seg));
  }

  /// Correction for an explicit spectator deficit.
  ScheduleBuilder& correct(double deficit, const std::vector<int>& idle, int extra_wraps = 0) {
    corrections_.push_back(plan_correction(deficit, idle, p_, extra_wraps));
    for (auto& seg : synth_correction(deficit, idle, sys_, p_, extra_wraps)) {
      seg.label = label("correction");
      push(std::move(seg));
    }
    return *this;
  }

  /// Correction that returns the spectators to a whole number of revolutions.
  ScheduleBuilder& close(const std::vector<int>& idle, int extra_wraps = 0) {
    return correct(spectator_deficit(), idle, extra_wraps);
  }

  double elapsed() const {
    double t = 0.0;
    for (const auto& s : segments_) t += s.duration;
    return t;
  }

  /// Angle still missing for resonant spectators to complete whole revolutions.
  double spectator_deficit() const {
    return wrap_angle(two_pi - std::fmod(resonant_rotation_rate(p_) * elapsed(), two_pi));
  }

  const std::vector<CorrectionPlan>& corrections() const { return corrections_; }

  PulseSchedule build(std::optional<Matrix> target = std::nullopt) const {
    return {.segments = segments_, .device = p_, .system = sys_, .declared_target = std::move(target)};
  }

 private:
  std::string label(const std::string& part) const { return step_.empty() ? part : step_ + " / " + part; }

  ScheduleBuilder& push(PulseSegment seg) {
    segments_.push_back(std::move(seg));
    return *this;
  }

  SpinSystem sys_;
  DeviceParameters p_;
  std::string step_;
  std::vector<PulseSegment> segments_;
  std::vector<CorrectionPlan> corrections_;
};

/// Step name of a segment label ("<step> / <part>").
inline std::string step_name(const std::string& label) {
  const auto pos = label.find(" / ");
  return pos == std::string::npos ? label : label.substr(0, pos);
}

/// Consecutive segments grouped by step name.
inline std::vector<std::pair<std::string, double>> grouped_steps(const PulseSchedule& s) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& seg : s.segments) {
    const std::string name = step_name(seg.label);
    if (!out.empty() && out.back().first == name)
      out.back().second += seg.duration;
    else
      out.emplace_back(name, seg.duration);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ideal unitaries.

/// exp(-i theta P / 2) for a logical Pauli P.
inline Matrix rotation(Pauli axis, double theta) {
  return std::cos(theta / 2) * identity(2) - Complex(0, std::sin(theta / 2)) * pauli(axis);
}

inline Matrix hadamard_matrix() { return (pauli(Pauli::x) + pauli(Pauli::z)) / std::sqrt(2.0); }

/// Single-electron operator on qubit q of `sys` (identity on nuclei).
inline Matrix embed_qubit(const Matrix& op, int q, const SpinSystem& sys) {
  return embed_slot(op, sys.electron_slot(q), sys.num_slots());
}

inline Matrix cnot_matrix(int control, int target, const SpinSystem& sys) {
  Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  return embed_qubit(p0, control, sys) + embed_qubit(p1, control, sys) * embed_qubit(pauli(Pauli::x), target, sys);
}

inline Matrix swap_matrix(int a, int b, const SpinSystem& sys) {
  Matrix out = identity(sys.dim());
  for (Pauli k : {Pauli::x, Pauli::y, Pauli::z}) out += embed_qubit(pauli(k), a, sys) * embed_qubit(pauli(k), b, sys);
  return 0.5 * out;
}

/// Reference matrix of a gate, exp(-i theta P / 2) convention (X(2pi) = -I).
inline Matrix ideal_unitary(const GateSpec& spec, const SpinSystem& sys) {
  spec.validate(sys);
  switch (spec.kind) {
    case GateKind::x: return embed_qubit(rotation(Pauli::x, spec.theta), spec.qubits[0], sys);
    case GateKind::y: return embed_qubit(rotation(Pauli::y, spec.theta), spec.qubits[0], sys);
    case GateKind::z: return embed_qubit(rotation(Pauli::z, spec.theta), spec.qubits[0], sys);
    case GateKind::hadamard: return embed_qubit(hadamard_matrix(), spec.qubits[0], sys);
    case GateKind::cnot: return cnot_matrix(spec.qubits[0], spec.qubits[1], sys);
    case GateKind::swap: return swap_matrix(spec.qubits[0], spec.qubits[1], sys);
    case GateKind::idle: return identity(sys.dim());
  }
  return identity(sys.dim());
}

// ---------------------------------------------------------------------------
// Gate synthesis.

namespace detail {
inline double hadamard_detuning(const DeviceParameters& p) { return -drive_energy(p) / p.constants.hbar(); }
inline double hadamard_time(const DeviceParameters& p) {
  return pi * p.constants.hbar() / (2.0 * std::sqrt(2.0) * drive_energy(p));
}
}  // namespace detail

/// X(theta): per step, detune the target through one full revolution while spectators
/// advance 2pi - a, then rotate everyone by a.
inline PulseSchedule synth_x(double theta, int target, const SpinSystem& sys, const DeviceParameters& p) {
  const GateSpec spec = GateSpec::x(theta, target);
  ScheduleBuilder b(sys, p);
  const Matrix ideal = ideal_unitary(spec, sys);
  const double th = wrap_angle(theta);
  if (th == 0.0) return b.build(ideal);
  const double step = std::min(pi, max_x_step(p));
  if (step <= 1e-12) throw InfeasibleControl("no detuning range available for X rotations");
  const int m = static_cast<int>(std::ceil(th / step - 1e-12));
  const double a = th / m;
  for (int i = 0; i < m; ++i) {
    const std::string suffix = m > 1 ? " (" + std::to_string(i + 1) + "/" + std::to_string(m) + ")" : "";
    b.step("detune target" + suffix).correct(two_pi - a, {target});
    b.step("rotate all" + suffix).resonant(a);
  }
  return b.build(ideal);
}

/// Y(theta) as repeated blocks R_x(pi) R_n(pi) R_x(pi) R_n(pi) = R_y(4 phi), then a correction.
inline PulseSchedule synth_y(double theta, int target, const SpinSystem& sys, const DeviceParameters& p) {
  const GateSpec spec = GateSpec::y(theta, target);
  ScheduleBuilder b(sys, p);
  const Matrix ideal = ideal_unitary(spec, sys);
  const double th = wrap_angle(theta);
  if (th == 0.0) return b.build(ideal);
  const double phi_max = max_axis_angle(p);
  if (phi_max <= 1e-12) throw InfeasibleControl("no detuning range available for Y rotations");
  const double phi_total = th / 4.0;
  const int m = static_cast<int>(std::ceil(phi_total / phi_max - 1e-12));
  const double phi = phi_total / m;
  const double dw = -drive_energy(p) * std::tan(phi) / p.constants.hbar();
  const double t_n = pi * p.constants.hbar() * std::cos(phi) / (2.0 * drive_energy(p));
  for (int i = 0; i < m; ++i) {
    b.step(m > 1 ? "block " + std::to_string(i + 1) : "block");
    b.detuned(target, dw, t_n).resonant(pi).detuned(target, dw, t_n).resonant(pi);
  }
  b.step("correction").close({target});
  return b.build(ideal);
}

inline PulseSchedule synth_hadamard(int target, const SpinSystem& sys, const DeviceParameters& p) {
  const GateSpec spec = GateSpec::hadamard(target);
  ScheduleBuilder b(sys, p);
  const Matrix ideal = ideal_unitary(spec, sys);
  b.step("hadamard").detuned(target, detail::hadamard_detuning(p), detail::hadamard_time(p));
  b.step("correction").close({target});
  return b.build(ideal);
}

/// Z(theta) = H X(theta) H with a single merged correction.
inline PulseSchedule synth_z(double theta, int target, const SpinSystem& sys, const DeviceParameters& p) {
  const GateSpec spec = GateSpec::z(theta, target);
  ScheduleBuilder b(sys, p);
  const Matrix ideal = ideal_unitary(spec, sys);
  const double th = wrap_angle(theta);
  b.step("hadamard 1").detuned(target, detail::hadamard_detuning(p), detail::hadamard_time(p));
  b.step("rotate all").resonant(th);
  b.step("hadamard 2").detuned(target, detail::hadamard_detuning(p), detail::hadamard_time(p));
  b.step("correction").close({target});
  return b.build(ideal);
}

struct CnotTiming {
  double coupling = 0.0;          ///< K = J, D or J + D
  double interaction_time = 0.0;  ///< pi hbar / (8 K)
  double exchange = 0.0;          ///< J switched on during interaction steps
};

inline CnotTiming cnot_timing(CnotMode mode, std::optional<double> J, const DeviceParameters& p) {
  const double j = J.value_or(exchange_strength(p.d, p));
  const double D = dipole_strength(p.d, p.constants);
  CnotTiming t;
  switch (mode) {
    case CnotMode::exchange: t.coupling = j; t.exchange = j; break;
    case CnotMode::dipole: t.coupling = D; t.exchange = 0.0; break;
    case CnotMode::combined: t.coupling = j + D; t.exchange = j; break;
  }
  if (!(t.coupling > 0.0)) throw InvalidArgument("CNOT coupling must be positive");
  t.interaction_time = pi * p.constants.hbar() / (8.0 * t.coupling);
  return t;
}

/// CNOT = (H (x) I) (R_x(pi/2) (x) R_x(pi/2)) exp(i pi/4 X X) (H (x) I), with the XX term
/// built from two pi/8 interaction steps conjugated by single-qubit X rotations.
inline PulseSchedule synth_cnot(int control, int target, const SpinSystem& sys_in, const DeviceParameters& p,
                                CnotMode mode = CnotMode::exchange, std::optional<double> J = std::nullopt,
                                CorrectionMode correction = CorrectionMode::minimal, bool x_conjugation = true) {
  SpinSystem sys = sys_in;
  if (mode != CnotMode::exchange) {
    if (p.alignment != Axis::z || sys.alignment != Axis::z)
      throw InvalidArgument("dipole-mode CNOTs require donors aligned along z");
    sys.dipole = true;
  }
  const GateSpec spec = GateSpec::cnot(control, target, mode, J, correction);
  const Matrix ideal = ideal_unitary(spec, sys);
  const CnotTiming timing = cnot_timing(mode, J, p);
  const double w0 = resonant_rotation_rate(p);
  const double alpha = w0 * detail::hadamard_time(p);

  ScheduleBuilder b(sys, p);
  b.step("1 H(x)I").detuned(control, detail::hadamard_detuning(p), detail::hadamard_time(p)).correct(two_pi - alpha, {control});
  b.step("2 interact").interact(control, target, timing.exchange, timing.interaction_time);
  if (x_conjugation)
    b.step("3 X(x)I").resonant(pi, {target});
  else
    b.step("3 idle").resonant(pi, {control, target});
  b.step("4 interact").interact(control, target, timing.exchange, timing.interaction_time);
  // The second flip lands on the target: it undoes the first one up to X(x)X, which
  // commutes with the interaction, and fixes the sign of the pi/4 XX exponent.
  if (x_conjugation)
    b.step("5 I(x)X").resonant(pi, {control});
  else
    b.step("5 idle").resonant(pi, {control, target});
  // The drive keeps rotating both qubits during the interaction steps.
  b.step("6 Rx(pi/2)(x)Rx(pi/2)").resonant(wrap_angle(pi / 2 - 2.0 * w0 * timing.interaction_time));
  b.step("7 H(x)I").detuned(control, detail::hadamard_detuning(p), detail::hadamard_time(p)).correct(two_pi - alpha, {control});
  b.step("8 correction").close({control, target}, correction == CorrectionMode::extended ? 1 : 0);
  return b.build(ideal);
}

/// SWAP from a single pi/4 exchange step. No correction: the residual global R_x(W0 t) stays.
inline PulseSchedule synth_swap(double J, int a, int b_q, const SpinSystem& sys, const DeviceParameters& p) {
  if (!(J > 0.0)) throw InvalidArgument("SWAP needs a positive exchange energy");
  const GateSpec spec = GateSpec::swap(a, b_q, J);
  ScheduleBuilder b(sys, p);
  b.step("interact").interact(a, b_q, J, pi * p.constants.hbar() / (4.0 * J));
  return b.build(ideal_unitary(spec, sys));
}

/// Whole resonant revolutions covering at least `duration`.
inline PulseSchedule synth_idle(double duration, const SpinSystem& sys, const DeviceParameters& p) {
  ScheduleBuilder b(sys, p);
  const int n = static_cast<int>(std::ceil(duration / spectator_period(p) - 1e-9));
  for (int i = 0; i < n; ++i) b.step("idle").resonant(two_pi);
  return b.build(identity(sys.dim()));
}

/// System a gate is synthesized on: register size and alignment from the device.
inline SpinSystem system_for(int num_donors, const DeviceParameters& p, bool include_nuclei = false) {
  SpinSystem sys{.num_donors = num_donors, .include_nuclei = include_nuclei, .alignment = p.alignment};
  sys.validate();
  return sys;
}

inline PulseSchedule synthesize(const GateSpec& spec, const SpinSystem& sys, const DeviceParameters& p) {
  spec.validate(sys);
  switch (spec.kind) {
    case GateKind::x: return synth_x(spec.theta, spec.qubits[0], sys, p);
    case GateKind::y: return synth_y(spec.theta, spec.qubits[0], sys, p);
    case GateKind::z: return synth_z(spec.theta, spec.qubits[0], sys, p);
    case GateKind::hadamard: return synth_hadamard(spec.qubits[0], sys, p);
    case GateKind::cnot:
      return synth_cnot(spec.qubits[0], spec.qubits[1], sys, p, spec.mode, spec.J, spec.correction,
                        spec.x_conjugation);
    case GateKind::swap:
      return synth_swap(spec.J.value_or(exchange_strength(p.d, p)), spec.qubits[0], spec.qubits[1], sys, p);
    case GateKind::idle: return synth_idle(spec.idle_duration, sys, p);
  }
  throw InvalidArgument("unsupported gate");
}

/// Runs gates on disjoint qubit sets simultaneously. Every component is padded with
/// whole spectator revolutions to the common duration and the controls are merged
/// over the union of all segment boundaries.
inline PulseSchedule compose_parallel(const std::vector<GateSpec>& gates, const SpinSystem& sys,
                                      const DeviceParameters& p) {
  if (sys.dipole) throw InvalidArgument("parallel composition is unavailable with always-on dipole coupling");
  std::set<int> used;
  std::vector<PulseSchedule> parts;
  std::vector<std::vector<int>> owned;
  Matrix ideal = identity(sys.dim());
  for (const auto& g : gates) {
    g.validate(sys);
    if (g.kind == GateKind::cnot && g.mode != CnotMode::exchange)
      throw InvalidArgument("parallel composition supports exchange-mode CNOTs only");
    for (int q : g.qubits)
      if (!used.insert(q).second) throw InvalidArgument("parallel gates must act on disjoint qubits");
    parts.push_back(synthesize(g, sys, p));
    owned.push_back(g.qubits);
    ideal = ideal_unitary(g, sys) * ideal;
  }
  if (parts.size() == 1) return parts.front();

  const double period = spectator_period(p);
  double total = 0.0;
  for (auto& part : parts) {
    ScheduleBuilder pad(sys, p);
    pad.step("pad").correct(wrap_angle(two_pi - std::fmod(resonant_rotation_rate(p) * part.duration(), two_pi)),
                            owned[&part - parts.data()]);
    part = part.then(pad.build());
    total = std::max(total, part.duration());
  }
  for (auto& part : parts) {
    const int extra = static_cast<int>(std::llround((total - part.duration()) / period));
    ScheduleBuilder pad(sys, p);
    for (int i = 0; i < extra; ++i) pad.step("pad").resonant(two_pi);
    part = part.then(pad.build());
  }

  std::vector<double> cuts{0.0};
  for (const auto& part : parts) {
    double t = 0.0;
    for (const auto& seg : part.segments) cuts.push_back(t += seg.duration);
  }
  std::sort(cuts.begin(), cuts.end());
  const double eps = 1e-12 * std::max(total, period);
  std::vector<double> bounds;
  for (double c : cuts)
    if (bounds.empty() || c - bounds.back() > eps) bounds.push_back(c);
  bounds.back() = std::max(bounds.back(), total);

  PulseSchedule out{.device = p, .system = sys, .declared_target = ideal};
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double mid = 0.5 * (bounds[i] + bounds[i + 1]);
    PulseSegment seg = detail::resonant_segment(sys, p, bounds[i + 1] - bounds[i], "");
    for (std::size_t g = 0; g < parts.size(); ++g) {
      double t = 0.0;
      for (const auto& src : parts[g].segments) {
        if (mid < t + src.duration || &src == &parts[g].segments.back()) {
          for (int q : owned[g]) seg.hyperfine[q] = src.hyperfine[q];
          seg.exchange.insert(seg.exchange.end(), src.exchange.begin(), src.exchange.end());
          seg.label += (seg.label.empty() ? "" : " | ") + src.label;
          break;
        }
        t += src.duration;
      }
    }
    out.segments.push_back(std::move(seg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports.

struct GateReport {
  GateSpec spec;
  PulseSchedule schedule;
  Matrix ideal;
  Matrix achieved;
  double fidelity = 0.0;
  std::vector<std::pair<std::string, double>> step_durations;
  double residual_rotation = 0.0;  ///< uncorrected global X angle left on every qubit (SWAP)
};

/// Synthesizes and executes a gate. SWAP is executed drive-off, matching its
/// interaction-only definition; its drive rotation is reported separately.
inline GateReport make_report(const GateSpec& spec, const SpinSystem& sys, const DeviceParameters& p,
                              ExecuteOptions opt = {}) {
  GateReport r{.spec = spec, .schedule = synthesize(spec, sys, p)};
  r.ideal = r.schedule.declared_target.value_or(ideal_unitary(spec, r.schedule.system));
  if (spec.kind == GateKind::swap) {
    opt.drive_on = false;
    r.residual_rotation = wrap_angle(resonant_rotation_rate(p) * r.schedule.duration());
  }
  r.achieved = execute_schedule(r.schedule, opt).unitary;
  r.fidelity = gate_fidelity(r.ideal, r.achieved);
  r.step_durations = grouped_steps(r.schedule);
  return r;
}

}  // namespace donorspin
