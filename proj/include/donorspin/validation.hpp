#pragma once

// Property suite behind `donorspin validate`. Each check is independent; checks whose
// syntheses are infeasible for the given device are reported as skipped.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "donorspin/analysis.hpp"
#include "donorspin/gates.hpp"
#include "donorspin/propagator.hpp"
#include "donorspin/spin_model.hpp"

namespace donorspin {

enum class CheckStatus { pass, fail, skip };

inline std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::skip: return "SKIP";
  }
  return "?";
}

struct CheckResult {
  std::string module;
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
};

struct ValidationOptions {
  std::uint64_t seed = 20050101;
  int samples = 20;
};

/// Haar-ish random unitary from the QR factorization of a complex Gaussian matrix.
inline Matrix random_unitary(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < dim; ++i) q.col(i) *= std::polar(1.0, std::arg(r(i, i)));
  return q;
}

namespace detail {

struct Check {
  std::string module;
  std::string name;
  std::function<std::string()> run;  // returns detail; throws CheckFailure on violation
};

class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw CheckFailure(what);
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// Runs f on every gate that can be synthesized for this device; throws
// InfeasibleControl only when none can.
template <class F>
std::string for_feasible(const std::vector<GateSpec>& gates, const SpinSystem& sys, const DeviceParameters& p, F f) {
  int done = 0, skipped = 0;
  std::string last;
  for (const auto& g : gates) {
    PulseSchedule s;
    try {
      s = synthesize(g, sys, p);
    } catch (const InfeasibleControl& e) {
      ++skipped;
      last = e.what();
      continue;
    }
    f(g, s);
    ++done;
  }
  if (done == 0) throw InfeasibleControl(last);
  return skipped ? ", " + std::to_string(skipped) + " infeasible gates skipped" : "";
}

inline std::vector<GateSpec> single_qubit_gates(int target = 0) {
  return {GateSpec::x(pi, target), GateSpec::x(pi / 2, target), GateSpec::y(pi, target),
          GateSpec::hadamard(target), GateSpec::z(pi, target)};
}

}  // namespace detail

inline std::vector<CheckResult> run_validation(const DeviceParameters& p, const ValidationOptions& opt = {}) {
  using detail::fmt;
  using detail::require;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double hbar = p.constants.hbar();
  std::vector<detail::Check> checks;

  // params
  checks.push_back({"params", "resonant_frequency increasing on [0, A0]", [&] {
    double prev = resonant_frequency(0.0, p);
    for (int i = 1; i <= 1000; ++i) {
      const double w = resonant_frequency(p.A0 * i / 1000.0, p);
      require(w > prev, "not increasing at sample " + std::to_string(i));
      prev = w;
    }
    return std::string("1000 samples");
  }});
  checks.push_back({"params", "detuning zero at A0 and monotone", [&] {
    require(detuning(p.A0, p) == 0.0, "detuning(A0) != 0");
    double prev = detuning(p.A_min, p);
    for (int i = 1; i <= 1000; ++i) {
      const double w = detuning(p.A_min + (p.A0 - p.A_min) * i / 1000.0, p);
      require(w >= prev, "not monotone at sample " + std::to_string(i));
      prev = w;
    }
    return std::string("1000 samples");
  }});
  checks.push_back({"params", "exchange maximum at 5/4 a*", [&] {
    // Near the peak J(c) and J(d) agree to ~1e-16 relative, so candidates are compared
    // through log J(c) - log J(d) written without cancellation.
    auto log_ratio = [&](double c, double d) { return 2.5 * std::log1p((c - d) / d) - 2.0 * (c - d) / p.a_star; };
    double a = 0.2 * p.a_star, b = 5.0 * p.a_star;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    while (b - a > 1e-13 * p.a_star) {
      if (log_ratio(c, d) > 0.0) b = d; else a = c;
      c = b - r * (b - a);
      d = a + r * (b - a);
    }
    const double peak = 0.5 * (a + b);
    const double rel = std::abs(peak / exchange_peak_separation(p) - 1.0);
    require(rel <= 1e-9, "golden section off by " + fmt(rel));
    require(exchange_strength(peak, p) > exchange_strength(0.99 * peak, p) &&
                exchange_strength(peak, p) > exchange_strength(1.01 * peak, p),
            "exchange_strength has no maximum at the located point");
    return "relative deviation " + fmt(rel);
  }});
  checks.push_back({"params", "dipole d^3 scaling", [&] {
    const double ref = dipole_strength(p.d, p.constants) * std::pow(p.d, 3);
    double worst = 0.0;
    for (int i = 0; i < opt.samples; ++i) {
      const double d = 1e-9 * std::pow(10.0, 2.0 * unit(rng));
      worst = std::max(worst, std::abs(dipole_strength(d, p.constants) * d * d * d / ref - 1.0));
    }
    require(worst <= 1e-12, "relative deviation " + fmt(worst));
    return "max relative deviation " + fmt(worst);
  }});
  checks.push_back({"params", "local-control pi_time * fwhm = 2 pi", [&] {
    double worst = 0.0;
    for (int i = 0; i < opt.samples; ++i) {
      const auto t = local_control_tradeoff(1e-6 * std::pow(10.0, 3.0 * unit(rng)), max_detuning(p), p.constants);
      worst = std::max(worst, std::abs(t.pi_time * t.fwhm / two_pi - 1.0));
    }
    require(worst <= 1e-12, "relative deviation " + fmt(worst));
    return "max relative deviation " + fmt(worst);
  }});

  // spin_model
  checks.push_back({"spin_model", "builders are Hermitian", [&] {
    const double dwm = max_detuning(p);
    require(is_hermitian(single_donor_static(p.A0, p)), "single_donor_static");
    require(is_hermitian(single_electron_lab(p.A0, 1e-9 * unit(rng), p)), "single_electron_lab");
    require(is_hermitian(single_electron_rotating(-dwm * unit(rng), p)), "single_electron_rotating");
    require(is_hermitian(two_electron_rotating(-dwm * unit(rng), -dwm * unit(rng), 1e-27, p)), "two_electron_rotating");
    require(is_hermitian(dipole_term(p.d, Axis::x, p)), "dipole_term");
    require(is_hermitian(two_electron_rotating_full(0.0, 0.0, 1e-27, p.d, p)), "two_electron_rotating_full");
    return std::string("6 builders");
  }});
  checks.push_back({"spin_model", "commutator identities", [&] {
    const SpinSystem two{.num_donors = 2};
    const double mu = drive_energy(p);
    const double dw = -max_detuning(p) * unit(rng);
    const Matrix global = mu * (electron_op(two, 0, Pauli::x) + electron_op(two, 1, Pauli::x)) +
                          hbar * dw * (electron_op(two, 0, Pauli::z) + electron_op(two, 1, Pauli::z));
    const double J = 1e-27, D = dipole_strength(p.d, p.constants);
    const Matrix ss = exchange_op(two, 0, 1);
    const double c1 = max_abs(commutator(global, J * ss)) / (max_abs(global) * max_abs(J * ss));
    const double c2 = max_abs(commutator(global, (J + D) * ss)) / (max_abs(global) * max_abs((J + D) * ss));
    const Matrix zz = electron_spin(Pauli::z);
    const Matrix lhs = commutator(kron(zz, zz), kron(electron_spin(Pauli::x), identity(2)) + kron(identity(2), electron_spin(Pauli::x)));
    const Matrix rhs = Complex(0, 2) * (kron(electron_spin(Pauli::y), zz) + kron(zz, electron_spin(Pauli::y)));
    const double c3 = max_abs(lhs - rhs) / max_abs(rhs);
    require(c1 <= 1e-12 && c2 <= 1e-12 && c3 <= 1e-12, "identity residuals " + fmt(c1) + ", " + fmt(c2) + ", " + fmt(c3));
    return "residuals " + fmt(c1) + ", " + fmt(c2) + ", " + fmt(c3);
  }});
  checks.push_back({"spin_model", "lab and rotating frames agree on random schedules", [&] {
    const SpinSystem one{};
    double worst = 0.0;
    for (int i = 0; i < opt.samples / 4 + 1; ++i) {
      PulseSchedule s{.device = p, .system = one};
      const int n = 1 + static_cast<int>(unit(rng) * 3);
      for (int k = 0; k < n; ++k)
        s.segments.push_back({.duration = 20e-9 * unit(rng),
                              .hyperfine = {p.A_min + (p.A0 - p.A_min) * unit(rng)}});
      const Matrix rot = execute_schedule(s).unitary;
      const Matrix lab = execute_schedule(with_frame(s, Frame::lab)).unitary;
      worst = std::max(worst, 1.0 - gate_fidelity(rot, to_rotating_frame(lab, s.duration(), one, p)));
    }
    require(worst <= 1e-8, "infidelity " + fmt(worst));
    return "max infidelity " + fmt(worst);
  }});
  checks.push_back({"spin_model", "frozen nucleus under single-qubit gates", [&] {
    double worst = 0.0;
    const std::string note = detail::for_feasible(detail::single_qubit_gates(), system_for(1, p), p,
                                                  [&](const GateSpec&, const PulseSchedule& s) {
      worst = std::max(worst, nuclear_flip_probability(with_nuclei(s)));
    });
    require(worst <= 1e-4, "nuclear flip probability " + fmt(worst));
    return "max flip probability " + fmt(worst) + note;
  }});

  // propagator
  checks.push_back({"propagator", "propagators are unitary", [&] {
    double worst = 0.0;
    std::string note;
    for (int n = 1; n <= 3; ++n)
      note = detail::for_feasible(detail::single_qubit_gates(), system_for(n, p), p,
                                  [&](const GateSpec&, const PulseSchedule& s) {
        const Matrix u = execute_schedule(s).unitary;
        worst = std::max(worst, max_abs(u.adjoint() * u - identity(u.rows())));
      });
    require(worst <= 1e-12, "unitarity defect " + fmt(worst));
    return "max unitarity defect " + fmt(worst) + note;
  }});
  checks.push_back({"propagator", "composition of schedules", [&] {
    const SpinSystem sys = system_for(2, p);
    const auto s1 = synth_x(pi / 2, 0, sys, p);
    const auto s2 = synth_x(pi, 1, sys, p);
    const double diff = max_abs(execute_schedule(s1.then(s2)).unitary -
                                execute_schedule(s2).unitary * execute_schedule(s1).unitary);
    require(diff <= 1e-13, "difference " + fmt(diff));
    return "difference " + fmt(diff);
  }});
  checks.push_back({"propagator", "lab integrator is second order", [&] {
    // Needs a detuned donor so the interaction-picture drive is genuinely time dependent.
    const SpinSystem one{};
    DeviceParameters q = p;
    q.A_min = std::min(p.A_min, 0.5 * p.A0);
    const PulseSchedule s{.segments = {{.duration = 20e-9, .hyperfine = {0.75 * q.A0}, .frame = Frame::lab}},
                          .device = q, .system = one};
    PulseSchedule rot = with_frame(s, Frame::rotating);
    const Matrix exact = from_rotating_frame(execute_schedule(rot).unitary, s.duration(), one, q);
    const detail::LabSegment lab(s, s.segments[0], {});
    const double e1 = max_abs(lab.propagate(0.0, s.duration(), 100) - exact);
    const double e2 = max_abs(lab.propagate(0.0, s.duration(), 1000) - exact);
    const double slope = std::log10(e1 / e2);
    require(slope >= 2.0, "log-log slope " + fmt(slope));
    return "log-log slope " + std::to_string(slope);
  }});

  // gates
  checks.push_back({"gates", "durations are multiples of the spectator period", [&] {
    const double T = spectator_period(p);
    double worst = 0.0;
    auto gates = detail::single_qubit_gates();
    const double J = exchange_for_interaction_time(1e-11, p);
    gates.push_back(GateSpec::cnot(0, 1, CnotMode::exchange, J));
    gates.push_back(GateSpec::cnot(0, 1, CnotMode::exchange, J, CorrectionMode::extended));
    const std::string note = detail::for_feasible(gates, system_for(2, p), p,
                                                  [&](const GateSpec&, const PulseSchedule& s) {
      const double ratio = s.duration() / T;
      worst = std::max(worst, std::abs(ratio - std::round(ratio)) / std::max(1.0, std::round(ratio)));
    });
    require(worst <= 1e-9, "relative deviation " + fmt(worst));
    return "max relative deviation " + fmt(worst) + note;
  }});
  checks.push_back({"gates", "single-qubit gates on 1-3 donors", [&] {
    double worst = 0.0;
    std::string note;
    for (int n = 1; n <= 3; ++n)
      for (int target = 0; target < n; ++target)
        note = detail::for_feasible(detail::single_qubit_gates(target), system_for(n, p), p,
                                    [&](const GateSpec&, const PulseSchedule& s) {
          worst = std::max(worst, 1.0 - gate_fidelity(*s.declared_target, execute_schedule(s).unitary));
        });
    require(worst <= 1e-6, "infidelity " + fmt(worst));
    return "max infidelity " + fmt(worst) + note;
  }});
  checks.push_back({"gates", "correction wraps are minimal", [&] {
    int checked = 0, infeasible = 0;
    for (int i = 0; i < 1000; ++i) {
      const double deficit = two_pi * i / 1000.0;
      if (wrap_angle(deficit) == 0.0) continue;
      CorrectionPlan plan;
      try {
        plan = plan_correction(deficit, {0}, p);
      } catch (const InfeasibleControl&) {
        for (int k = 0; k <= kMaxCorrectionWraps; ++k)
          require(!idle_revolutions((deficit + two_pi * k) / resonant_rotation_rate(p), p),
                  "planner missed a feasible correction at deficit " + fmt(deficit));
        ++infeasible;
        continue;
      }
      for (int k = 0; k < plan.wraps; ++k) {
        const double t = (deficit + two_pi * k) / resonant_rotation_rate(p);
        require(!idle_revolutions(t, p), "smaller wrap count feasible at deficit " + fmt(deficit));
      }
      ++checked;
    }
    if (checked == 0) throw InfeasibleControl("no deficit admits a correction");
    return std::to_string(checked) + " deficits" +
           (infeasible ? ", " + std::to_string(infeasible) + " confirmed infeasible" : "");
  }});
  checks.push_back({"gates", "X decomposition for theta in (pi, 2pi)", [&] {
    double worst = 0.0;
    std::size_t steps = 0;
    for (double theta : {1.2 * pi, 1.5 * pi, 1.9 * pi}) {
      const auto r = make_report(GateSpec::x(theta, 0), system_for(1, p), p);
      worst = std::max(worst, 1.0 - r.fidelity);
      steps = std::max(steps, r.step_durations.size() / 2);
    }
    require(worst <= 1e-6, "infidelity " + fmt(worst));
    return std::to_string(steps) + " steps, max infidelity " + fmt(worst);
  }});
  checks.push_back({"gates", "X conjugation suppresses dipole errors", [&] {
    const SpinSystem two = system_for(2, p);
    GateSpec g = GateSpec::cnot(0, 1, CnotMode::dipole);
    const double with = make_report(g, two, p).fidelity;
    g.x_conjugation = false;
    const double without = make_report(g, two, p).fidelity;
    require(with > without, "conjugated " + fmt(with) + " <= idle " + fmt(without));
    return "fidelity " + fmt(with) + " vs " + fmt(without);
  }});

  // analysis
  checks.push_back({"analysis", "fidelity is phase invariant and symmetric", [&] {
    double worst = 0.0;
    for (int i = 0; i < opt.samples; ++i) {
      const Matrix u = random_unitary(4, rng), v = random_unitary(4, rng);
      const double f = gate_fidelity(u, v);
      require(f >= 0.0 && f <= 1.0, "fidelity outside [0, 1]");
      worst = std::max(worst, std::abs(f - gate_fidelity(v, u)));
      worst = std::max(worst, std::abs(1.0 - gate_fidelity(u, std::polar(1.0, two_pi * unit(rng)) * u)));
    }
    require(worst <= 1e-12, "deviation " + fmt(worst));
    return "max deviation " + fmt(worst);
  }});
  checks.push_back({"analysis", "Rabi envelope bound", [&] {
    for (int i = 0; i < 1000; ++i) {
      const double dw = -max_detuning(p) * unit(rng);
      const double t = 1e-7 * unit(rng);
      const double mu = drive_energy(p);
      const double env = mu * mu / (mu * mu + hbar * hbar * dw * dw);
      require(rabi_probability(t, dw, p.B_ac, p.constants) <= env * (1.0 + 1e-15), "bound violated");
    }
    return std::string("1000 samples");
  }});

  std::vector<CheckResult> results;
  for (const auto& c : checks) {
    CheckResult r{.module = c.module, .name = c.name};
    try {
      r.detail = c.run();
    } catch (const detail::CheckFailure& e) {
      r.status = CheckStatus::fail;
      r.detail = e.what();
    } catch (const InfeasibleControl& e) {
      r.status = CheckStatus::skip;
      r.detail = std::string("infeasible for this device: ") + e.what();
    } catch (const std::exception& e) {
      r.status = CheckStatus::fail;
      r.detail = std::string("error: ") + e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace donorspin
