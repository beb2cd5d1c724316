#pragma once

// Piecewise-constant pulse schedules and their propagators.
//
// Rotating-frame segments are static and exponentiated exactly. Lab-frame segments
// are split into their static part (solved exactly) and the RF drive, which is
// integrated with the midpoint rule in the interaction picture of the static part.
// The RF clock runs continuously across segments.

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "donorspin/core.hpp"
#include "donorspin/params.hpp"
#include "donorspin/spin_model.hpp"

namespace donorspin {

enum class Frame { rotating, lab };

inline std::string_view to_string(Frame f) { return f == Frame::rotating ? "rotating" : "lab"; }

inline Frame frame_from_string(std::string_view s) {
  if (s == "rotating") return Frame::rotating;
  if (s == "lab") return Frame::lab;
  throw InvalidArgument("unknown frame '" + std::string(s) + "' (expected rotating or lab)");
}

/// One step of a control table: constant controls held for `duration` seconds.
struct PulseSegment {
  double duration = 0.0;
  std::vector<double> hyperfine;  ///< control A per donor, J
  std::vector<ExchangeSetting> exchange;
  Frame frame = Frame::rotating;
  std::string label;
};

struct PulseSchedule {
  std::vector<PulseSegment> segments;
  DeviceParameters device{};
  SpinSystem system{};
  std::optional<Matrix> declared_target;

  double duration() const {
    double total = 0.0;
    for (const auto& s : segments) total += s.duration;
    return total;
  }

  std::vector<double> step_durations() const {
    std::vector<double> out;
    out.reserve(segments.size());
    for (const auto& s : segments) out.push_back(s.duration);
    return out;
  }

  Frame frame() const { return segments.empty() ? Frame::rotating : segments.front().frame; }

  void validate() const {
    device.validate();
    system.validate();
    for (const auto& s : segments) {
      if (!(s.duration >= 0.0)) throw InvalidArgument("segment duration must be non-negative");
      if (s.frame != frame()) throw InvalidArgument("all segments of a schedule must share one frame");
      if (static_cast<int>(s.hyperfine.size()) != system.num_donors)
        throw DimensionMismatch("segment '" + s.label + "' needs one hyperfine value per donor");
      for (double A : s.hyperfine) detuning(A, device);
      for (const auto& x : s.exchange) {
        if (x.J < 0.0) throw InvalidArgument("exchange energy must be non-negative");
        if (x.first == x.second || x.first < 0 || x.second < 0 || x.first >= system.num_donors ||
            x.second >= system.num_donors)
          throw InvalidArgument("exchange pair out of range");
      }
    }
    if (declared_target && (declared_target->rows() != system.dim() || declared_target->cols() != system.dim()))
      throw DimensionMismatch("declared target does not match the system dimension");
  }

  /// This schedule followed by `next` (same device and system).
  PulseSchedule then(const PulseSchedule& next) const {
    if (next.system.dim() != system.dim()) throw DimensionMismatch("schedules act on different systems");
    PulseSchedule out = *this;
    out.segments.insert(out.segments.end(), next.segments.begin(), next.segments.end());
    if (declared_target && next.declared_target)
      out.declared_target = Matrix(*next.declared_target * *declared_target);
    else
      out.declared_target.reset();
    return out;
  }
};

/// Copy of a schedule with every segment moved to frame `f`.
inline PulseSchedule with_frame(PulseSchedule s, Frame f) {
  for (auto& seg : s.segments) seg.frame = f;
  return s;
}

/// Hermitian eigendecomposition H = V diag(E) V^dagger, computed on H / max|H|.
struct Spectrum {
  Eigen::VectorXd energies;
  Matrix vectors;

  explicit Spectrum(const Matrix& h) {
    const double scale = max_abs(h);
    if (scale == 0.0) {
      energies = Eigen::VectorXd::Zero(h.rows());
      vectors = identity(h.rows());
      return;
    }
    const Matrix sym = 0.5 * (h + h.adjoint()) / scale;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
    energies = solver.eigenvalues() * scale;
    vectors = solver.eigenvectors();
  }

  /// exp(-i H t / hbar).
  Matrix evolve(double t, double hbar) const {
    Vector phases(energies.size());
    for (Index i = 0; i < energies.size(); ++i) phases[i] = std::polar(1.0, -energies[i] * t / hbar);
    return vectors * phases.asDiagonal() * vectors.adjoint();
  }
};

/// Polar factor of m; removes rounding drift accumulated over long products of step unitaries.
inline Matrix nearest_unitary(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// U = exp(-i H t / hbar) for a Hermitian H.
inline Matrix propagate_constant(const Matrix& h, double t, double hbar = PhysicalConstants{}.hbar()) {
  if (h.rows() != h.cols()) throw DimensionMismatch("Hamiltonian must be square");
  if (!is_hermitian(h)) throw InvalidArgument("Hamiltonian is not Hermitian");
  if (!(t >= 0.0)) throw InvalidArgument("evolution time must be non-negative");
  return Spectrum(h).evolve(t, hbar);
}

struct ExecuteOptions {
  bool drive_on = true;
  DriveOptions drive{};
  double lab_tolerance = 1e-9;  ///< max-norm change on halving the lab step
  long lab_initial_steps = 16;
  long lab_max_steps = long{1} << 24;
};

struct Execution {
  Matrix unitary;
  double duration = 0.0;
};

namespace detail {

inline Matrix rotating_segment_hamiltonian(const PulseSchedule& s, const PulseSegment& seg,
                                           const ExecuteOptions& opt) {
  return rotating_hamiltonian(s.system, seg.hyperfine, seg.exchange, s.device, opt.drive, opt.drive_on);
}

// Lab propagator of one segment starting at global time t0, for `steps` midpoint steps.
class LabSegment {
 public:
  LabSegment(const PulseSchedule& s, const PulseSegment& seg, const ExecuteOptions& opt)
      : sys_(s.system), p_(s.device), opt_(opt),
        spectrum_(lab_static_hamiltonian(s.system, seg.hyperfine, seg.exchange, s.device)) {
    // Drive operators at unit amplitude, rotated into the static eigenbasis.
    const auto& c = p_.constants;
    const Index n = sys_.dim();
    Matrix dx = Matrix::Zero(n, n), dy = Matrix::Zero(n, n);
    for (int q = 0; q < sys_.num_donors; ++q) {
      dx += drive_energy(p_) * electron_op(sys_, q, Pauli::x);
      dy += drive_energy(p_) * electron_op(sys_, q, Pauli::y);
      if (sys_.include_nuclei && opt_.drive.drive_nuclei) {
        dx -= c.g_n() * c.mu_n() * p_.B_ac * nucleus_op(sys_, q, Pauli::x);
        dy -= c.g_n() * c.mu_n() * p_.B_ac * nucleus_op(sys_, q, Pauli::y);
      }
    }
    dx_ = spectrum_.vectors.adjoint() * dx * spectrum_.vectors;
    dy_ = spectrum_.vectors.adjoint() * dy * spectrum_.vectors;
  }

  Matrix propagate(double t0, double duration, long steps) const {
    const double hbar = p_.constants.hbar();
    const Index n = sys_.dim();
    Matrix ui = identity(n);
    if (opt_.drive_on && duration > 0.0) {
      const double dt = duration / static_cast<double>(steps);
      Vector phase(n);
      for (long k = 0; k < steps; ++k) {
        const double tau = (static_cast<double>(k) + 0.5) * dt;
        const auto [cx, cy] = drive_components(t0 + tau, p_, opt_.drive);
        for (Index i = 0; i < n; ++i) phase[i] = std::polar(1.0, spectrum_.energies[i] * tau / hbar);
        const Matrix hi = phase.asDiagonal() * (cx * dx_ + cy * dy_) * phase.conjugate().asDiagonal();
        ui = Spectrum(hi).evolve(dt, hbar) * ui;
      }
    }
    Vector free(n);
    for (Index i = 0; i < n; ++i) free[i] = std::polar(1.0, -spectrum_.energies[i] * duration / hbar);
    return spectrum_.vectors * free.asDiagonal() * nearest_unitary(ui) * spectrum_.vectors.adjoint();
  }

  Matrix propagate_converged(double t0, double duration) const {
    if (!opt_.drive_on || duration == 0.0) return propagate(t0, duration, 1);
    long steps = opt_.lab_initial_steps;
    Matrix prev = propagate(t0, duration, steps);
    while (steps < opt_.lab_max_steps) {
      steps *= 2;
      Matrix cur = propagate(t0, duration, steps);
      if (max_abs(cur - prev) <= opt_.lab_tolerance) return cur;
      prev = std::move(cur);
    }
    throw Error("lab-frame integration did not converge within the step budget");
  }

 private:
  SpinSystem sys_;
  DeviceParameters p_;
  ExecuteOptions opt_;
  Spectrum spectrum_;
  Matrix dx_, dy_;
};

}  // namespace detail

/// Ordered product of the segment propagators.
inline Execution execute_schedule(const PulseSchedule& s, const ExecuteOptions& opt = {}) {
  s.validate();
  Matrix u = identity(s.system.dim());
  double t = 0.0;
  for (const auto& seg : s.segments) {
    if (seg.frame == Frame::rotating) {
      u = propagate_constant(detail::rotating_segment_hamiltonian(s, seg, opt), seg.duration,
                             s.device.constants.hbar()) * u;
    } else {
      u = detail::LabSegment(s, seg, opt).propagate_converged(t, seg.duration) * u;
    }
    t += seg.duration;
  }
  return {std::move(u), s.duration()};
}

/// Computational basis state with the given label (e.g. "01", "0u1d").
inline Vector basis_state(const SpinSystem& sys, std::string_view label) {
  for (Index i = 0; i < sys.dim(); ++i) {
    if (sys.basis_label(i) == label) {
      Vector v = Vector::Zero(sys.dim());
      v[i] = 1.0;
      return v;
    }
  }
  throw InvalidArgument("unknown basis label '" + std::string(label) + "'");
}

struct EvolutionTrace {
  std::vector<double> times;                     ///< s
  std::vector<std::vector<double>> populations;  ///< one row per time, one column per basis state
  std::vector<std::string> labels;
  std::string initial_state;
};

/// Populations sampled uniformly over the schedule; the last row uses execute_schedule.
inline EvolutionTrace trace_evolution(const PulseSchedule& s, const Vector& initial, int samples = 1000,
                                      const ExecuteOptions& opt = {}) {
  s.validate();
  if (samples < 2) throw InvalidArgument("at least two samples required");
  if (initial.size() != s.system.dim()) throw DimensionMismatch("initial state dimension mismatch");
  if (std::abs(initial.norm() - 1.0) > 1e-9) throw InvalidArgument("initial state is not normalized");

  EvolutionTrace out;
  for (Index i = 0; i < s.system.dim(); ++i) out.labels.push_back(s.system.basis_label(i));
  Index argmax = 0;
  initial.cwiseAbs().maxCoeff(&argmax);
  out.initial_state = initial.cwiseAbs2()[argmax] > 1.0 - 1e-12 ? out.labels[argmax] : "superposition";

  auto record = [&](double t, const Vector& psi) {
    out.times.push_back(t);
    std::vector<double> row(psi.size());
    for (Index i = 0; i < psi.size(); ++i) row[i] = std::norm(psi[i]);
    out.populations.push_back(std::move(row));
  };

  const double total = s.duration();
  if (total == 0.0) {
    record(0.0, execute_schedule(s, opt).unitary * initial);
    return out;
  }

  Vector psi = initial;  // state at the start of the current segment
  double seg_start = 0.0;
  std::size_t next = 0;  // next sample index
  for (const auto& seg : s.segments) {
    const double seg_end = seg_start + seg.duration;
    std::optional<Spectrum> spectrum;
    std::optional<detail::LabSegment> lab;
    if (seg.frame == Frame::rotating)
      spectrum.emplace(detail::rotating_segment_hamiltonian(s, seg, opt));
    else
      lab.emplace(s, seg, opt);
    while (next + 1 < static_cast<std::size_t>(samples)) {
      const double t = total * static_cast<double>(next) / static_cast<double>(samples - 1);
      if (t > seg_end) break;
      const double tau = t - seg_start;
      if (tau == 0.0) {
        record(t, psi);
      } else {
        const Matrix u = spectrum ? spectrum->evolve(tau, s.device.constants.hbar())
                                  : lab->propagate_converged(seg_start, tau);
        record(t, u * psi);
      }
      ++next;
    }
    psi = (spectrum ? spectrum->evolve(seg.duration, s.device.constants.hbar())
                    : lab->propagate_converged(seg_start, seg.duration)) * psi;
    seg_start = seg_end;
  }
  while (next + 1 < static_cast<std::size_t>(samples)) {  // rounding at the tail
    record(total * static_cast<double>(next) / static_cast<double>(samples - 1), psi);
    ++next;
  }
  record(total, execute_schedule(s, opt).unitary * initial);
  return out;
}

/// CSV export: optional `# ` audit lines, then `time_ns,pop_<label>...`, 12 significant digits.
inline void write_trace_csv(std::ostream& os, const EvolutionTrace& trace,
                            const std::vector<std::string>& audit = {}) {
  for (const auto& line : audit) os << "# " << line << '\n';
  os << "time_ns";
  for (const auto& l : trace.labels) os << ",pop_" << l;
  os << '\n';
  std::ostringstream row;
  row << std::setprecision(12);
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    row.str("");
    row << trace.times[k] * 1e9;
    for (double p : trace.populations[k]) row << ',' << p;
    os << row.str() << '\n';
  }
}

}  // namespace donorspin
