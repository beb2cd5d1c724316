#pragma once

// Hilbert spaces, spin operators and the lab- and rotating-frame Hamiltonians.
//
// Register layout: slot 0 is the most significant tensor factor and the slots run
// electron_1 [nucleus_1] electron_2 [nucleus_2] ... . Electron slots use the logical
// basis {|0> = |down>, |1> = |up>}; nuclear slots use {|up>, |down>}. In the logical
// basis the physical electron spin operators are therefore
//   sigma_x = X,  sigma_y = -Y,  sigma_z = -Z.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "donorspin/core.hpp"
#include "donorspin/params.hpp"

namespace donorspin {

enum class Pauli { x, y, z };

/// Standard Pauli matrix in the computational basis.
inline Matrix pauli(Pauli which) {
  Matrix m = Matrix::Zero(2, 2);
  switch (which) {
    case Pauli::x: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case Pauli::y: m(0, 1) = Complex(0, -1); m(1, 0) = Complex(0, 1); break;
    case Pauli::z: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
  }
  return m;
}

/// Physical electron spin operator expressed in the logical basis (|0> = down first).
inline Matrix electron_spin(Pauli which) {
  return which == Pauli::x ? pauli(Pauli::x) : Matrix(-pauli(which));
}

/// Physical nuclear spin operator in the {|up>, |down>} basis.
inline Matrix nuclear_spin(Pauli which) { return pauli(which); }

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Places a single-slot operator on `slot` of a register with `num_slots` two-level slots.
inline Matrix embed_slot(const Matrix& op, int slot, int num_slots) {
  Matrix out = identity(1);
  for (int s = 0; s < num_slots; ++s) out = kron(out, s == slot ? op : identity(2));
  return out;
}

/// Describes the register: how many donors, and whether nuclei and dipolar coupling are modelled.
struct SpinSystem {
  int num_donors = 1;
  bool include_nuclei = false;
  bool dipole = false;  ///< dipole-dipole coupling between every donor pair
  Axis alignment = Axis::z;

  void validate() const {
    if (num_donors < 1) throw InvalidArgument("a spin system needs at least one donor");
    if (!include_nuclei && num_donors > 4)
      throw InvalidArgument("electron-only systems are limited to 4 donors");
    if (include_nuclei && num_donors > 2)
      throw InvalidArgument("systems with nuclei are limited to 2 donors");
  }

  int slots_per_donor() const { return include_nuclei ? 2 : 1; }
  int num_slots() const { return num_donors * slots_per_donor(); }
  Index dim() const { return Index{1} << num_slots(); }
  int electron_slot(int donor) const { return donor * slots_per_donor(); }
  int nucleus_slot(int donor) const {
    if (!include_nuclei) throw InvalidArgument("system has no nuclei");
    return donor * 2 + 1;
  }

  /// Label of a basis state, e.g. "01" or "0u1u".
  std::string basis_label(Index state) const {
    std::string out;
    for (int s = 0; s < num_slots(); ++s) {
      const bool bit = (state >> (num_slots() - 1 - s)) & 1;
      const bool nuclear = include_nuclei && (s % 2 == 1);
      out += nuclear ? (bit ? 'd' : 'u') : (bit ? '1' : '0');
    }
    return out;
  }
};

inline Matrix electron_op(const SpinSystem& sys, int donor, Pauli which) {
  return embed_slot(electron_spin(which), sys.electron_slot(donor), sys.num_slots());
}

inline Matrix nucleus_op(const SpinSystem& sys, int donor, Pauli which) {
  return embed_slot(nuclear_spin(which), sys.nucleus_slot(donor), sys.num_slots());
}

/// sigma_a . sigma_b between two electrons.
inline Matrix exchange_op(const SpinSystem& sys, int a, int b) {
  Matrix out = Matrix::Zero(sys.dim(), sys.dim());
  for (Pauli k : {Pauli::x, Pauli::y, Pauli::z}) out += electron_op(sys, a, k) * electron_op(sys, b, k);
  return out;
}

/// sigma_e . sigma_n on one donor.
inline Matrix hyperfine_op(const SpinSystem& sys, int donor) {
  Matrix out = Matrix::Zero(sys.dim(), sys.dim());
  for (Pauli k : {Pauli::x, Pauli::y, Pauli::z}) out += electron_op(sys, donor, k) * nucleus_op(sys, donor, k);
  return out;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

/// max |H - H^dagger| <= rel_tol * max |H|.
inline bool is_hermitian(const Matrix& h, double rel_tol = 1e-12) {
  if (h.rows() != h.cols()) return false;
  return max_abs(h - h.adjoint()) <= rel_tol * max_abs(h);
}

/// Exchange coupling J (energy, J >= 0) switched on between two donors.
struct ExchangeSetting {
  int first = 0;
  int second = 1;
  double J = 0.0;
};

enum class DriveConvention {
  co_rotating,  ///< mu_B B_ac (sigma_x cos(wt+phi) + sigma_y sin(wt+phi)); maps onto the rotating frame
  as_printed,   ///< mu_B B_ac (sigma_x sin(wt+phi) + sigma_y cos(wt+phi))
};

struct DriveOptions {
  DriveConvention convention = DriveConvention::co_rotating;
  double rf_phase = 0.0;
  bool drive_nuclei = false;  ///< add the nuclear RF coupling -g_n mu_n B_ac (...)
};

/// Unit vector of a donor axis.
inline Eigen::Vector3d axis_vector(Axis a) {
  switch (a) {
    case Axis::x: return Eigen::Vector3d::UnitX();
    case Axis::y: return Eigen::Vector3d::UnitY();
    case Axis::z: return Eigen::Vector3d::UnitZ();
  }
  return Eigen::Vector3d::UnitZ();
}

/// D (sigma_a . sigma_b - 3 (sigma_a . n)(sigma_b . n)) between electrons a and b.
inline Matrix dipole_coupling(const SpinSystem& sys, int a, int b, double D, const Eigen::Vector3d& n) {
  if (std::abs(n.norm() - 1.0) > 1e-12) throw InvalidArgument("dipole axis must be a unit vector");
  const Pauli ks[3] = {Pauli::x, Pauli::y, Pauli::z};
  Matrix proj_a = Matrix::Zero(sys.dim(), sys.dim());
  Matrix proj_b = Matrix::Zero(sys.dim(), sys.dim());
  for (int k = 0; k < 3; ++k) {
    proj_a += n[k] * electron_op(sys, a, ks[k]);
    proj_b += n[k] * electron_op(sys, b, ks[k]);
  }
  return D * (exchange_op(sys, a, b) - 3.0 * proj_a * proj_b);
}

/// Sum of dipole terms over all donor pairs, separation |i-j| d along the system alignment.
inline Matrix dipole_hamiltonian(const SpinSystem& sys, const DeviceParameters& p) {
  Matrix out = Matrix::Zero(sys.dim(), sys.dim());
  const Eigen::Vector3d n = axis_vector(sys.alignment);
  for (int a = 0; a < sys.num_donors; ++a)
    for (int b = a + 1; b < sys.num_donors; ++b)
      out += dipole_coupling(sys, a, b, dipole_strength((b - a) * p.d, p.constants), n);
  return out;
}

// ---------------------------------------------------------------------------
// Named single- and two-donor Hamiltonians.

/// Static electron-nucleus Hamiltonian of one donor (4x4, electron (x) nucleus).
inline Matrix single_donor_static(double A, const DeviceParameters& p) {
  if (!(A >= 0.0)) throw InvalidArgument("hyperfine energy must be non-negative");
  const SpinSystem sys{.num_donors = 1, .include_nuclei = true};
  const auto& c = p.constants;
  return c.mu_B() * p.B * electron_op(sys, 0, Pauli::z) -
         c.g_n() * c.mu_n() * p.B * nucleus_op(sys, 0, Pauli::z) + A * hyperfine_op(sys, 0);
}

namespace detail {
inline std::pair<double, double> drive_components(double t, const DeviceParameters& p,
                                                  const DriveOptions& drive) {
  const double phase = carrier_frequency(p) * t + drive.rf_phase;
  if (drive.convention == DriveConvention::co_rotating) return {std::cos(phase), std::sin(phase)};
  return {std::sin(phase), std::cos(phase)};
}
}  // namespace detail

/// Lab-frame drive term at time t acting on every electron (and optionally nucleus).
inline Matrix lab_drive_hamiltonian(const SpinSystem& sys, double t, const DeviceParameters& p,
                                    const DriveOptions& drive = {}) {
  const auto [cx, cy] = detail::drive_components(t, p, drive);
  const auto& c = p.constants;
  Matrix out = Matrix::Zero(sys.dim(), sys.dim());
  for (int q = 0; q < sys.num_donors; ++q) {
    out += drive_energy(p) * (cx * electron_op(sys, q, Pauli::x) + cy * electron_op(sys, q, Pauli::y));
    if (sys.include_nuclei && drive.drive_nuclei) {
      out -= c.g_n() * c.mu_n() * p.B_ac *
             (cx * nucleus_op(sys, q, Pauli::x) + cy * nucleus_op(sys, q, Pauli::y));
    }
  }
  return out;
}

/// Time-independent part of the lab-frame Hamiltonian for the given controls.
///
/// Electron-only donors carry sigma_z energy hbar (w_ac/2 + dw(A)); with nuclei the
/// static donor Hamiltonian is used with the physical hyperfine energy that produces the
/// same detuning.
inline Matrix lab_static_hamiltonian(const SpinSystem& sys, std::span<const double> hyperfine,
                                     std::span<const ExchangeSetting> exchange,
                                     const DeviceParameters& p) {
  if (static_cast<int>(hyperfine.size()) != sys.num_donors)
    throw DimensionMismatch("one hyperfine value per donor required");
  const auto& c = p.constants;
  Matrix h = Matrix::Zero(sys.dim(), sys.dim());
  for (int q = 0; q < sys.num_donors; ++q) {
    const double dw = detuning(hyperfine[q], p);
    if (sys.include_nuclei) {
      h += c.mu_B() * p.B * electron_op(sys, q, Pauli::z) -
           c.g_n() * c.mu_n() * p.B * nucleus_op(sys, q, Pauli::z) +
           physical_hyperfine(dw, p) * hyperfine_op(sys, q);
    } else {
      h += c.hbar() * (0.5 * carrier_frequency(p) + dw) * electron_op(sys, q, Pauli::z);
    }
  }
  for (const auto& x : exchange) {
    if (x.J < 0.0) throw InvalidArgument("exchange energy must be non-negative");
    h += x.J * exchange_op(sys, x.first, x.second);
  }
  if (sys.dipole) h += dipole_hamiltonian(sys, p);
  return h;
}

/// Rotating-frame Hamiltonian (static within a segment).
///
/// Electron-only: sum_q [mu_B B_ac sigma_x + hbar dw_q sigma_z] + J sigma.sigma + dipole.
/// With nuclei the frame co-rotates nuclei as well, which keeps the hyperfine flip-flop static.
inline Matrix rotating_hamiltonian(const SpinSystem& sys, std::span<const double> hyperfine,
                                   std::span<const ExchangeSetting> exchange,
                                   const DeviceParameters& p, const DriveOptions& drive = {},
                                   bool drive_on = true) {
  if (static_cast<int>(hyperfine.size()) != sys.num_donors)
    throw DimensionMismatch("one hyperfine value per donor required");
  if (sys.dipole && sys.alignment != Axis::z)
    throw InvalidArgument("dipole coupling is only static in the rotating frame for z-aligned donors");
  const auto& c = p.constants;
  const double cx = std::cos(drive.rf_phase);
  const double cy = std::sin(drive.rf_phase);
  const double offset = p.A0 + p.A0 * p.A0 / detail::second_order_denominator(p);  // hbar w_ac/2 - mu_B B
  Matrix h = Matrix::Zero(sys.dim(), sys.dim());
  for (int q = 0; q < sys.num_donors; ++q) {
    const double dw = detuning(hyperfine[q], p);
    if (drive_on)
      h += drive_energy(p) * (cx * electron_op(sys, q, Pauli::x) + cy * electron_op(sys, q, Pauli::y));
    if (sys.include_nuclei) {
      const double nuclear = c.g_n() * c.mu_n() * p.B + c.mu_B() * p.B + offset;
      h += -offset * electron_op(sys, q, Pauli::z) - nuclear * nucleus_op(sys, q, Pauli::z) +
           physical_hyperfine(dw, p) * hyperfine_op(sys, q);
      if (drive_on && drive.drive_nuclei) {
        h -= c.g_n() * c.mu_n() * p.B_ac *
             (cx * nucleus_op(sys, q, Pauli::x) + cy * nucleus_op(sys, q, Pauli::y));
      }
    } else {
      h += c.hbar() * dw * electron_op(sys, q, Pauli::z);
    }
  }
  for (const auto& x : exchange) {
    if (x.J < 0.0) throw InvalidArgument("exchange energy must be non-negative");
    h += x.J * exchange_op(sys, x.first, x.second);
  }
  if (sys.dipole) h += dipole_hamiltonian(sys, p);
  return h;
}

/// Lab-frame single-electron Hamiltonian with the nucleus frozen up (2x2, time dependent).
inline Matrix single_electron_lab(double A, double t, const DeviceParameters& p,
                                  const DriveOptions& drive = {}) {
  const SpinSystem sys{};
  const double a[1] = {A};
  return lab_static_hamiltonian(sys, a, {}, p) + lab_drive_hamiltonian(sys, t, p, drive);
}

/// hbar dw sigma_z + mu_B B_ac sigma_x.
inline Matrix single_electron_rotating(double delta_omega, const DeviceParameters& p) {
  if (std::abs(delta_omega) > max_detuning(p) * (1.0 + 1e-12))
    throw InvalidArgument("detuning exceeds max_detuning");
  return drive_energy(p) * electron_spin(Pauli::x) +
         p.constants.hbar() * delta_omega * electron_spin(Pauli::z);
}

/// Two exchange-coupled electrons in the rotating frame.
inline Matrix two_electron_rotating(double dw1, double dw2, double J, const DeviceParameters& p) {
  if (J < 0.0) throw InvalidArgument("exchange energy must be non-negative");
  const SpinSystem sys{.num_donors = 2};
  const double hb = p.constants.hbar();
  return drive_energy(p) * (electron_op(sys, 0, Pauli::x) + electron_op(sys, 1, Pauli::x)) +
         hb * dw1 * electron_op(sys, 0, Pauli::z) + hb * dw2 * electron_op(sys, 1, Pauli::z) +
         J * exchange_op(sys, 0, 1);
}

/// Dipole term between two electrons at separation d along `axis` (any unit vector).
inline Matrix dipole_term(double d, const Eigen::Vector3d& axis, const DeviceParameters& p) {
  const SpinSystem sys{.num_donors = 2};
  return dipole_coupling(sys, 0, 1, dipole_strength(d, p.constants), axis);
}

inline Matrix dipole_term(double d, Axis axis, const DeviceParameters& p) {
  return dipole_term(d, axis_vector(axis), p);
}

/// Exchange plus dipole in the rotating frame; only valid for z-aligned donors.
inline Matrix two_electron_rotating_full(double dw1, double dw2, double J, double d,
                                         const DeviceParameters& p, Axis alignment = Axis::z) {
  if (alignment != Axis::z)
    throw InvalidArgument("the rotating frame requires donors aligned with the static field (z)");
  return two_electron_rotating(dw1, dw2, J, p) + dipole_term(d, Axis::z, p);
}

// ---------------------------------------------------------------------------
// Frame map.

/// Diagonal of R(t) = exp(i w_ac t S / 2), S = sum of sigma_z over electrons (and nuclei when modelled).
inline Vector rotating_frame_phases(const SpinSystem& sys, double t, const DeviceParameters& p) {
  const double w = carrier_frequency(p);
  Vector out(sys.dim());
  for (Index i = 0; i < sys.dim(); ++i) {
    double total_sz = 0.0;
    for (int s = 0; s < sys.num_slots(); ++s) {
      const bool bit = (i >> (sys.num_slots() - 1 - s)) & 1;
      const bool nuclear = sys.include_nuclei && (s % 2 == 1);
      // electron: |0> = down (sz = -1); nucleus: index 0 = up (sz = +1)
      total_sz += nuclear ? (bit ? -1.0 : 1.0) : (bit ? 1.0 : -1.0);
    }
    const double angle = 0.5 * w * t * total_sz;
    out[i] = Complex(std::cos(angle), std::sin(angle));
  }
  return out;
}

/// Maps a lab-frame state (column) or propagator from 0 to t into the rotating frame.
inline Matrix to_rotating_frame(const Matrix& lab, double t, const SpinSystem& sys,
                                const DeviceParameters& p) {
  if (lab.rows() != sys.dim()) throw DimensionMismatch("operand dimension does not match the spin system");
  return rotating_frame_phases(sys, t, p).asDiagonal() * lab;
}

/// Inverse of to_rotating_frame().
inline Matrix from_rotating_frame(const Matrix& rot, double t, const SpinSystem& sys,
                                  const DeviceParameters& p) {
  if (rot.rows() != sys.dim()) throw DimensionMismatch("operand dimension does not match the spin system");
  return rotating_frame_phases(sys, t, p).conjugate().asDiagonal() * rot;
}

}  // namespace donorspin
