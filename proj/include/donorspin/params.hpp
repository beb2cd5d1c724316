#pragma once

// Physical constants, device parameters and the closed-form coupling and
// frequency relations every pulse schedule is derived from.
//
// Units are SI throughout: energies in J, angular frequencies in rad/s,
// lengths in m, fields in T.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "donorspin/core.hpp"

namespace donorspin {

/// Fundamental constants. Immutable once constructed.
class PhysicalConstants {
 public:
  PhysicalConstants() = default;
  PhysicalConstants(double mu_B, double hbar, double mu_n, double g_n, double mu_0,
                    double e_charge, double eps_0)
      : mu_B_(mu_B), hbar_(hbar), mu_n_(mu_n), g_n_(g_n), mu_0_(mu_0),
        e_charge_(e_charge), eps_0_(eps_0) {
    for (double v : {mu_B, hbar, mu_n, g_n, mu_0, e_charge, eps_0}) {
      if (!(v > 0.0)) throw InvalidArgument("physical constants must be strictly positive");
    }
  }

  double mu_B() const { return mu_B_; }          ///< Bohr magneton, J/T
  double hbar() const { return hbar_; }          ///< reduced Planck constant, J s
  double mu_n() const { return mu_n_; }          ///< nuclear magneton, J/T
  double g_n() const { return g_n_; }            ///< 31P nuclear g-factor
  double mu_0() const { return mu_0_; }          ///< vacuum permeability, T m/A
  double e_charge() const { return e_charge_; }  ///< elementary charge, C
  double eps_0() const { return eps_0_; }        ///< vacuum permittivity, F/m

 private:
  double mu_B_ = 9.2740e-24;
  double hbar_ = 1.0546e-34;
  double mu_n_ = 5.0508e-27;
  double g_n_ = 2.2632;
  double mu_0_ = 4.0e-7 * pi;
  double e_charge_ = 1.602176634e-19;
  double eps_0_ = 8.8541878128e-12;
};

/// Donor-axis direction relative to the static field (which points along z).
enum class Axis { x, y, z };

inline std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

inline Axis axis_from_string(std::string_view s) {
  if (s == "x") return Axis::x;
  if (s == "y") return Axis::y;
  if (s == "z") return Axis::z;
  throw InvalidArgument("unknown axis '" + std::string(s) + "' (expected x, y or z)");
}

inline constexpr double kDefaultA0 = 1.938e-26;  // 1.21e-7 eV

/// Device knobs. The hyperfine energy A is the per-donor control, tunable in [A_min, A0].
struct DeviceParameters {
  PhysicalConstants constants{};
  double B = 2.0;                   ///< static field, T
  double B_ac = 1.2e-3;             ///< rotating field amplitude, T
  double A0 = kDefaultA0;           ///< unbiased hyperfine energy, J
  double A_min = 0.5 * kDefaultA0;  ///< hyperfine energy at full A-gate bias, J
  double d = 20e-9;                 ///< donor separation, m
  double a_star = 3.0e-9;           ///< effective Bohr radius, m
  double eps_r = 11.7;              ///< relative dielectric constant
  Axis alignment = Axis::z;

  void validate() const {
    if (!(B_ac > 0.0 && B_ac < B)) throw InvalidArgument("require 0 < B_ac < B");
    if (!(A_min >= 0.0 && A_min <= A0)) throw InvalidArgument("require 0 <= A_min <= A0");
    if (!(d > 0.0)) throw InvalidArgument("donor separation d must be positive");
    if (!(a_star > 0.0)) throw InvalidArgument("effective Bohr radius must be positive");
    if (!(eps_r >= 1.0)) throw InvalidArgument("relative dielectric constant must be >= 1");
  }
};

/// Drive energy mu_B * B_ac.
inline double drive_energy(const DeviceParameters& p) { return p.constants.mu_B() * p.B_ac; }

/// Angular rate of a resonant rotation, 2 mu_B B_ac / hbar.
inline double resonant_rotation_rate(const DeviceParameters& p) {
  return 2.0 * drive_energy(p) / p.constants.hbar();
}

namespace detail {
// Energy denominator of the second-order hyperfine shift.
inline double second_order_denominator(const DeviceParameters& p) {
  const auto& c = p.constants;
  return c.mu_B() * p.B + c.g_n() * c.mu_n() * p.B;
}
}  // namespace detail

/// Electron resonance frequency for hyperfine energy A (second order in A).
inline double resonant_frequency(double A, const DeviceParameters& p) {
  if (!(A >= 0.0)) throw InvalidArgument("hyperfine energy must be non-negative");
  const double c = detail::second_order_denominator(p);
  return 2.0 * (p.constants.mu_B() * p.B + A + A * A / c) / p.constants.hbar();
}

/// Carrier frequency of the global drive: resonant with unbiased donors.
inline double carrier_frequency(const DeviceParameters& p) { return resonant_frequency(p.A0, p); }

namespace detail {
// w(A) - w(A0) evaluated without cancelling the dominant Zeeman term.
inline double frequency_offset(double A, const DeviceParameters& p) {
  const double c = second_order_denominator(p);
  return 2.0 * ((A - p.A0) + (A - p.A0) * (A + p.A0) / c) / p.constants.hbar();
}

// Solves A + A^2/c = rhs for the non-negative root.
inline double invert_second_order(double rhs, double c) {
  if (rhs < 0.0) throw InfeasibleControl("requested shift needs a negative hyperfine energy");
  return 2.0 * rhs / (1.0 + std::sqrt(1.0 + 4.0 * rhs / c));
}

inline constexpr double kRangeSlack = 1e-12;
}  // namespace detail

/// Detuning w(A) - w(A0) of a donor from the carrier. Non-positive on the tunable range.
inline double detuning(double A, const DeviceParameters& p) {
  const double slack = detail::kRangeSlack * p.A0;
  if (A < p.A_min - slack || A > p.A0 + slack) {
    throw InvalidArgument("hyperfine energy outside the tunable range [A_min, A0]");
  }
  return detail::frequency_offset(A, p);
}

/// |w(A_min) - w(A0)|: the largest detuning any donor can reach.
inline double max_detuning(const DeviceParameters& p) {
  return std::abs(detail::frequency_offset(p.A_min, p));
}

/// Inverse of detuning(): the control value A realising detuning dw (dw <= 0).
inline double hyperfine_for_detuning(double dw, const DeviceParameters& p) {
  if (dw > 0.0 || -dw > max_detuning(p) * (1.0 + 1e-12)) {
    throw InfeasibleControl("detuning outside the reachable range [-max_detuning, 0]");
  }
  if (dw == 0.0) return p.A0;
  const double c = detail::second_order_denominator(p);
  const double rhs = p.A0 + p.A0 * p.A0 / c + 0.5 * p.constants.hbar() * dw;
  const double A = detail::invert_second_order(rhs, c);
  return std::clamp(A, p.A_min, p.A0);
}

/// Physical hyperfine energy whose electron-nucleus splitting shifts the rotating-frame
/// sigma_z coefficient by hbar*dw (used by the full electron-nucleus model).
inline double physical_hyperfine(double dw, const DeviceParameters& p) {
  const double c = detail::second_order_denominator(p);
  const double rhs = p.A0 + p.A0 * p.A0 / c + p.constants.hbar() * dw;
  return detail::invert_second_order(rhs, c);
}

/// Span w(A0) - w(0) used by the canonical (local control) scheme, whose carrier sits at w(0).
inline double canonical_detuning(const DeviceParameters& p) {
  return resonant_frequency(p.A0, p) - resonant_frequency(0.0, p);
}

/// Herring-Flicker exchange energy between donors at separation d (SI form).
inline double exchange_strength(double d, const DeviceParameters& p) {
  if (!(d >= 0.0)) throw InvalidArgument("separation must be non-negative");
  if (d == 0.0) return 0.0;
  const auto& c = p.constants;
  const double coulomb = c.e_charge() * c.e_charge() / (4.0 * pi * c.eps_0() * p.eps_r * p.a_star);
  const double x = d / p.a_star;
  return 1.6 * coulomb * std::pow(x, 2.5) * std::exp(-2.0 * x);
}

/// Separation at which exchange_strength peaks: d log J / dd = 0.
inline double exchange_peak_separation(const DeviceParameters& p) { return 1.25 * p.a_star; }

/// Magnetic dipole-dipole energy (mu_0 / 4 pi) mu_B^2 / d^3.
inline double dipole_strength(double d, const PhysicalConstants& c) {
  if (!(d > 0.0)) throw InvalidArgument("separation must be positive");
  return c.mu_0() / (4.0 * pi) * c.mu_B() * c.mu_B() / (d * d * d);
}

struct LocalControlTradeoff {
  double fwhm;              ///< rad/s
  double max_offres_error;  ///< peak off-resonant flip probability
  double pi_time;           ///< s
};

/// Cost of addressing one donor by frequency selectivity alone with drive amplitude B_ac.
inline LocalControlTradeoff local_control_tradeoff(double B_ac, double delta_omega,
                                                   const PhysicalConstants& c = {}) {
  if (!(B_ac > 0.0)) throw InvalidArgument("B_ac must be positive");
  const double drive = c.mu_B() * B_ac;
  const double detune = c.hbar() * delta_omega;
  return {
      .fwhm = 4.0 * drive / c.hbar(),
      .max_offres_error = drive * drive / (drive * drive + detune * detune),
      .pi_time = pi * c.hbar() / (2.0 * drive),
  };
}

}  // namespace donorspin
