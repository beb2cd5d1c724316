#pragma once

// Reference implementations that share no code with the library, plus values
// evaluated once at 40 significant digits and frozen here.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double pi = 3.14159265358979323846;

// Constants, restated.
inline constexpr double mu_B = 9.2740e-24;
inline constexpr double hbar = 1.0546e-34;
inline constexpr double mu_n = 5.0508e-27;
inline constexpr double g_n = 2.2632;
inline constexpr double B = 2.0;
inline constexpr double B_ac = 1.2e-3;
inline constexpr double A0 = 1.938e-26;

namespace frozen {
inline constexpr double omega_zero = 351754219609.33055;        // w(0), rad/s
inline constexpr double omega_A0 = 352122135869.38078;          // w(A0)
inline constexpr double detuning_A_min = -184054016.58138078;   // w(A0/2) - w(A0)
inline constexpr double sqrt3_drive_rate = 182776854.04203036;  // sqrt(3) mu_B B_ac / hbar
inline constexpr double exchange_ratio_20_30 = 285.14673185575427;
inline constexpr double exchange_23nm = 3.7515389268163785e-25;
inline constexpr double dipole_23nm = 7.0688810717514589e-31;
inline constexpr double dipole_30nm = 3.1854472592592593e-31;
inline constexpr double crossover = 4.9015212867241329e-8;  // J(d) = D(d)
inline constexpr double spectator_period = 2.9770717529974444e-8;
inline constexpr double local_pi_time = 1.7862430517984667e-6;
inline constexpr double canonical_span = 367916260.05022336;  // w(A0) - w(0)
inline constexpr double offres_canonical = 5.7129208119726179e-6;
inline constexpr double offres_max_detuning = 2.2827488691763192e-5;
inline constexpr double halving_ratio = 0.50013024241205122;
}  // namespace frozen

/// exp(M) by scaling and squaring of a truncated Taylor series.
inline Matrix expm(const Matrix& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix a = m / std::ldexp(1.0, squarings);
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// exp(-i H t / hbar) via expm.
inline Matrix evolve(const Matrix& h, double t) { return expm(Complex(0.0, -t / hbar) * h); }

inline Matrix sx() { Matrix m(2, 2); m << 0, 1, 1, 0; return m; }
inline Matrix sy() { Matrix m(2, 2); m << 0, Complex(0, -1), Complex(0, 1), 0; return m; }
inline Matrix sz() { Matrix m(2, 2); m << 1, 0, 0, -1; return m; }

/// cos(theta/2) I - i sin(theta/2) n.sigma for a unit vector n.
inline Matrix pauli_rotation(double nx, double ny, double nz, double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Matrix m(2, 2);
  m << Complex(c, -s * nz), Complex(-s * ny, -s * nx), Complex(s * ny, -s * nx), Complex(c, s * nz);
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Flip probability for a two-level system driven with energy mu and detuning dw.
inline double rabi(double t, double dw, double b_ac) {
  const double mu = mu_B * b_ac;
  const double w2 = mu * mu + hbar * hbar * dw * dw;
  const double s = std::sin(std::sqrt(w2) * t / hbar);
  return mu * mu / w2 * s * s;
}

/// |Tr(U^dagger V)| / dim.
inline double overlap(const Matrix& u, const Matrix& v) {
  return std::abs((u.adjoint() * v).trace()) / static_cast<double>(u.rows());
}

/// Golden-section search for the maximum of f on [a, b]. `better(c, d)` > 0 when f(c) > f(d).
inline double golden_max(double a, double b, const std::function<double(double, double)>& better,
                         int iterations = 200) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int i = 0; i < iterations && b - a > 1e-15 * std::abs(b); ++i) {
    if (better(c, d) > 0.0) {
      b = d;
      d = c;
      c = b - r * (b - a);
    } else {
      a = c;
      c = d;
      d = a + r * (b - a);
    }
  }
  return 0.5 * (a + b);
}

/// Root of f on [a, b] by bisection; f(a) and f(b) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double a, double b, int iterations = 200) {
  double fa = f(a);
  for (int i = 0; i < iterations; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Smallest wrap count k (0..4) for which a correction of (deficit + 2 pi k) / w0 lets an idle
/// target complete n >= 1 whole revolutions with a period in [t_min, t_max]. Searches n explicitly.
inline std::optional<int> smallest_wrap(double deficit, double w0, double t_min, double t_max) {
  for (int k = 0; k <= 4; ++k) {
    const double t = (deficit + 2 * pi * k) / w0;
    if (t <= 0.0) continue;
    for (int n = 1; n <= 64; ++n) {
      const double period = t / n;
      if (period < t_min * (1 - 1e-12)) break;
      if (period <= t_max * (1 + 1e-12)) return k;
    }
  }
  return std::nullopt;
}

/// Haar-distributed unitary.
inline Matrix random_unitary(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix z(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) z(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j) q.col(j) *= std::polar(1.0, -std::arg(r(j, j)));
  return q;
}

/// Random Hermitian matrix with entries of size `scale`.
inline Matrix random_hermitian(Eigen::Index dim, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix z(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) z(i, j) = Complex(g(rng), g(rng));
  return 0.5 * scale * (z + z.adjoint());
}

}  // namespace oracle
