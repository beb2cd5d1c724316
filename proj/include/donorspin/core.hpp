#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace donorspin {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or argument outside its documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions do not agree.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A requested control (detuning, revolution count, ...) is out of the device's reach.
class InfeasibleControl : public Error {
 public:
  using Error::Error;
};

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Matrix identity(Index dim) { return Matrix::Identity(dim, dim); }

}  // namespace donorspin
