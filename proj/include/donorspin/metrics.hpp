#pragma once

#include <algorithm>
#include <cmath>

#include "donorspin/core.hpp"

namespace donorspin {

inline bool is_unitary(const Matrix& u, double tol = 1e-10) {
  return u.rows() == u.cols() && max_abs(u.adjoint() * u - identity(u.rows())) <= tol;
}

/// Phase-insensitive overlap |Tr(U^dagger V)| / dim.
inline double gate_fidelity(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw DimensionMismatch("operands differ in dimension");
  if (!is_unitary(u) || !is_unitary(v)) throw InvalidArgument("gate_fidelity expects unitary operands");
  const double f = std::abs((u.adjoint() * v).trace()) / static_cast<double>(u.rows());
  return std::min(f, 1.0);
}

/// Same overlap for sub-blocks that need not be exactly unitary (e.g. a leakage-prone subspace).
inline double overlap_fidelity(const Matrix& ideal, const Matrix& block) {
  if (ideal.rows() != block.rows() || ideal.cols() != block.cols())
    throw DimensionMismatch("operands differ in dimension");
  return std::abs((ideal.adjoint() * block).trace()) / static_cast<double>(ideal.rows());
}

}  // namespace donorspin
