// linalg.hpp - small dense matrix helpers: matrix exponentials of local
// generators and Hermiticity checks.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

#include "pbsim/core.hpp"

namespace pbsim {

using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

inline bool all_finite(const MatrixXc& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

inline bool is_hermitian(const MatrixXc& m, double tol = 0.0) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// exp(-i * h * t) for a square complex generator h.
///
/// Hermitian generators go through a self-adjoint eigendecomposition, which
/// keeps the result unitary to rounding. Everything else is diagonalized with
/// a complex Schur-based solver; if the eigenvector basis is ill-conditioned
/// the Pade scaling-and-squaring path is used instead.
inline MatrixXc expm_minus_i(const MatrixXc& h, double t) {
  if (!all_finite(h)) throw SolverError("non-finite entry in local generator");
  const Eigen::Index n = h.rows();
  if (n == 1) {
    MatrixXc r(1, 1);
    r(0, 0) = std::exp(cd(0.0, -t) * h(0, 0));
    return r;
  }
  if (is_hermitian(h, 0.0)) {
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
    if (es.info() == Eigen::Success) {
      const auto& w = es.eigenvalues();
      const auto& u = es.eigenvectors();
      VectorXc phase(n);
      for (Eigen::Index i = 0; i < n; ++i) phase(i) = std::polar(1.0, -w(i) * t);
      return u * phase.asDiagonal() * u.adjoint();
    }
  }
  Eigen::ComplexEigenSolver<MatrixXc> es(h);
  if (es.info() == Eigen::Success) {
    const MatrixXc& u = es.eigenvectors();
    Eigen::PartialPivLU<MatrixXc> lu(u);
    const double rcond = lu.rcond();
    if (std::isfinite(rcond) && rcond > 1e-10) {
      VectorXc d(n);
      for (Eigen::Index i = 0; i < n; ++i) d(i) = std::exp(cd(0.0, -t) * es.eigenvalues()(i));
      MatrixXc r = u * d.asDiagonal() * lu.inverse();
      if (all_finite(r)) return r;
    }
  }
  MatrixXc a = (cd(0.0, -t) * h).eval();
  MatrixXc r = a.exp();
  if (!all_finite(r)) throw SolverError("matrix exponential failed to converge");
  return r;
}

}  // namespace pbsim
