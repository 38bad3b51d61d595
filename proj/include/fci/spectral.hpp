#pragma once

// Hermitian eigendecomposition and the matrix functions built on it: the
// flattened sign S = tanh(H / delta), the gap filter 1 - S^2 and the
// propagator exp(itH). tanh_oracle() evaluates S along an independent route
// (matrix exponential + linear solves) and exists to cross-check the main path.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <type_traits>

#include "fci/errors.hpp"

namespace fci {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

/// Largest |entry| of a matrix, the "max-abs" norm used throughout the checks.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// max |H - H^dagger|.
inline double hermiticity_residual(const Matrix& h) { return max_abs(h - h.adjoint()); }

struct SpectralData {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns, same order as eigenvalues

  int dim() const noexcept { return static_cast<int>(eigenvalues.size()); }
};

/// Full eigendecomposition of a Hermitian matrix. The input is symmetrized as
/// (H + H^dagger) / 2 once it passes the Hermiticity check (relative 1e-12).
inline SpectralData eigh(const Matrix& h) {
  if (h.rows() != h.cols()) throw DimensionMismatch("eigh: matrix is not square");
  const double scale = std::max(max_abs(h), 1.0);
  const double residual = hermiticity_residual(h);
  if (residual > 1e-12 * scale) {
    throw NotHermitian("eigh: Hermiticity residual " + std::to_string(residual));
  }
  const Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw SolverFailure("eigh: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// V f(Lambda) V^dagger. `f` may return double (Hermitian result) or complex.
template <class F>
Matrix matrix_function(const SpectralData& spec, F&& f) {
  using R = std::invoke_result_t<F&, double>;
  Eigen::Matrix<cplx, Eigen::Dynamic, 1> values(spec.dim());
  for (int k = 0; k < spec.dim(); ++k) {
    const R v = f(spec.eigenvalues[k]);
    if constexpr (std::is_same_v<R, cplx>) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw NonFiniteFunction("matrix_function: non-finite value at eigenvalue " +
                                std::to_string(spec.eigenvalues[k]));
      }
    } else {
      if (!std::isfinite(static_cast<double>(v))) {
        throw NonFiniteFunction("matrix_function: non-finite value at eigenvalue " +
                                std::to_string(spec.eigenvalues[k]));
      }
    }
    values[k] = cplx(v);
  }
  Matrix out = spec.eigenvectors * values.asDiagonal() * spec.eigenvectors.adjoint();
  if constexpr (!std::is_same_v<R, cplx>) out = 0.5 * (out + out.adjoint());
  return out;
}

/// Regularization scale delta and the derived decay length
/// d' = d * max(1, 4 K_d / (pi delta)).
struct FilterParams {
  double delta;
  double d_prime;

  explicit FilterParams(double delta_, double d = 1.0, double k_d = 0.0) : delta(delta_) {
    if (!(delta_ > 0.0) || !std::isfinite(delta_)) {
      throw InvalidDelta("delta must be positive and finite, got " + std::to_string(delta_));
    }
    if (!(d > 0.0)) throw InvalidDelta("decay length d must be positive");
    if (!(k_d >= 0.0)) throw InvalidDelta("K_d must be non-negative");
    d_prime = d * std::max(1.0, 4.0 * k_d / (std::numbers::pi * delta_));
  }
};

inline Matrix flattened_sign(const SpectralData& spec, const FilterParams& p) {
  const double delta = p.delta;
  return matrix_function(spec, [delta](double e) { return std::tanh(e / delta); });
}

inline Matrix flattened_sign(const Matrix& h, const FilterParams& p) { return flattened_sign(eigh(h), p); }

/// 1 - S^2, evaluated as sech^2(E / delta) on the spectrum so that deep-bulk
/// values keep full relative precision.
inline Matrix gap_filter(const SpectralData& spec, const FilterParams& p) {
  const double delta = p.delta;
  return matrix_function(spec, [delta](double e) {
    const double c = std::cosh(e / delta);
    return 1.0 / (c * c);
  });
}

inline Matrix gap_filter(const Matrix& h, const FilterParams& p) { return gap_filter(eigh(h), p); }

/// exp(itH). t == 0 returns the identity exactly.
inline Matrix propagator(const SpectralData& spec, double t) {
  if (!std::isfinite(t)) throw InvalidDelta("propagator: time must be finite");
  if (t == 0.0) return Matrix::Identity(spec.dim(), spec.dim());
  return matrix_function(spec, [t](double e) { return std::polar(1.0, t * e); });
}

inline Matrix propagator(const Matrix& h, double t) { return propagator(eigh(h), t); }

/// Largest ||H||_inf / delta accepted by tanh_oracle().
inline constexpr double kOracleMaxRatio = 50.0;

/// tanh(H / delta) without an eigendecomposition: for X = H / (delta 2^s) with
/// ||X|| <= 1/2, tanh(X) = (e^{2X} + 1)^{-1} (e^{2X} - 1) via a Pade
/// scaling-and-squaring exponential and an LU solve, followed by s doublings
/// tanh(2y) = 2 tanh(y) / (1 + tanh(y)^2). ||H|| is the max row sum, an upper
/// bound on the operator norm.
inline Matrix tanh_oracle(const Matrix& h, double delta) {
  if (h.rows() != h.cols()) throw DimensionMismatch("tanh_oracle: matrix is not square");
  if (!(delta > 0.0)) throw InvalidDelta("tanh_oracle: delta must be positive");
  const int n = static_cast<int>(h.rows());
  const double norm = n == 0 ? 0.0 : h.cwiseAbs().rowwise().sum().maxCoeff();
  if (norm / delta > kOracleMaxRatio) {
    throw OracleRangeError("tanh_oracle: ||H||/delta = " + std::to_string(norm / delta) +
                           " exceeds " + std::to_string(kOracleMaxRatio));
  }
  int doublings = 0;
  double scaled = norm / delta;
  while (scaled > 0.5) {
    scaled *= 0.5;
    ++doublings;
  }
  const Matrix x = h / (delta * std::ldexp(1.0, doublings));
  const Matrix id = Matrix::Identity(n, n);
  const Matrix e2x = (2.0 * x).exp();
  Matrix t = (e2x + id).partialPivLu().solve(e2x - id);
  for (int i = 0; i < doublings; ++i) {
    const Matrix denom = id + t * t;
    t = denom.partialPivLu().solve(2.0 * t);
  }
  return 0.5 * (t + t.adjoint());
}

}  // namespace fci
