#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "axy/error.hpp"

namespace axy {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

enum class OperatorKind { unitary, hermitian, density, superoperator, general };

inline const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::unitary: return "unitary";
    case OperatorKind::hermitian: return "hermitian";
    case OperatorKind::density: return "density";
    case OperatorKind::superoperator: return "superoperator";
    case OperatorKind::general: return "general";
  }
  return "general";
}

/// Dense square complex matrix tagged with what it represents.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  OperatorMatrix(Matrix data, OperatorKind kind) : data_(std::move(data)), kind_(kind) {
    if (data_.rows() != data_.cols()) {
      throw Error(ErrorKind::dimension, "operator matrix must be square");
    }
  }

  const Matrix& matrix() const noexcept { return data_; }
  OperatorKind kind() const noexcept { return kind_; }
  Eigen::Index dim() const noexcept { return data_.rows(); }

 private:
  Matrix data_;
  OperatorKind kind_ = OperatorKind::general;
};

// ---------------------------------------------------------------------------
// Single-qubit building blocks
// ---------------------------------------------------------------------------

inline Matrix identity(Eigen::Index dim) { return Matrix::Identity(dim, dim); }

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

/// Pauli matrix by letter: I, X, Y or Z.
inline Matrix pauli(char letter) {
  switch (letter) {
    case 'I': return identity(2);
    case 'X': return pauli_x();
    case 'Y': return pauli_y();
    case 'Z': return pauli_z();
    default: throw Error(ErrorKind::invalid_argument, std::string("unknown Pauli letter ") + letter);
  }
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Places a single-qubit operator on `qubit` of an `n_qubits` register.
/// Qubit 0 is the most significant factor of the tensor product.
inline Matrix embed(const Matrix& op, std::size_t qubit, std::size_t n_qubits) {
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t q = 0; q < n_qubits; ++q) {
    out = kron(out, q == qubit ? op : identity(2));
  }
  return out;
}

/// Tensor product of single-qubit Paulis, e.g. "ZYI".
inline Matrix pauli_string(const std::string& letters) {
  Matrix out = Matrix::Identity(1, 1);
  for (char c : letters) out = kron(out, pauli(c));
  return out;
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

inline bool is_unitary(const Matrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m.adjoint() * m - identity(m.rows())) <= tol;
}

inline double min_eigenvalue_hermitian(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

inline bool is_density(const Matrix& m, double tol) {
  if (!is_hermitian(m, tol)) return false;
  if (std::abs(m.trace() - cplx(1.0, 0.0)) > tol) return false;
  return min_eigenvalue_hermitian(m) >= -tol;
}

// ---------------------------------------------------------------------------
// Exponentials
// ---------------------------------------------------------------------------

/// exp(-i H t) for Hermitian H via eigendecomposition.
inline Matrix expm_hermitian(const Matrix& hamiltonian, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hamiltonian);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::numerical, "Hermitian eigendecomposition failed");
  }
  const Eigen::VectorXd& w = solver.eigenvalues();
  Vector phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::exp(-kI * (w(k) * t));
  const Matrix& v = solver.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

/// General matrix exponential (Pade approximant with scaling and squaring).
inline Matrix expm(const Matrix& m) { return m.exp(); }

// ---------------------------------------------------------------------------
// Superoperators (column-stacking convention: vec(A X B) = (B^T kron A) vec(X))
// ---------------------------------------------------------------------------

inline Vector vectorize(const Matrix& rho) {
  return Eigen::Map<const Vector>(rho.data(), rho.size());
}

inline Matrix unvectorize(const Vector& v, Eigen::Index dim) {
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

/// Superoperator of rho -> U rho U^dagger.
inline Matrix conjugation_superoperator(const Matrix& u) {
  return kron(u.conjugate(), u);
}

inline Matrix apply_superoperator(const Matrix& superop, const Matrix& rho) {
  return unvectorize(superop * vectorize(rho), rho.rows());
}

/// Traces out every qubit except qubit 0 of an n-qubit density matrix.
inline Matrix reduce_to_first_qubit(const Matrix& rho) {
  const Eigen::Index rest = rho.rows() / 2;
  Matrix out = Matrix::Zero(2, 2);
  for (Eigen::Index a = 0; a < 2; ++a) {
    for (Eigen::Index b = 0; b < 2; ++b) {
      out(a, b) = rho.block(a * rest, b * rest, rest, rest).trace();
    }
  }
  return out;
}

}  // namespace axy
