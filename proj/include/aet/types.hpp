// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace aet {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/// Per-triangle constant 2-vectors, one row per triangle.
template <typename Scalar>
using CellVectors = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;
using Vec2 = Vector2<double>;
using Mat2 = Matrix2<double>;

/// First-order Lagrange field: one coefficient per mesh vertex.
using NodalField = VectorXd;
/// Gradient-type field: one constant 2-vector per triangle.
using CellVectorField = CellVectors<double>;

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class NormKind { L1, L2 };

inline const char* to_string(NormKind k) { return k == NormKind::L1 ? "L1" : "L2"; }

/// Fixed 2x2 matrices used by the analytic reconstruction.
inline Mat2 rotation_j() {
  Mat2 j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

inline Mat2 reflection_u() {
  Mat2 u;
  u << 1.0, 0.0, 0.0, -1.0;
  return u;
}

// Error taxonomy. The CLI maps these onto process exit codes.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class DataQualityError : public Error {
 public:
  using Error::Error;
};

}  // namespace aet
