// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "aet/mesh.hpp"
#include "aet/types.hpp"

namespace aet {

// ---------------------------------------------------------------------------
// Element kernels (P1 on a single triangle)

/// Gradients of the three barycentric basis functions, one per row.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 2> basis_gradients(const Vector2<Scalar>& p0, const Vector2<Scalar>& p1,
                                            const Vector2<Scalar>& p2) {
  const Scalar two_area = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  Eigen::Matrix<Scalar, 3, 2> g;
  g << p1.y() - p2.y(), p2.x() - p1.x(),
       p2.y() - p0.y(), p0.x() - p2.x(),
       p0.y() - p1.y(), p1.x() - p0.x();
  return g / two_area;
}

/// coef * integral of grad(phi_m) . grad(phi_n) over the triangle.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> local_stiffness(const Vector2<Scalar>& p0, const Vector2<Scalar>& p1,
                                            const Vector2<Scalar>& p2, Scalar coef) {
  const Scalar area = Scalar(0.5) * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                                     (p2.x() - p0.x()) * (p1.y() - p0.y()));
  const Eigen::Matrix<Scalar, 3, 2> g = basis_gradients(p0, p1, p2);
  return (coef * area) * (g * g.transpose());
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> local_mass(const Vector2<Scalar>& p0, const Vector2<Scalar>& p1,
                                       const Vector2<Scalar>& p2) {
  const Scalar area = Scalar(0.5) * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                                     (p2.x() - p0.x()) * (p1.y() - p0.y()));
  Eigen::Matrix<Scalar, 3, 3> m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return (area / Scalar(12)) * m;
}

/// Exact integral of |f| for the linear interpolant of (f0, f1, f2) over a
/// triangle of the given area, splitting along the zero level line.
template <typename Scalar>
Scalar abs_integral_linear(Scalar f0, Scalar f1, Scalar f2, Scalar area) {
  using std::abs;
  const Scalar mean_integral = area * (f0 + f1 + f2) / Scalar(3);
  const int positive = (f0 > 0) + (f1 > 0) + (f2 > 0);
  const int negative = (f0 < 0) + (f1 < 0) + (f2 < 0);
  if (positive == 0 || negative == 0) return abs(mean_integral);
  // Exactly one vertex sits alone on its side of the zero line (zeros count
  // with the majority side, where they contribute nothing).
  Scalar lone;
  Scalar other_a;
  Scalar other_b;
  const bool lone_positive = positive == 1;
  if ((f0 > 0) == lone_positive && f0 != 0) {
    lone = f0, other_a = f1, other_b = f2;
  } else if ((f1 > 0) == lone_positive && f1 != 0) {
    lone = f1, other_a = f0, other_b = f2;
  } else {
    lone = f2, other_a = f0, other_b = f1;
  }
  // Integral of f over the corner sub-triangle containing the lone vertex.
  const Scalar corner = area * lone * lone * lone / (Scalar(3) * (lone - other_a) * (lone - other_b));
  return lone_positive ? Scalar(2) * corner - mean_integral : mean_integral - Scalar(2) * corner;
}

// ---------------------------------------------------------------------------
// Global assembly

/// Conductivity per triangle: mean of the three nodal values.
VectorXd cell_average(const TriMesh& mesh, const NodalField& nodal);

/// Stiffness matrix with cellwise-averaged conductivity. Throws DomainError
/// on a nonpositive conductivity entry.
SparseMatrix assemble_stiffness(const TriMesh& mesh, const NodalField& sigma);
SparseMatrix assemble_laplacian(const TriMesh& mesh);
SparseMatrix assemble_mass(const TriMesh& mesh);

/// Row sums of the mass matrix (area attributed to each vertex).
VectorXd lumped_mass(const TriMesh& mesh);

/// Load vector with entries integral of (c . grad(phi_n)) for a cellwise
/// constant vector field c.
VectorXd assemble_gradient_load(const TriMesh& mesh, const CellVectorField& c);

/// Load vector with entries integral of (q * phi_n) for cellwise constant q.
VectorXd assemble_cell_load(const TriMesh& mesh, const VectorXd& q);

// ---------------------------------------------------------------------------
// Linear solves

enum class SolverKind { Auto, Cholesky, ConjugateGradient };

struct SolverOptions {
  SolverKind kind = SolverKind::Auto;
  double cg_tolerance = 1e-10;
  int cg_max_iterations = 20000;
  /// Auto switches to CG above this many unknowns.
  int cholesky_max_unknowns = 250000;
};

/// Factorized (or CG-backed) SPD operator. Immutable after construction.
class SpdSolver {
 public:
  SpdSolver() = default;
  SpdSolver(const SparseMatrix& a, const SolverOptions& options = {});

  VectorXd solve(const VectorXd& rhs) const;
  MatrixXd solve(const MatrixXd& rhs) const;
  int size() const { return static_cast<int>(a_.rows()); }
  const SparseMatrix& matrix() const { return a_; }
  bool uses_cholesky() const { return static_cast<bool>(llt_); }

 private:
  SparseMatrix a_;
  SolverOptions options_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>> llt_;
};

/// Restriction of a full-mesh operator to the interior vertices.
struct InteriorSplit {
  std::vector<int> interior;      // reduced index -> vertex
  std::vector<int> reduced_index;  // vertex -> reduced index, -1 on the boundary

  explicit InteriorSplit(const TriMesh& mesh);
  int size() const { return static_cast<int>(interior.size()); }
  SparseMatrix restrict_matrix(const SparseMatrix& full) const;
  VectorXd restrict_vector(const VectorXd& full) const;
  /// Interior values placed into a full-length vector, zero on the boundary.
  VectorXd extend(const VectorXd& reduced) const;
};

/// Solver for div(sigma grad u) = 0 with prescribed boundary values, using the
/// lifting u = v + g with v vanishing on the boundary. One factorization
/// serves any number of boundary inputs.
class DirichletSolver {
 public:
  DirichletSolver(const TriMesh& mesh, const NodalField& sigma, const SolverOptions& options = {});

  /// `lifting` carries the boundary values; its interior entries are part of
  /// the lifting and are corrected by the interior solve.
  NodalField solve(const NodalField& lifting) const;

  /// Weak-form Poisson problem: integral grad(u).grad(w) = integral c.grad(w)
  /// for all w vanishing on the boundary, u = boundary values on the boundary.
  /// Requires the solver to be built with unit conductivity for the Laplacian.
  NodalField solve_with_load(const NodalField& lifting, const VectorXd& extra_load) const;

  /// Relative residual of the last reduced solve.
  double last_residual() const { return last_residual_; }

 private:
  const TriMesh* mesh_;
  InteriorSplit split_;
  SparseMatrix full_;
  SparseMatrix reduced_;
  SpdSolver solver_;
  mutable double last_residual_ = 0.0;
};

NodalField solve_dirichlet(const TriMesh& mesh, const NodalField& sigma, const NodalField& lifting,
                           const SolverOptions& options = {});

// ---------------------------------------------------------------------------
// Fields

CellVectorField gradient(const TriMesh& mesh, const NodalField& u);

double integrate(const TriMesh& mesh, const NodalField& f);
double norm_l2(const TriMesh& mesh, const NodalField& f);
double norm_l1(const TriMesh& mesh, const NodalField& f);
double norm(const TriMesh& mesh, const NodalField& f, NormKind kind);

/// Nodal interpolant of a pointwise function.
template <typename Fn>
NodalField interpolate(const TriMesh& mesh, Fn&& fn) {
  NodalField out(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) out[v] = fn(mesh.vertex(v));
  return out;
}

}  // namespace aet
