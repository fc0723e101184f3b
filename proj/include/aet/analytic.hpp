// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "aet/fem.hpp"
#include "aet/forward.hpp"
#include "aet/mesh.hpp"
#include "aet/types.hpp"

namespace aet {

/// Symmetric 2x2 power-density matrix per vertex, stored once.
struct MatrixField {
  NodalField h11, h12, h22;

  int size() const { return static_cast<int>(h11.size()); }
  Mat2 at(int v) const {
    Mat2 m;
    m << h11[v], h12[v], h12[v], h22[v];
    return m;
  }
};

struct ThresholdReport {
  double min_eig_before = 0.0;
  double fraction_thresholded = 0.0;  // vertices with an eigenvalue below b
};

/// Eigenvalues raised to at least b at every vertex.
MatrixField threshold_eigenvalues(const MatrixField& h, double b, ThresholdReport* report = nullptr);

/// Lower-triangular T with T^T T = H^{-1} per vertex (t12 = 0):
/// t11 = 1/sqrt(h11), t21 = -h12/(d sqrt(h11)), t22 = sqrt(h11)/d, d = sqrt(det H).
struct FactorField {
  NodalField t11, t21, t22;

  Mat2 at(int v) const {
    Mat2 t;
    t << t11[v], 0.0, t21[v], t22[v];
    return t;
  }
};

/// Throws DataQualityError naming the first vertex where H is not SPD.
FactorField build_T(const MatrixField& h);

/// Closed-form factor of a single SPD matrix, same convention as build_T.
Mat2 factor_of(const Mat2& h);

/// v_ij = sum_k grad(t_ik) t^{kj} per cell, with t^{kj} the entries of T^{-1}
/// averaged over the cell's vertices.
struct VFields {
  CellVectorField v11, v12, v21, v22;
};

VFields v_fields(const TriMesh& mesh, const FactorField& t);

/// f = (v12 - v21 - J grad(log d)) / 2 per cell, the gradient of the rotation angle.
CellVectorField theta_rhs(const TriMesh& mesh, const MatrixField& h, const FactorField& t);

/// Weak Poisson solve: integral grad(u).grad(w) = integral rhs.grad(w) for w
/// vanishing on the boundary, u = `boundary` at boundary vertices.
NodalField solve_gradient_equation(const TriMesh& mesh, const CellVectorField& rhs, const NodalField& boundary,
                                   const SolverOptions& options = {});

inline NodalField solve_theta(const TriMesh& mesh, const CellVectorField& f, const NodalField& boundary,
                              const SolverOptions& options = {}) {
  return solve_gradient_equation(mesh, f, boundary, options);
}

inline NodalField solve_log_sigma(const TriMesh& mesh, const CellVectorField& g, const NodalField& boundary,
                                  const SolverOptions& options = {}) {
  return solve_gradient_equation(mesh, g, boundary, options);
}

/// Variants of grad(log sigma) = cos(2 theta) K + sin(2 theta) K2.
///   Derived:      K = U(v11 - v22) + JU(v12 + v21), K2 = J K
///   Rotated:      K = U(v11 - v22) + JU(v12 - v21), K2 = J K
///   Literal:      K as in Rotated, K2 = K
enum class Gauge { Derived, Rotated, Literal };

const char* to_string(Gauge g);
Gauge gauge_from_string(const std::string& name);

CellVectorField sigma_rhs(const TriMesh& mesh, const FactorField& t, const NodalField& theta, Gauge gauge);

/// Boundary data for both Poisson problems taken from the true conductivity:
/// theta from R = S T^T with S = sqrt(sigma) [grad u1, grad u2] on the cells
/// touching each boundary vertex (circular mean, unwrapped along the
/// boundary), log sigma from the true nodal values.
struct TruthBoundary {
  NodalField theta;
  NodalField log_sigma;
  double min_det_jacobian = 0.0;
  double max_abs_det_jacobian = 0.0;
  double fraction_nonpositive = 0.0;
};

TruthBoundary boundary_from_truth(const TriMesh& mesh, const NodalField& sigma_true, const BoundaryInput& f1,
                                  const BoundaryInput& f2, const SolverOptions& options = {});

struct AnalyticOptions {
  double threshold_b = 0.002;
  Gauge gauge = Gauge::Derived;
  /// Abort when det[grad u1, grad u2] < -jacobian_tolerance * max|det| on some cell.
  double jacobian_tolerance = 1e-8;
  SolverOptions solver;
};

struct AnalyticResult {
  NodalField theta;
  NodalField log_sigma;
  NodalField sigma;
  ThresholdReport threshold;
  double threshold_b = 0.0;
  Gauge gauge = Gauge::Derived;
};

/// threshold -> T -> theta -> log sigma.
AnalyticResult reconstruct_analytic(const TriMesh& mesh, const MatrixField& data, const TruthBoundary& boundary,
                                    const AnalyticOptions& options = {});

}  // namespace aet
