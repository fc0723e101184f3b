// SPDX-License-Identifier: Apache-2.0

#include "aet/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace aet {

namespace {

constexpr double kPi = std::numbers::pi;

void check_sizes(const MatrixField& h) {
  if (h.h12.size() != h.h11.size() || h.h22.size() != h.h11.size()) {
    throw DomainError("matrix field components differ in length");
  }
}

// Rows of out += cell-averaged scalar times cell vector.
CellVectorField scale_rows(const CellVectorField& g, const VectorXd& s) {
  return g.array().colwise() * s.array();
}

CellVectorField apply(const Mat2& m, const CellVectorField& v) { return v * m.transpose(); }

}  // namespace

MatrixField threshold_eigenvalues(const MatrixField& h, double b, ThresholdReport* report) {
  if (!(b > 0.0)) throw DomainError("threshold b must be positive");
  check_sizes(h);
  MatrixField out = h;
  double min_eig = std::numeric_limits<double>::infinity();
  int clamped = 0;
  for (int v = 0; v < h.size(); ++v) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(h.at(v));
    const Vec2 lam = es.eigenvalues();
    min_eig = std::min(min_eig, lam.minCoeff());
    if (lam.minCoeff() >= b) continue;
    ++clamped;
    const Mat2 q = es.eigenvectors();
    const Mat2 fixed = q * lam.cwiseMax(b).asDiagonal() * q.transpose();
    out.h11[v] = fixed(0, 0);
    out.h12[v] = 0.5 * (fixed(0, 1) + fixed(1, 0));
    out.h22[v] = fixed(1, 1);
  }
  if (report) {
    report->min_eig_before = h.size() > 0 ? min_eig : 0.0;
    report->fraction_thresholded = h.size() > 0 ? static_cast<double>(clamped) / h.size() : 0.0;
  }
  return out;
}

Mat2 factor_of(const Mat2& h) {
  const double det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
  if (!(h(0, 0) > 0.0) || !(det > 0.0)) throw DataQualityError("matrix is not positive definite");
  const double d = std::sqrt(det);
  const double r = std::sqrt(h(0, 0));
  Mat2 t;
  t << 1.0 / r, 0.0, -h(0, 1) / (d * r), r / d;
  return t;
}

FactorField build_T(const MatrixField& h) {
  check_sizes(h);
  FactorField t{NodalField(h.size()), NodalField(h.size()), NodalField(h.size())};
  for (int v = 0; v < h.size(); ++v) {
    Mat2 f;
    try {
      f = factor_of(h.at(v));
    } catch (const DataQualityError&) {
      throw DataQualityError("power-density matrix is not positive definite at vertex " + std::to_string(v) +
                             " (threshold the data first)");
    }
    t.t11[v] = f(0, 0);
    t.t21[v] = f(1, 0);
    t.t22[v] = f(1, 1);
  }
  return t;
}

VFields v_fields(const TriMesh& mesh, const FactorField& t) {
  const int nv = mesh.num_vertices();
  // T^{-1} = [[1/t11, 0], [-t21/(t11 t22), 1/t22]]
  const NodalField inv11 = t.t11.cwiseInverse();
  const NodalField inv21 = -t.t21.cwiseQuotient(t.t11.cwiseProduct(t.t22));
  const NodalField inv22 = t.t22.cwiseInverse();
  const VectorXd a11 = cell_average(mesh, inv11);
  const VectorXd a21 = cell_average(mesh, inv21);
  const VectorXd a22 = cell_average(mesh, inv22);
  const VectorXd a12 = VectorXd::Zero(mesh.num_triangles());
  const CellVectorField g11 = gradient(mesh, t.t11);
  const CellVectorField g12 = gradient(mesh, NodalField::Zero(nv));
  const CellVectorField g21 = gradient(mesh, t.t21);
  const CellVectorField g22 = gradient(mesh, t.t22);
  VFields v;
  v.v11 = scale_rows(g11, a11) + scale_rows(g12, a21);
  v.v12 = scale_rows(g11, a12) + scale_rows(g12, a22);
  v.v21 = scale_rows(g21, a11) + scale_rows(g22, a21);
  v.v22 = scale_rows(g21, a12) + scale_rows(g22, a22);
  return v;
}

CellVectorField theta_rhs(const TriMesh& mesh, const MatrixField& h, const FactorField& t) {
  check_sizes(h);
  NodalField log_d(h.size());
  for (int v = 0; v < h.size(); ++v) {
    const double det = h.h11[v] * h.h22[v] - h.h12[v] * h.h12[v];
    if (!(det > 0.0)) {
      throw DataQualityError("det H is not positive at vertex " + std::to_string(v) + " (threshold the data first)");
    }
    log_d[v] = 0.5 * std::log(det);
  }
  const VFields v = v_fields(mesh, t);
  return 0.5 * (v.v12 - v.v21 - apply(rotation_j(), gradient(mesh, log_d)));
}

NodalField solve_gradient_equation(const TriMesh& mesh, const CellVectorField& rhs, const NodalField& boundary,
                                   const SolverOptions& options) {
  if (boundary.size() != mesh.num_vertices()) throw DomainError("boundary values must be a full nodal vector");
  NodalField lifting = NodalField::Zero(mesh.num_vertices());
  for (int v : mesh.boundary_loop()) lifting[v] = boundary[v];
  const DirichletSolver laplace(mesh, NodalField::Ones(mesh.num_vertices()), options);
  return laplace.solve_with_load(lifting, assemble_gradient_load(mesh, rhs));
}

const char* to_string(Gauge g) {
  switch (g) {
    case Gauge::Derived: return "derived";
    case Gauge::Rotated: return "rotated";
    case Gauge::Literal: return "literal";
  }
  return "?";
}

Gauge gauge_from_string(const std::string& name) {
  if (name == "derived") return Gauge::Derived;
  if (name == "rotated") return Gauge::Rotated;
  if (name == "literal") return Gauge::Literal;
  throw ConfigError("unknown gauge '" + name + "' (expected derived, rotated or literal)");
}

CellVectorField sigma_rhs(const TriMesh& mesh, const FactorField& t, const NodalField& theta, Gauge gauge) {
  const VFields v = v_fields(mesh, t);
  const Mat2 j = rotation_j();
  const Mat2 u = reflection_u();
  const CellVectorField cross = gauge == Gauge::Derived ? CellVectorField(v.v12 + v.v21)
                                                        : CellVectorField(v.v12 - v.v21);
  const CellVectorField k = apply(u, v.v11 - v.v22) + apply(j * u, cross);
  const CellVectorField k2 = gauge == Gauge::Literal ? k : apply(j, k);
  const VectorXd angle = 2.0 * cell_average(mesh, theta);
  return scale_rows(k, angle.array().cos().matrix()) + scale_rows(k2, angle.array().sin().matrix());
}

TruthBoundary boundary_from_truth(const TriMesh& mesh, const NodalField& sigma_true, const BoundaryInput& f1,
                                  const BoundaryInput& f2, const SolverOptions& options) {
  const DirichletSolver solver(mesh, sigma_true, options);
  const NodalField u1 = solver.solve(f1.trace);
  const NodalField u2 = solver.solve(f2.trace);
  const JacobianReport jac = check_jacobian_condition(mesh, u1, u2);
  const CellVectorField g1 = gradient(mesh, u1);
  const CellVectorField g2 = gradient(mesh, u2);
  const VectorXd root_sigma = cell_average(mesh, sigma_true).cwiseSqrt();

  // Unit vectors (cos theta, sin theta) summed over the cells around each vertex.
  MatrixXd direction = MatrixXd::Zero(mesh.num_vertices(), 2);
  for (int c = 0; c < mesh.num_triangles(); ++c) {
    Mat2 s;
    s.col(0) = root_sigma[c] * g1.row(c).transpose();
    s.col(1) = root_sigma[c] * g2.row(c).transpose();
    const Mat2 hs = s.transpose() * s;
    if (!(s.determinant() > 0.0) || !(hs.determinant() > 0.0)) continue;
    const Mat2 r = s * factor_of(hs).transpose();
    const Vec2 e(r(0, 0), r(1, 0));
    for (int v : mesh.triangle(c)) {
      if (mesh.is_boundary(v)) direction.row(v) += e.normalized().transpose();
    }
  }

  TruthBoundary out;
  out.min_det_jacobian = jac.min_det;
  out.max_abs_det_jacobian = jac.max_abs_det;
  out.fraction_nonpositive = jac.fraction_nonpositive;
  out.theta = NodalField::Zero(mesh.num_vertices());
  out.log_sigma = NodalField::Zero(mesh.num_vertices());
  double previous = 0.0;
  bool first = true;
  for (int v : mesh.boundary_loop()) {
    out.log_sigma[v] = std::log(sigma_true[v]);
    double angle = std::atan2(direction(v, 1), direction(v, 0));
    if (!first) angle += 2.0 * kPi * std::round((previous - angle) / (2.0 * kPi));
    out.theta[v] = angle;
    previous = angle;
    first = false;
  }
  return out;
}

AnalyticResult reconstruct_analytic(const TriMesh& mesh, const MatrixField& data, const TruthBoundary& boundary,
                                    const AnalyticOptions& options) {
  if (data.size() != mesh.num_vertices()) throw DomainError("power-density data do not match the mesh");
  AnalyticResult out;
  out.threshold_b = options.threshold_b;
  out.gauge = options.gauge;
  const MatrixField h = threshold_eigenvalues(data, options.threshold_b, &out.threshold);
  const FactorField t = build_T(h);
  out.theta = solve_theta(mesh, theta_rhs(mesh, h, t), boundary.theta, options.solver);
  out.log_sigma = solve_log_sigma(mesh, sigma_rhs(mesh, t, out.theta, options.gauge), boundary.log_sigma,
                                  options.solver);
  out.sigma = out.log_sigma.array().exp().matrix();
  return out;
}

}  // namespace aet
