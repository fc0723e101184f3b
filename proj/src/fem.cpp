// SPDX-License-Identifier: Apache-2.0

#include "aet/fem.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>

namespace aet {

namespace {

struct TriangleGeometry {
  Vec2 p0, p1, p2;
  double area;
};

TriangleGeometry geometry(const TriMesh& mesh, int t) {
  const auto tri = mesh.triangle(t);
  return {mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]), mesh.signed_area(t)};
}

void check_length(const TriMesh& mesh, const NodalField& f, const char* what) {
  if (f.size() != mesh.num_vertices()) {
    throw DomainError(std::string(what) + ": field length " + std::to_string(f.size()) +
                      " does not match vertex count " + std::to_string(mesh.num_vertices()));
  }
}

template <typename LocalFn>
SparseMatrix assemble(const TriMesh& mesh, LocalFn&& local) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangle(t);
    const Eigen::Matrix3d k = local(t);
    for (int a = 0; a < 3; ++a) {
      entries.emplace_back(tri[a], tri[a], k(a, a));
      for (int b = a + 1; b < 3; ++b) {
        // One value for both (a,b) and (b,a) keeps the matrix exactly symmetric.
        const double v = k(a, b);
        entries.emplace_back(tri[a], tri[b], v);
        entries.emplace_back(tri[b], tri[a], v);
      }
    }
  }
  SparseMatrix out(mesh.num_vertices(), mesh.num_vertices());
  out.setFromTriplets(entries.begin(), entries.end());
  out.makeCompressed();
  return out;
}

}  // namespace

VectorXd cell_average(const TriMesh& mesh, const NodalField& nodal) {
  check_length(mesh, nodal, "cell_average");
  VectorXd out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangle(t);
    out[t] = (nodal[tri[0]] + nodal[tri[1]] + nodal[tri[2]]) / 3.0;
  }
  return out;
}

SparseMatrix assemble_stiffness(const TriMesh& mesh, const NodalField& sigma) {
  check_length(mesh, sigma, "assemble_stiffness");
  for (int v = 0; v < sigma.size(); ++v) {
    if (!(sigma[v] > 0.0) || !std::isfinite(sigma[v])) {
      throw DomainError("assemble_stiffness: conductivity must be positive and finite (vertex " +
                        std::to_string(v) + ")");
    }
  }
  const VectorXd coef = cell_average(mesh, sigma);
  return assemble(mesh, [&](int t) {
    const auto g = geometry(mesh, t);
    return local_stiffness<double>(g.p0, g.p1, g.p2, coef[t]);
  });
}

SparseMatrix assemble_laplacian(const TriMesh& mesh) {
  return assemble(mesh, [&](int t) {
    const auto g = geometry(mesh, t);
    return local_stiffness<double>(g.p0, g.p1, g.p2, 1.0);
  });
}

SparseMatrix assemble_mass(const TriMesh& mesh) {
  return assemble(mesh, [&](int t) {
    const auto g = geometry(mesh, t);
    return local_mass<double>(g.p0, g.p1, g.p2);
  });
}

VectorXd lumped_mass(const TriMesh& mesh) {
  VectorXd out = VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangle(t);
    const double third = mesh.signed_area(t) / 3.0;
    for (int k : tri) out[k] += third;
  }
  return out;
}

VectorXd assemble_gradient_load(const TriMesh& mesh, const CellVectorField& c) {
  if (c.rows() != mesh.num_triangles()) throw DomainError("assemble_gradient_load: wrong cell count");
  VectorXd out = VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = geometry(mesh, t);
    const Eigen::Matrix<double, 3, 2> grads = basis_gradients<double>(g.p0, g.p1, g.p2);
    const Eigen::Vector3d local = g.area * (grads * c.row(t).transpose());
    const auto tri = mesh.triangle(t);
    for (int k = 0; k < 3; ++k) out[tri[k]] += local[k];
  }
  return out;
}

VectorXd assemble_cell_load(const TriMesh& mesh, const VectorXd& q) {
  if (q.size() != mesh.num_triangles()) throw DomainError("assemble_cell_load: wrong cell count");
  VectorXd out = VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double share = q[t] * mesh.signed_area(t) / 3.0;
    const auto tri = mesh.triangle(t);
    for (int k : tri) out[k] += share;
  }
  return out;
}

// ---------------------------------------------------------------------------
// SpdSolver

SpdSolver::SpdSolver(const SparseMatrix& a, const SolverOptions& options) : a_(a), options_(options) {
  const bool cholesky = options.kind == SolverKind::Cholesky ||
                        (options.kind == SolverKind::Auto && a.rows() <= options.cholesky_max_unknowns);
  if (!cholesky) return;
  llt_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>>();
  llt_->compute(a_);
  if (llt_->info() != Eigen::Success) {
    throw SolverError("sparse Cholesky factorization failed (matrix not positive definite, n=" +
                      std::to_string(a.rows()) + ")");
  }
}

VectorXd SpdSolver::solve(const VectorXd& rhs) const {
  if (llt_) return llt_->solve(rhs);
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(options_.cg_tolerance);
  cg.setMaxIterations(options_.cg_max_iterations);
  cg.compute(a_);
  VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "conjugate gradients did not converge: " << cg.iterations() << " iterations, estimated error "
        << cg.error() << " (tolerance " << options_.cg_tolerance << ")";
    throw SolverError(msg.str());
  }
  return x;
}

MatrixXd SpdSolver::solve(const MatrixXd& rhs) const {
  if (llt_) return llt_->solve(rhs);
  MatrixXd out(rhs.rows(), rhs.cols());
  for (int j = 0; j < rhs.cols(); ++j) out.col(j) = solve(VectorXd(rhs.col(j)));
  return out;
}

// ---------------------------------------------------------------------------
// InteriorSplit

InteriorSplit::InteriorSplit(const TriMesh& mesh)
    : interior(mesh.interior_vertices()), reduced_index(mesh.num_vertices(), -1) {
  for (int i = 0; i < size(); ++i) reduced_index[interior[i]] = i;
}

SparseMatrix InteriorSplit::restrict_matrix(const SparseMatrix& full) const {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(full.nonZeros());
  for (int col = 0; col < full.outerSize(); ++col) {
    const int rc = reduced_index[col];
    if (rc < 0) continue;
    for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
      const int rr = reduced_index[it.row()];
      if (rr >= 0) entries.emplace_back(rr, rc, it.value());
    }
  }
  SparseMatrix out(size(), size());
  out.setFromTriplets(entries.begin(), entries.end());
  out.makeCompressed();
  return out;
}

VectorXd InteriorSplit::restrict_vector(const VectorXd& full) const {
  VectorXd out(size());
  for (int i = 0; i < size(); ++i) out[i] = full[interior[i]];
  return out;
}

VectorXd InteriorSplit::extend(const VectorXd& reduced) const {
  VectorXd out = VectorXd::Zero(static_cast<int>(reduced_index.size()));
  for (int i = 0; i < size(); ++i) out[interior[i]] = reduced[i];
  return out;
}

// ---------------------------------------------------------------------------
// DirichletSolver

DirichletSolver::DirichletSolver(const TriMesh& mesh, const NodalField& sigma, const SolverOptions& options)
    : mesh_(&mesh), split_(mesh), full_(assemble_stiffness(mesh, sigma)) {
  reduced_ = split_.restrict_matrix(full_);
  solver_ = SpdSolver(reduced_, options);
}

NodalField DirichletSolver::solve(const NodalField& lifting) const {
  return solve_with_load(lifting, VectorXd::Zero(mesh_->num_vertices()));
}

NodalField DirichletSolver::solve_with_load(const NodalField& lifting, const VectorXd& extra_load) const {
  check_length(*mesh_, lifting, "DirichletSolver::solve");
  const VectorXd rhs_full = extra_load - full_ * lifting;
  const VectorXd rhs = split_.restrict_vector(rhs_full);
  const VectorXd v = solver_.solve(rhs);
  const double rhs_norm = rhs.norm();
  last_residual_ = rhs_norm > 0.0 ? (reduced_ * v - rhs).norm() / rhs_norm : (reduced_ * v).norm();
  if (!std::isfinite(last_residual_) || last_residual_ > 1e-8) {
    throw SolverError("Dirichlet solve residual " + std::to_string(last_residual_) + " exceeds tolerance");
  }
  return lifting + split_.extend(v);
}

NodalField solve_dirichlet(const TriMesh& mesh, const NodalField& sigma, const NodalField& lifting,
                           const SolverOptions& options) {
  return DirichletSolver(mesh, sigma, options).solve(lifting);
}

// ---------------------------------------------------------------------------
// Fields

CellVectorField gradient(const TriMesh& mesh, const NodalField& u) {
  check_length(mesh, u, "gradient");
  CellVectorField out(mesh.num_triangles(), 2);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = geometry(mesh, t);
    const auto tri = mesh.triangle(t);
    const Eigen::Matrix<double, 3, 2> grads = basis_gradients<double>(g.p0, g.p1, g.p2);
    const Eigen::Vector3d values(u[tri[0]], u[tri[1]], u[tri[2]]);
    out.row(t) = (grads.transpose() * values).transpose();
  }
  return out;
}

double integrate(const TriMesh& mesh, const NodalField& f) {
  check_length(mesh, f, "integrate");
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangle(t);
    total += mesh.signed_area(t) * (f[tri[0]] + f[tri[1]] + f[tri[2]]) / 3.0;
  }
  return total;
}

double norm_l2(const TriMesh& mesh, const NodalField& f) {
  check_length(mesh, f, "norm_l2");
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangle(t);
    const double a = f[tri[0]], b = f[tri[1]], c = f[tri[2]];
    const double s = a + b + c;
    total += mesh.signed_area(t) / 12.0 * (a * a + b * b + c * c + s * s);
  }
  return std::sqrt(total);
}

double norm_l1(const TriMesh& mesh, const NodalField& f) {
  check_length(mesh, f, "norm_l1");
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangle(t);
    total += abs_integral_linear(f[tri[0]], f[tri[1]], f[tri[2]], mesh.signed_area(t));
  }
  return total;
}

double norm(const TriMesh& mesh, const NodalField& f, NormKind kind) {
  return kind == NormKind::L1 ? norm_l1(mesh, f) : norm_l2(mesh, f);
}

}  // namespace aet
