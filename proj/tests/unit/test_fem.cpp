// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "aet/fem.hpp"
#include "aet/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace aet;
using aet::test::boundary_lifting;

namespace {

const Vec2 kP0(0.0, 0.0);
const Vec2 kP1(1.0, 0.0);
const Vec2 kP2(0.0, 1.0);

// Integral of |x| over a triangle by slicing in y: each horizontal slice
// [a, b] contributes the closed form of the integral of |x|, and the slice
// integrals are summed with composite Simpson (exact away from kinks, which
// the fine subdivision resolves to well below the tolerance).
double abs_x_integral(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  const double y0 = std::min({p0.y(), p1.y(), p2.y()});
  const double y1 = std::max({p0.y(), p1.y(), p2.y()});
  auto slice = [&](double y) {
    double lo = 1e300;
    double hi = -1e300;
    const Vec2 pts[3] = {p0, p1, p2};
    for (int e = 0; e < 3; ++e) {
      const Vec2 a = pts[e];
      const Vec2 b = pts[(e + 1) % 3];
      if ((a.y() - y) * (b.y() - y) <= 0.0 && a.y() != b.y()) {
        const double x = a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
    if (lo > hi) return 0.0;
    auto prim = [](double x) { return 0.5 * x * std::abs(x); };
    return prim(hi) - prim(lo);
  };
  const int n = 200000;
  const double dy = (y1 - y0) / n;
  double sum = slice(y0) + slice(y1);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * slice(y0 + i * dy);
  return sum * dy / 3.0;
}

double max_asymmetry(const SparseMatrix& a) {
  const MatrixXd d = MatrixXd(a);
  return (d - d.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("local stiffness on the unit right triangle") {
  Eigen::Matrix3d expected;
  expected << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  expected *= 0.5;
  CHECK((local_stiffness(kP0, kP1, kP2, 1.0) - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((local_stiffness(kP0, kP1, kP2, 3.0) - 3.0 * expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("local mass on the unit right triangle") {
  Eigen::Matrix3d expected;
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected /= 24.0;
  CHECK((local_mass(kP0, kP1, kP2) - expected).cwiseAbs().maxCoeff() < 1e-16);
}

TEST_CASE("element kernels are generic over the scalar type") {
  const Vector2<float> a(0.f, 0.f), b(1.f, 0.f), c(0.f, 1.f);
  CHECK(local_stiffness(a, b, c, 1.f)(0, 0) == doctest::Approx(1.0));
  CHECK(local_mass(a, b, c)(0, 1) == doctest::Approx(1.0 / 24.0));
}

TEST_CASE("exact L1 of a linear function over a straddling triangle") {
  const Vec2 a(-1.0, -0.5);
  const Vec2 b(2.0, 0.0);
  const Vec2 c(0.3, 1.7);
  const double area = 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  const double exact = abs_x_integral(a, b, c);
  CHECK(abs_integral_linear(a.x(), b.x(), c.x(), area) == doctest::Approx(exact).epsilon(1e-9));
  // Lone negative vertex.
  const Vec2 d(1.0, 0.0), e(-2.0, 0.5), f(1.5, 2.0);
  const double area2 = 0.5 * ((e.x() - d.x()) * (f.y() - d.y()) - (f.x() - d.x()) * (e.y() - d.y()));
  CHECK(abs_integral_linear(d.x(), e.x(), f.x(), std::abs(area2)) ==
        doctest::Approx(abs_x_integral(d, e, f)).epsilon(1e-9));
  // No sign change: plain mean value.
  CHECK(abs_integral_linear(1.0, 2.0, 3.0, 0.5) == doctest::Approx(1.0));
  CHECK(abs_integral_linear(0.0, 0.0, -3.0, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("global stiffness and mass") {
  const TriMesh m = build_disk_mesh(0.15, 1.0, 0.0);
  const NodalField one = NodalField::Ones(m.num_vertices());
  const SparseMatrix k = assemble_stiffness(m, one);
  const SparseMatrix mass = assemble_mass(m);
  CHECK((k * one).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(max_asymmetry(k) == 0.0);
  CHECK(max_asymmetry(mass) == 0.0);
  CHECK(one.dot(mass * one) == doctest::Approx(m.area()).epsilon(1e-12));
  CHECK(lumped_mass(m).sum() == doctest::Approx(m.area()).epsilon(1e-12));
  const SparseMatrix k3 = assemble_stiffness(m, 3.0 * one);
  CHECK((MatrixXd(k3) - 3.0 * MatrixXd(k)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((MatrixXd(assemble_laplacian(m)) - MatrixXd(k)).cwiseAbs().maxCoeff() < 1e-12);
  // Positive semidefinite: x^T K x >= 0 for random x.
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    const VectorXd x = standard_normal(rng, m.num_vertices());
    CHECK(x.dot(k * x) >= -1e-12);
  }
}

TEST_CASE("stiffness rejects nonpositive conductivity") {
  const TriMesh m = build_disk_mesh(0.3, 1.0, 0.0);
  NodalField sigma = NodalField::Ones(m.num_vertices());
  sigma[3] = 0.0;
  CHECK_THROWS_AS(assemble_stiffness(m, sigma), DomainError);
  sigma[3] = std::nan("");
  CHECK_THROWS_AS(assemble_stiffness(m, sigma), DomainError);
}

TEST_CASE("linear boundary data are reproduced exactly") {
  const TriMesh m = build_disk_mesh(0.08, 1.0, 0.0);
  const NodalField sigma = NodalField::Ones(m.num_vertices());
  const NodalField u = solve_dirichlet(m, sigma, boundary_lifting(m, [](const Vec2& p) { return p.x(); }));
  for (int v = 0; v < m.num_vertices(); ++v) CHECK(std::abs(u[v] - m.vertex(v).x()) <= 1e-10);
  // sigma cancels for constant conductivity.
  const NodalField u5 = solve_dirichlet(m, 5.0 * sigma, boundary_lifting(m, [](const Vec2& p) {
                                          return p.x() * p.x() - p.y() * p.y();
                                        }));
  const NodalField u1 = solve_dirichlet(m, sigma, boundary_lifting(m, [](const Vec2& p) {
                                          return p.x() * p.x() - p.y() * p.y();
                                        }));
  CHECK((u5 - u1).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("harmonic quadratic converges at second order") {
  auto exact = [](const Vec2& p) { return p.x() * p.x() - p.y() * p.y(); };
  auto error = [&](const TriMesh& m) {
    const NodalField u = solve_dirichlet(m, NodalField::Ones(m.num_vertices()), boundary_lifting(m, exact));
    return norm_l2(m, u - interpolate(m, exact));
  };
  const TriMesh coarse = build_disk_mesh(0.1, 1.0, 0.0);
  const TriMesh fine = refine_nested(coarse).fine;
  const double ratio = error(coarse) / error(fine);
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.0);
}

TEST_CASE("discrete maximum principle") {
  const TriMesh m = build_disk_mesh(0.08, 1.0, 0.0);
  NodalField sigma = interpolate(m, [](const Vec2& p) { return 1.0 + 4.0 * p.squaredNorm(); });
  const NodalField g = boundary_lifting(m, [](const Vec2& p) { return std::sin(3.0 * std::atan2(p.y(), p.x())); });
  const NodalField u = solve_dirichlet(m, sigma, g);
  double bmin = 1e300, bmax = -1e300;
  for (int v : m.boundary_loop()) {
    bmin = std::min(bmin, u[v]);
    bmax = std::max(bmax, u[v]);
  }
  CHECK(u.minCoeff() >= bmin - 1e-8);
  CHECK(u.maxCoeff() <= bmax + 1e-8);
}

TEST_CASE("conjugate gradient fallback agrees with Cholesky") {
  const TriMesh m = build_disk_mesh(0.1, 1.0, 0.0);
  const NodalField sigma = interpolate(m, [](const Vec2& p) { return 2.0 + p.x(); });
  const NodalField g = boundary_lifting(m, [](const Vec2& p) { return p.y() * p.y(); });
  SolverOptions cg;
  cg.kind = SolverKind::ConjugateGradient;
  SolverOptions llt;
  llt.kind = SolverKind::Cholesky;
  CHECK((solve_dirichlet(m, sigma, g, cg) - solve_dirichlet(m, sigma, g, llt)).cwiseAbs().maxCoeff() < 1e-8);
  DirichletSolver s(m, sigma, llt);
  s.solve(g);
  CHECK(s.last_residual() <= 1e-10);
}

TEST_CASE("gradients of linear fields") {
  const TriMesh m = build_disk_mesh(0.2, 1.0, 0.0);
  const CellVectorField g = gradient(m, interpolate(m, [](const Vec2& p) { return 3.0 * p.x() + 2.0 * p.y() - 1.0; }));
  CHECK((g.col(0).array() - 3.0).abs().maxCoeff() < 1e-12);
  CHECK((g.col(1).array() - 2.0).abs().maxCoeff() < 1e-12);
  CHECK(gradient(m, NodalField::Constant(m.num_vertices(), 7.0)).cwiseAbs().maxCoeff() < 1e-12);
  const CellVectorField gx = gradient(m, interpolate(m, [](const Vec2& p) { return p.x(); }));
  CHECK((gx.col(0).array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("function norms") {
  const TriMesh m = build_disk_mesh(0.1, 1.0, 0.0);
  const double area = m.area();
  const NodalField one = NodalField::Ones(m.num_vertices());
  CHECK(norm_l1(m, one) == doctest::Approx(area).epsilon(1e-12));
  CHECK(norm_l2(m, one) * norm_l2(m, one) == doctest::Approx(area).epsilon(1e-12));
  CHECK(norm_l1(m, -2.0 * one) == doctest::Approx(2.0 * area).epsilon(1e-12));
  CHECK(integrate(m, one) == doctest::Approx(area).epsilon(1e-12));
  Rng rng(11);
  const SparseMatrix mass = assemble_mass(m);
  for (int i = 0; i < 5; ++i) {
    const NodalField f = standard_normal(rng, m.num_vertices());
    CHECK(norm_l2(m, f) * norm_l2(m, f) == doctest::Approx(f.dot(mass * f)).epsilon(1e-12));
    CHECK(norm_l1(m, f) <= std::sqrt(area) * norm_l2(m, f) + 1e-10);
    CHECK(norm(m, f, NormKind::L1) == norm_l1(m, f));
    CHECK(norm(m, f, NormKind::L2) == norm_l2(m, f));
  }
  // Odd function over a symmetric mesh: |x| integrates to 4/3 on the disk.
  const TriMesh fine = build_disk_mesh(0.02, 1.0, 0.0);
  CHECK(norm_l1(fine, interpolate(fine, [](const Vec2& p) { return p.x(); })) ==
        doctest::Approx(4.0 / 3.0).epsilon(2e-3));
}

TEST_CASE("gradient load integrates c . grad(phi)") {
  const TriMesh m = build_disk_mesh(0.15, 1.0, 0.0);
  CellVectorField c(m.num_triangles(), 2);
  c.col(0).setConstant(1.0);
  c.col(1).setConstant(-2.0);
  // For a constant field the load against a linear test function equals the
  // field dotted with its gradient times the area.
  const NodalField w = interpolate(m, [](const Vec2& p) { return 0.5 * p.x() + p.y(); });
  CHECK(w.dot(assemble_gradient_load(m, c)) == doctest::Approx((0.5 - 2.0) * m.area()).epsilon(1e-12));
  const VectorXd q = VectorXd::Constant(m.num_triangles(), 2.0);
  CHECK(assemble_cell_load(m, q).sum() == doctest::Approx(2.0 * m.area()).epsilon(1e-12));
}
