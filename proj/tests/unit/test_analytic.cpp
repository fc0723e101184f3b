// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <Eigen/LU>

#include "aet/analytic.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace aet;

namespace {

MatrixField single(const Mat2& h) {
  MatrixField m;
  m.h11 = VectorXd::Constant(1, h(0, 0));
  m.h12 = VectorXd::Constant(1, h(0, 1));
  m.h22 = VectorXd::Constant(1, h(1, 1));
  return m;
}

MatrixField matrix_field(const std::vector<NodalField>& h) { return MatrixField{h[0], h[1], h[2]}; }

double rel_l2(const TriMesh& mesh, const NodalField& a, const NodalField& b) {
  return norm_l2(mesh, a - b) / norm_l2(mesh, b);
}

}  // namespace

TEST_CASE("eigenvalue thresholding") {
  ThresholdReport rep;
  Mat2 d;
  d << 0.001, 0.0, 0.0, 1.0;
  const MatrixField out = threshold_eigenvalues(single(d), 0.002, &rep);
  CHECK(out.at(0)(0, 0) == doctest::Approx(0.002));
  CHECK(out.at(0)(1, 1) == doctest::Approx(1.0));
  CHECK(std::abs(out.at(0)(0, 1)) < 1e-15);
  CHECK(rep.min_eig_before == doctest::Approx(0.001));
  CHECK(rep.fraction_thresholded == 1.0);

  const MatrixField zero = threshold_eigenvalues(single(Mat2::Zero()), 0.5);
  CHECK((zero.at(0) - 0.5 * Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-15);

  Mat2 spd;
  spd << 2.0, 0.3, 0.3, 1.0;
  const MatrixField same = threshold_eigenvalues(single(spd), 0.1, &rep);
  CHECK((same.at(0) - spd).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(rep.fraction_thresholded == 0.0);

  // Rotated deficient matrix keeps its eigenvectors.
  const double c = std::cos(0.4), s = std::sin(0.4);
  Mat2 q;
  q << c, -s, s, c;
  const Mat2 h = q * Vec2(-0.2, 3.0).asDiagonal() * q.transpose();
  const Mat2 expected = q * Vec2(0.01, 3.0).asDiagonal() * q.transpose();
  CHECK((threshold_eigenvalues(single(h), 0.01).at(0) - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(threshold_eigenvalues(single(h), 0.0), DomainError);
}

TEST_CASE("factor T satisfies T^T T H = I") {
  CHECK((factor_of(4.0 * Mat2::Identity()) - 0.5 * Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  Mat2 h;
  h << 3.0, -0.7, -0.7, 0.5;
  const Mat2 t = factor_of(h);
  CHECK(t(0, 1) == 0.0);
  CHECK((t.transpose() * t * h - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(1.0 / t.determinant() == doctest::Approx(std::sqrt(h.determinant())));
  Mat2 bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(factor_of(bad), DataQualityError);
  CHECK_THROWS_AS(build_T(single(bad)), DataQualityError);
  const FactorField tf = build_T(single(h));
  CHECK((tf.at(0) - t).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("rotation equation has no source for constant data") {
  const TriMesh m = build_disk_mesh(0.1, 1.0, 0.0);
  const int n = m.num_vertices();
  const MatrixField h{NodalField::Constant(n, 3.0), NodalField::Constant(n, 0.5), NodalField::Constant(n, 2.0)};
  const CellVectorField f = theta_rhs(m, h, build_T(h));
  CHECK(f.cwiseAbs().maxCoeff() < 1e-12);
  const NodalField theta = solve_theta(m, f, NodalField::Constant(n, 0.3));
  CHECK((theta.array() - 0.3).abs().maxCoeff() < 1e-10);
}

TEST_CASE("rotation source is invariant under scaling of the data") {
  const TriMesh m = build_disk_mesh(0.1, 1.0, 0.0);
  const MatrixField h{interpolate(m, [](const Vec2& p) { return 2.0 + p.x(); }),
                      interpolate(m, [](const Vec2& p) { return 0.3 * p.y(); }),
                      interpolate(m, [](const Vec2& p) { return 1.5 + p.x() * p.y(); })};
  const MatrixField h7{7.0 * h.h11, 7.0 * h.h12, 7.0 * h.h22};
  const CellVectorField f = theta_rhs(m, h, build_T(h));
  const CellVectorField f7 = theta_rhs(m, h7, build_T(h7));
  CHECK((f - f7).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + f.cwiseAbs().maxCoeff()));
}

TEST_CASE("gradient equation reproduces manufactured solutions") {
  const TriMesh m = build_disk_mesh(0.05, 1.0, 0.0);
  const NodalField u = interpolate(m, [](const Vec2& p) { return p.x() * p.y(); });
  const NodalField got = solve_gradient_equation(m, gradient(m, u), u);
  CHECK((got - u).cwiseAbs().maxCoeff() < 1e-10);

  // Zero source gives the discrete harmonic extension.
  const NodalField harmonic = interpolate(m, [](const Vec2& p) { return p.x() * p.x() - p.y() * p.y(); });
  const NodalField ext = solve_gradient_equation(m, CellVectorField::Zero(m.num_triangles(), 2),
                                                 test::boundary_lifting(m, [](const Vec2& p) {
                                                   return p.x() * p.x() - p.y() * p.y();
                                                 }));
  CHECK((ext - harmonic).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("constant conductivity is recovered exactly") {
  const TriMesh m = build_disk_mesh(0.08, 1.0, 0.0);
  const double c = 5.0;
  const NodalField sigma = NodalField::Constant(m.num_vertices(), c);
  const BoundaryInput f1 = make_custom_input(m, [](const Vec2& p) { return p.x(); });
  const BoundaryInput f2 = make_custom_input(m, [](const Vec2& p) { return p.y(); });
  const ForwardModel fwd(m, {f1, f2}, {{0, 0}, {0, 1}, {1, 1}});
  const MatrixField data = matrix_field(fwd.power_densities(sigma));
  const TruthBoundary bnd = boundary_from_truth(m, sigma, f1, f2);
  CHECK(bnd.min_det_jacobian > 0.0);
  CHECK(bnd.fraction_nonpositive == 0.0);
  for (Gauge g : {Gauge::Derived, Gauge::Rotated, Gauge::Literal}) {
    AnalyticOptions o;
    o.gauge = g;
    const AnalyticResult r = reconstruct_analytic(m, data, bnd, o);
    CHECK((r.sigma.array() - c).abs().maxCoeff() < 1e-6);
    CHECK(r.theta.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(r.threshold.fraction_thresholded == 0.0);
  }
}

TEST_CASE("smooth conductivity from the full-view pulses") {
  const NestedMeshPair meshes = refine_nested(build_disk_mesh(0.05, 1.0, 0.0));
  auto sigma_fn = [](const Vec2& p) { return 5.0 + std::exp(-6.0 * (p - Vec2(0.2, -0.1)).squaredNorm()); };
  const NodalField sigma_fine = interpolate(meshes.fine, sigma_fn);
  const InputSpec spec{{1}, true};
  const ForwardModel fine(meshes.fine, make_inputs(meshes.fine, spec), measurement_pairs(spec));
  std::vector<NodalField> h;
  for (const auto& f : fine.power_densities(sigma_fine)) h.push_back(meshes.restrict_to_coarse(f));
  const auto inputs = make_inputs(meshes.fine, spec);
  const TruthBoundary bf = boundary_from_truth(meshes.fine, sigma_fine, inputs[0], inputs[1]);
  const TruthBoundary bnd{meshes.restrict_to_coarse(bf.theta), meshes.restrict_to_coarse(bf.log_sigma),
                          bf.min_det_jacobian, bf.max_abs_det_jacobian, bf.fraction_nonpositive};
  const AnalyticResult r = reconstruct_analytic(meshes.coarse, matrix_field(h), bnd);
  CHECK(rel_l2(meshes.coarse, r.sigma, interpolate(meshes.coarse, sigma_fn)) < 0.02);
}

TEST_CASE("gauge names") {
  for (Gauge g : {Gauge::Derived, Gauge::Rotated, Gauge::Literal}) CHECK(gauge_from_string(to_string(g)) == g);
  CHECK_THROWS_AS(gauge_from_string("other"), ConfigError);
}
