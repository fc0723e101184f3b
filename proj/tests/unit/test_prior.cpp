// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <sstream>

#include "aet/prior.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace aet;

namespace {

KLOptions small_options(int n_kl) {
  KLOptions o;
  o.n_kl = n_kl;
  return o;
}

}  // namespace

TEST_CASE("KL eigenvalues and modes") {
  const TriMesh m = build_disk_mesh(0.05, 1.0, 0.0);
  const KLBasis kl = build_kl_basis(m, small_options(20));
  REQUIRE(kl.size() == 20);
  for (int i = 1; i < kl.size(); ++i) CHECK(kl.lambdas[i] <= kl.lambdas[i - 1]);
  CHECK(kl.lambdas.minCoeff() > 0.0);
  // Lowest Dirichlet eigenvalue of the disk is j_{0,1}^2.
  CHECK(kl.gammas[0] == doctest::Approx(30.0 + 5.783186).epsilon(0.02));
  const MatrixXd gram = kl.modes.transpose() * assemble_mass(m) * kl.modes;
  CHECK((gram - MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-8);
  for (int v : m.boundary_loop()) CHECK(kl.modes.row(v).cwiseAbs().maxCoeff() == 0.0);
  CHECK(kl.variance_retained == doctest::Approx(kl.lambdas.sum()));
  CHECK(kl.variance_retained < 1.0);
  CHECK(kl.pool_size == 40);
}

TEST_CASE("retained variance grows with the number of modes") {
  const TriMesh m = build_disk_mesh(0.08, 1.0, 0.0);
  double previous = 0.0;
  for (int n : {5, 10, 20, 40}) {
    KLOptions o = small_options(n);
    o.pool_size = 80;
    const KLBasis kl = build_kl_basis(m, o);
    CHECK(kl.variance_retained > previous);
    previous = kl.variance_retained;
  }
  KLOptions all = small_options(80);
  all.pool_size = 80;
  CHECK(build_kl_basis(m, all).variance_retained == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("realization is linear in the latent vector") {
  const TriMesh m = build_disk_mesh(0.1, 1.0, 0.0);
  const KLBasis kl = build_kl_basis(m, small_options(10));
  Rng rng(3);
  const VectorXd a = sample_latent(rng, 10);
  const VectorXd b = sample_latent(rng, 10);
  CHECK((kl.realize(2.0 * a - b) - (2.0 * kl.realize(a) - kl.realize(b))).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(kl.realize(VectorXd::Zero(10)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(kl.realize(VectorXd::Zero(9)), DomainError);
}

TEST_CASE("sample variance of realizations matches the KL variance") {
  const TriMesh m = build_disk_mesh(0.1, 1.0, 0.0);
  const KLBasis kl = build_kl_basis(m, small_options(15));
  const NodalField target = kl.pointwise_variance();
  Rng rng(11);
  const int n = 4000;
  NodalField sum_sq = NodalField::Zero(m.num_vertices());
  for (int s = 0; s < n; ++s) sum_sq += kl.realize(sample_latent(rng, 15)).array().square().matrix();
  const NodalField estimate = sum_sq / n;
  for (int v : m.interior_vertices()) {
    // Var of X^2 for centred Gaussian X is 2 var^2.
    const double se = std::sqrt(2.0 / n) * target[v];
    CHECK(std::abs(estimate[v] - target[v]) <= 5.0 * se);
  }
}

TEST_CASE("pushforward examples") {
  Pushforward f1{PushforwardKind::LogGaussian};
  Pushforward f2{PushforwardKind::Heaviside};
  Pushforward f3{PushforwardKind::Sigmoid};
  CHECK(f1(0.0) == doctest::Approx(5.0));
  CHECK(f2(0.0) == 8.0);
  CHECK(f2(-1e-300) == 4.0);
  CHECK(f3(0.0) == doctest::Approx(6.0));
  CHECK(f1(std::log(2.0)) == doctest::Approx(7.0));
  CHECK(f3(1e6) == 8.0);
  CHECK(f3(-1e6) == 4.0);
  CHECK(std::isfinite(f3(-1e308)));

  f3.sharpness = 1e3;
  for (double x : {-0.5, -0.05, -0.01, 0.01, 0.05, 0.5}) CHECK(f3(x) == doctest::Approx(f2(x)).epsilon(1e-4));
  f3.sharpness = 50.0;

  Rng rng(2);
  const NodalField x = 10.0 * standard_normal(rng, 500);
  for (const auto& f : {f1, f2, f3}) {
    const NodalField s = push(f, x);
    CHECK(s.minCoeff() > 0.0);
    for (int i = 0; i < x.size(); ++i) CHECK(s[i] == f(x[i]));
  }
  const NodalField s1 = push(f1, x);
  CHECK(s1.minCoeff() >= 3.0);
  const NodalField s3 = push(f3, x);
  CHECK(s3.minCoeff() >= 4.0);
  CHECK(s3.maxCoeff() <= 8.0);
}

TEST_CASE("pushforward names") {
  CHECK(pushforward_from_string("F1") == PushforwardKind::LogGaussian);
  CHECK(pushforward_from_string("heaviside") == PushforwardKind::Heaviside);
  CHECK(std::string(to_string(PushforwardKind::Sigmoid)) == "F3");
  CHECK_THROWS_AS(pushforward_from_string("F4"), ConfigError);
}

TEST_CASE("KL options are validated") {
  const TriMesh m = build_disk_mesh(0.2, 1.0, 0.0);
  KLOptions o = small_options(5);
  o.matern_alpha = 1.5;
  CHECK_THROWS_AS(build_kl_basis(m, o), DomainError);
  o = small_options(5);
  o.matern_tau = 0.0;
  CHECK_THROWS_AS(build_kl_basis(m, o), DomainError);
  o = small_options(10);
  o.pool_size = 5;
  CHECK_THROWS_AS(build_kl_basis(m, o), DomainError);
  CHECK_THROWS_AS(build_kl_basis(m, small_options(m.num_vertices())), DomainError);
  CHECK_THROWS_AS(build_kl_basis(m, small_options(0)), DomainError);
}

TEST_CASE("basis cache round trip") {
  const TriMesh m = build_disk_mesh(0.1, 1.0, 0.0);
  const KLOptions o = small_options(8);
  const KLBasis kl = build_kl_basis(m, o);
  const std::uint64_t key = kl_cache_key(m, o);

  std::stringstream ss;
  write_kl_basis(ss, kl, key);
  KLBasis back;
  REQUIRE(read_kl_basis(ss, key, back));
  CHECK(back.modes == kl.modes);
  CHECK(back.lambdas == kl.lambdas);
  CHECK(back.gammas == kl.gammas);
  CHECK(back.variance_retained == kl.variance_retained);
  CHECK(back.pool_size == kl.pool_size);

  std::stringstream again;
  write_kl_basis(again, kl, key);
  KLBasis wrong;
  CHECK_FALSE(read_kl_basis(again, key + 1, wrong));
  std::stringstream garbage("not a basis");
  CHECK_FALSE(read_kl_basis(garbage, key, wrong));

  KLOptions other = o;
  other.matern_tau = 31.0;
  CHECK(kl_cache_key(m, other) != key);
  other = o;
  other.n_kl = 9;
  CHECK(kl_cache_key(m, other) != key);
  CHECK(kl_cache_key(build_disk_mesh(0.12, 1.0, 0.0), o) != key);
  // The basis does not depend on which part of the boundary is driven.
  CHECK(kl_cache_key(build_disk_mesh(0.1, 0.5, 0.0), o) == key);
  CHECK(kl_cache_key(m, o) == key);

  const auto dir = test::scratch_dir("kl_cache");
  const KLBasis built = load_or_build_kl_basis(m, o, dir);
  int files = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  const KLBasis cached = load_or_build_kl_basis(m, o, dir);
  CHECK(cached.modes == built.modes);
}
