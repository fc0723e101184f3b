// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "aet/eigs.hpp"
#include "aet/mesh.hpp"
#include "aet/rng.hpp"
#include "aet/types.hpp"

namespace aet {

struct KLOptions {
  double matern_tau = 30.0;
  double matern_alpha = 2.0;
  int n_kl = 300;
  /// Modes computed for normalization; 0 means 2 * n_kl.
  int pool_size = 0;
  EigenOptions eigen;

  int effective_pool() const { return pool_size > 0 ? pool_size : 2 * n_kl; }
};

/// Truncated Karhunen-Loeve expansion of a Whittle-Matern field with
/// covariance (tau I - Laplacian)^(-alpha) and homogeneous Dirichlet data.
///
/// `lambdas` are normalized so that they sum to one over the computed pool;
/// `variance_retained` is the sum over the retained modes.
struct KLBasis {
  double matern_tau = 0.0;
  double matern_alpha = 0.0;
  int pool_size = 0;
  VectorXd gammas;   // operator eigenvalues of the retained modes, ascending
  VectorXd lambdas;  // normalized covariance eigenvalues, descending
  MatrixXd modes;    // vertices x n_kl, M-orthonormal, zero on the boundary
  double variance_retained = 0.0;

  int size() const { return static_cast<int>(lambdas.size()); }
  int num_vertices() const { return static_cast<int>(modes.rows()); }

  /// X = sum_i sqrt(lambda_i) x_i e_i.
  NodalField realize(const VectorXd& x) const;
  /// Pointwise variance sum_i lambda_i e_i(xi)^2 of the truncated field.
  NodalField pointwise_variance() const;
};

KLBasis build_kl_basis(const TriMesh& mesh, const KLOptions& options);

/// Cache key over mesh geometry, connectivity and the basis parameters.
std::uint64_t kl_cache_key(const TriMesh& mesh, const KLOptions& options);

void write_kl_basis(std::ostream& os, const KLBasis& basis, std::uint64_t key);
/// Returns false if the stream does not hold a basis with the given key.
bool read_kl_basis(std::istream& is, std::uint64_t key, KLBasis& out);

/// Reads `<dir>/kl_<key>.bin` when present, otherwise builds and writes it.
/// An empty dir disables caching.
KLBasis load_or_build_kl_basis(const TriMesh& mesh, const KLOptions& options, const std::filesystem::path& dir);

inline VectorXd sample_latent(Rng& rng, int n_kl) { return standard_normal(rng, n_kl); }

// ---------------------------------------------------------------------------
// Pushforwards

enum class PushforwardKind { LogGaussian, Heaviside, Sigmoid };

const char* to_string(PushforwardKind kind);
PushforwardKind pushforward_from_string(const std::string& name);

/// F1: a + b exp(X). F2: sigma_minus below zero, sigma_plus at and above.
/// F3: sigma_minus + (sigma_plus - sigma_minus) / (1 + exp(-sharpness X)).
struct Pushforward {
  PushforwardKind kind = PushforwardKind::Sigmoid;
  double a = 3.0;
  double b = 2.0;
  double sigma_minus = 4.0;
  double sigma_plus = 8.0;
  double sharpness = 50.0;

  double operator()(double x) const;
};

NodalField push(const Pushforward& map, const NodalField& x);

}  // namespace aet
