// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "aet/fem.hpp"
#include "aet/types.hpp"

namespace aet {

struct EigenOptions {
  /// Relative residual ||A x - mu M x|| / (mu ||M x||) required of every pair.
  double tolerance = 1e-8;
  int block_size = 8;
  /// Krylov basis cap as a multiple of k (at least k + 20 blocks).
  double max_basis_factor = 6.0;
  /// Problems up to this size go to a dense solver instead.
  int dense_max_size = 1000;
  std::uint64_t seed = 20240611;
  SolverOptions solver;
};

struct EigenResult {
  VectorXd values;       // ascending
  MatrixXd vectors;      // one M-orthonormal column per value
  VectorXd residuals;    // relative residual per pair
  int basis_size = 0;    // Krylov columns used (0 for the dense path)
};

/// k smallest pairs of A x = mu M x for sparse SPD A and M.
///
/// Block Lanczos on the shift-inverted operator A^{-1} M with full
/// M-orthogonalization, followed by Rayleigh-Ritz on A. The block handles the
/// repeated eigenvalues that symmetric domains produce. Eigenvectors are
/// sign-normalized so the largest-magnitude entry is positive.
/// Throws SolverError carrying the worst residual when the basis cap is hit.
EigenResult eigs_smallest(const SparseMatrix& a, const SparseMatrix& m, int k, const EigenOptions& options = {});

/// Same contract, always via the Krylov path (used to test it on small problems).
EigenResult eigs_smallest_krylov(const SparseMatrix& a, const SparseMatrix& m, int k,
                                 const EigenOptions& options = {});

EigenResult eigs_smallest_dense(const SparseMatrix& a, const SparseMatrix& m, int k);

}  // namespace aet
