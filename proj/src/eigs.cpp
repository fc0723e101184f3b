// SPDX-License-Identifier: Apache-2.0

#include "aet/eigs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "aet/rng.hpp"

namespace aet {

namespace {

void check_inputs(const SparseMatrix& a, const SparseMatrix& m, int k) {
  if (a.rows() != a.cols() || m.rows() != m.cols() || a.rows() != m.rows()) {
    throw DomainError("eigs_smallest: A and M must be square and of equal size");
  }
  if (k < 1 || k > a.rows()) {
    throw DomainError("eigs_smallest: requested " + std::to_string(k) + " pairs of a " +
                      std::to_string(a.rows()) + "-dimensional problem");
  }
}

void normalize_signs(MatrixXd& vectors) {
  for (int j = 0; j < vectors.cols(); ++j) {
    Eigen::Index idx = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&idx);
    if (vectors(idx, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

VectorXd relative_residuals(const SparseMatrix& a, const SparseMatrix& m, const VectorXd& values,
                            const MatrixXd& vectors) {
  const MatrixXd ax = a * vectors;
  const MatrixXd mx = m * vectors;
  VectorXd out(values.size());
  for (int j = 0; j < values.size(); ++j) {
    const double scale = std::abs(values[j]) * mx.col(j).norm();
    out[j] = (ax.col(j) - values[j] * mx.col(j)).norm() / (scale > 0.0 ? scale : 1.0);
  }
  return out;
}

}  // namespace

EigenResult eigs_smallest_dense(const SparseMatrix& a, const SparseMatrix& m, int k) {
  check_inputs(a, m, k);
  const MatrixXd ad = MatrixXd(a);
  const MatrixXd md = MatrixXd(m);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(ad, md);
  if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed");
  EigenResult out;
  out.values = es.eigenvalues().head(k);
  out.vectors = es.eigenvectors().leftCols(k);
  normalize_signs(out.vectors);
  out.residuals = relative_residuals(a, m, out.values, out.vectors);
  return out;
}

EigenResult eigs_smallest_krylov(const SparseMatrix& a, const SparseMatrix& m, int k,
                                 const EigenOptions& options) {
  check_inputs(a, m, k);
  const int n = static_cast<int>(a.rows());
  const int block = std::clamp(options.block_size, 1, k);
  const int cap = std::min(n, std::max(k + 20 * block, static_cast<int>(std::ceil(options.max_basis_factor * k))));
  const SpdSolver inverse(a, options.solver);
  Rng rng = make_stream(options.seed, "lanczos");

  MatrixXd q(n, cap);
  MatrixXd mq(n, cap);
  MatrixXd projected = MatrixXd::Zero(cap, cap);  // Q^T A Q
  int cols = 0;

  auto round_to_block = [&](double target) {
    const int c = static_cast<int>(std::ceil(target / block)) * block;
    return std::min(cap, c);
  };
  int next_check = round_to_block(std::max(2.0 * k, static_cast<double>(k + 2 * block)));

  MatrixXd w(n, block);
  for (int j = 0; j < block; ++j) w.col(j) = standard_normal(rng, n);

  EigenResult result;
  while (true) {
    const int start = cols;
    // Block classical Gram-Schmidt against the existing basis, twice.
    VectorXd reference(w.cols());
    for (int j = 0; j < w.cols(); ++j) reference[j] = std::sqrt(std::max(0.0, w.col(j).dot(m * w.col(j))));
    for (int pass = 0; pass < 2 && cols > 0; ++pass) {
      w.noalias() -= q.leftCols(cols) * (mq.leftCols(cols).transpose() * w);
    }
    for (int j = 0; j < w.cols() && cols < cap; ++j) {
      VectorXd v = w.col(j);
      double ref = reference[j];
      for (int attempt = 0;; ++attempt) {
        for (int pass = 0; pass < 2; ++pass) {
          if (attempt > 0) {
            v.noalias() -= q.leftCols(cols) * (mq.leftCols(cols).transpose() * v);
          } else {
            for (int c = start; c < cols; ++c) v -= q.col(c) * mq.col(c).dot(v);
          }
        }
        VectorXd mv = m * v;
        const double nrm = std::sqrt(std::max(0.0, v.dot(mv)));
        if (nrm > 1e-8 * ref && nrm > 0.0) {
          q.col(cols) = v / nrm;
          mq.col(cols) = mv / nrm;
          ++cols;
          break;
        }
        if (attempt > 4) throw SolverError("Lanczos: could not extend the Krylov basis");
        // Invariant subspace reached in this direction: continue with a fresh random vector.
        v = standard_normal(rng, n);
        ref = std::sqrt(v.dot(m * v));
      }
    }
    const int added = cols - start;
    if (added > 0) {
      const MatrixXd aq = a * q.middleCols(start, added);
      projected.block(0, start, cols, added) = q.leftCols(cols).transpose() * aq;
      projected.block(start, 0, added, start) = projected.block(0, start, start, added).transpose();
    }

    if (cols >= next_check || cols == cap) {
      MatrixXd t = projected.topLeftCorner(cols, cols);
      t = 0.5 * (t + t.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(t);
      if (es.info() != Eigen::Success) throw SolverError("Lanczos: projected eigenproblem failed");
      result.values = es.eigenvalues().head(k);
      result.vectors = q.leftCols(cols) * es.eigenvectors().leftCols(k);
      result.residuals = relative_residuals(a, m, result.values, result.vectors);
      result.basis_size = cols;
      const double worst = result.residuals.maxCoeff();
      if (worst <= options.tolerance) break;
      if (cols == cap) {
        std::ostringstream msg;
        msg << "Lanczos did not converge with " << cols << " basis vectors: worst residual " << worst
            << " (tolerance " << options.tolerance << "), residual of pair 0 " << result.residuals[0]
            << ", pair " << k - 1 << " " << result.residuals[k - 1];
        throw SolverError(msg.str());
      }
      next_check = round_to_block(1.3 * cols);
    }
    w = inverse.solve(MatrixXd(mq.middleCols(start, added)));
  }
  normalize_signs(result.vectors);
  return result;
}

EigenResult eigs_smallest(const SparseMatrix& a, const SparseMatrix& m, int k, const EigenOptions& options) {
  check_inputs(a, m, k);
  if (a.rows() <= options.dense_max_size) return eigs_smallest_dense(a, m, k);
  return eigs_smallest_krylov(a, m, k, options);
}

}  // namespace aet
