#pragma once

// Thin factorizations and the small dense kernels built on them.

#include "krp/common.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace krp {

struct QrPair {
  Matrix Q;
  Matrix R;
};

/// Householder thin QR of a tall (rows >= cols) matrix.
inline QrPair thin_qr(const Matrix& m) {
  detail::require(m.size() > 0, "thin_qr: empty matrix");
  detail::require(m.rows() >= m.cols(), "thin_qr: requires rows >= cols");
  Eigen::HouseholderQR<Matrix> qr(m);
  QrPair out;
  out.Q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  out.R = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  detail::count_madds(2 * m.rows() * m.cols() * m.cols());
  return out;
}

struct SvdTriplet {
  Matrix U;
  Vector S;
  Matrix V;

  Index rank() const { return S.size(); }
  Matrix reconstruct() const { return U * S.asDiagonal() * V.transpose(); }
};

inline SvdTriplet thin_svd(const Matrix& m) {
  detail::require(m.size() > 0, "thin_svd: empty matrix");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  detail::count_madds(4 * m.rows() * m.cols() * std::min(m.rows(), m.cols()));
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Leading r singular triplets. Ties at the cut keep the first r in computed order.
inline SvdTriplet truncate_svd(const SvdTriplet& t, Index r) {
  detail::require(r >= 0 && r <= t.rank(), "truncate_svd: r = " + std::to_string(r) + " exceeds rank " +
                                               std::to_string(t.rank()));
  return {t.U.leftCols(r), t.S.head(r), t.V.leftCols(r)};
}

inline double default_pinv_tol(const Matrix& m) { return 1e-12 * static_cast<double>(std::max(m.rows(), m.cols())); }

/// Moore-Penrose pseudo-inverse; singular values <= tol * sigma_1 are treated as zero.
/// A negative tol selects the default 1e-12 * max(rows, cols).
inline Matrix pinv(const Matrix& m, double tol = -1.0) {
  detail::require(m.size() > 0, "pinv: empty matrix");
  if (tol < 0) tol = default_pinv_tol(m);
  const SvdTriplet t = thin_svd(m);
  const double cut = t.S.size() > 0 ? tol * t.S(0) : 0.0;
  Vector inv = Vector::Zero(t.S.size());
  for (Index k = 0; k < t.S.size(); ++k)
    if (t.S(k) > cut) inv(k) = 1.0 / t.S(k);
  return t.V * inv.asDiagonal() * t.U.transpose();
}

/// Orthonormal basis for range(y). Columns beyond the numerical rank
/// (|R_kk| <= 1e-12 |R_11| in a column-pivoted QR) are dropped; at least one
/// column is always returned so that downstream shapes stay nonempty.
inline Matrix orth_basis(const Matrix& y) {
  detail::require(y.size() > 0, "orth_basis: empty matrix");
  Eigen::ColPivHouseholderQR<Matrix> qr(y);
  const Index k_max = std::min(y.rows(), y.cols());
  const auto& r = qr.matrixQR();
  const double r11 = std::abs(r(0, 0));
  Index k = 1;
  while (k < k_max && std::abs(r(k, k)) > 1e-12 * r11) ++k;
  detail::count_madds(2 * y.rows() * y.cols() * k_max);
  return qr.householderQ() * Matrix::Identity(y.rows(), k);
}

/// Symmetric eigenvectors of g for its r largest eigenvalues, largest first.
inline Matrix leading_eigenvectors(const Matrix& g, Index r) {
  detail::require(g.rows() == g.cols(), "leading_eigenvectors: matrix not square");
  detail::require(r >= 0 && r <= g.rows(), "leading_eigenvectors: r out of range");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  if (eig.info() != Eigen::Success) throw InfeasibleError("symmetric eigensolver did not converge");
  detail::count_madds(4 * g.rows() * g.rows() * g.rows());
  return eig.eigenvectors().rightCols(r).rowwise().reverse();
}

/// Leading r left singular vectors of m.
inline Matrix leading_left_singular_vectors(const Matrix& m, Index r) {
  detail::require(r >= 0 && r <= m.rows(), "leading_left_singular_vectors: r out of range");
  if (m.cols() < r) {
    // fewer columns than requested: complete with an orthonormal complement
    const Matrix u = thin_svd(m).U;
    Matrix basis(m.rows(), u.cols() + m.rows());
    basis << u, Matrix::Identity(m.rows(), m.rows());
    Eigen::HouseholderQR<Matrix> qr(basis);
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), r);
    // Householder QR may flip signs of the leading columns; restore them from u
    q.leftCols(u.cols()) = u;
    return q;
  }
  return thin_svd(m).U.leftCols(r);
}

/// Businger-Golub column-pivoted QR: the first k pivot columns of a, chosen
/// greedily by largest remaining column norm (ties to the lowest index).
inline std::vector<Index> pivoted_qr_columns(const Matrix& a, Index k) {
  detail::require(k >= 0 && k <= std::min(a.rows(), a.cols()), "pivoted_qr_columns: k out of range");
  Matrix w = a;
  std::vector<Index> perm(static_cast<std::size_t>(a.cols()));
  for (Index j = 0; j < a.cols(); ++j) perm[static_cast<std::size_t>(j)] = j;
  for (Index step = 0; step < k; ++step) {
    const Index rows_left = w.rows() - step;
    Index best = step;
    double best_norm = -1.0;
    for (Index j = step; j < w.cols(); ++j) {
      const double nrm = w.col(j).tail(rows_left).squaredNorm();
      if (nrm > best_norm) {
        best_norm = nrm;
        best = j;
      }
    }
    if (best != step) {
      w.col(step).swap(w.col(best));
      std::swap(perm[static_cast<std::size_t>(step)], perm[static_cast<std::size_t>(best)]);
    }
    Vector v = w.col(step).tail(rows_left);
    double tau = 0.0;
    double beta = 0.0;
    v.makeHouseholderInPlace(tau, beta);
    auto trailing = w.bottomRightCorner(rows_left, w.cols() - step);
    Vector workspace(trailing.cols());
    trailing.applyHouseholderOnTheLeft(v.tail(rows_left - 1), tau, workspace.data());
  }
  return {perm.begin(), perm.begin() + k};
}

}  // namespace krp
