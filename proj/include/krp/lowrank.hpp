#pragma once

// Randomized range finder, randomized SVD, single-view and Nystrom
// approximations. Sketch operators are callables so structured callers can
// apply Omega without ever materializing it.

#include "krp/linalg.hpp"
#include "krp/random.hpp"

#include <optional>
#include <utility>

namespace krp {

inline constexpr Index default_oversample = 20;

/// Orthonormal basis of range(M * Omega) with ell = r + rho columns, fewer if
/// the sketch is numerically rank deficient. `apply(ell)` must return M * Omega.
template <class Apply>
Matrix range_finder(Apply&& apply, Index rows, Index cols, Index r, Index rho = default_oversample) {
  const Index ell = r + rho;
  detail::require(r >= 0 && rho >= 0 && ell >= 1, "range_finder: need r + rho >= 1");
  detail::require(ell <= std::min(rows, cols), "range_finder: ell = " + std::to_string(ell) +
                                                   " exceeds min dimension " + std::to_string(std::min(rows, cols)));
  const Matrix y = apply(ell);
  detail::require(y.rows() == rows && y.cols() == ell, "range_finder: sketch has the wrong shape");
  return orth_basis(y);
}

enum class SketchKind { gaussian, krp };

struct SketchSpec {
  SketchKind kind = SketchKind::gaussian;
  std::vector<Index> krp_dims;  // product must equal the column count of M
  SketchConfig cfg;
};

/// M * Omega for an ell-column sketch drawn according to spec.
inline Matrix sketch_right(const Matrix& m, Index ell, const SketchSpec& spec) {
  if (spec.kind == SketchKind::gaussian) {
    const Matrix omega = draw_dense(m.cols(), ell, spec.cfg);
    detail::count_madds(m.size() * ell);
    return m * omega;
  }
  detail::require(detail::product(spec.krp_dims) == m.cols(),
                  "sketch_right: KRP dims " + detail::shape_string(spec.krp_dims) + " do not match " +
                      std::to_string(m.cols()) + " columns");
  return apply_krp(m, draw_krp(spec.krp_dims, ell, spec.cfg));
}

/// Rank-r randomized SVD (range finder, then SVD of Q^T M). Returns fewer than
/// r triplets only when the sketch itself has rank below r.
inline SvdTriplet randomized_svd(const Matrix& m, Index r, Index rho, const SketchSpec& spec) {
  const Matrix q = range_finder([&](Index ell) { return sketch_right(m, ell, spec); }, m.rows(), m.cols(), r, rho);
  const Matrix b = q.transpose() * m;
  detail::count_madds(q.size() * m.cols());
  SvdTriplet t = thin_svd(b);
  t.U = q * t.U;
  return truncate_svd(t, std::min(r, t.rank()));
}

struct SingleView {
  Matrix Q;  // m x k, orthonormal
  Matrix W;  // k x n, M ~ Q W
  bool rank_deficient = false;
};

/// Solves (Psi^T Q) W = Z in the least-squares sense. QR based; falls back to
/// the pseudo-inverse when Psi^T Q is numerically rank deficient.
inline std::pair<Matrix, bool> core_least_squares(const Matrix& psi_t_q, const Matrix& z) {
  detail::require(psi_t_q.rows() == z.rows(), "single_view: Psi^T Q and Z row counts differ");
  const double tol = default_pinv_tol(psi_t_q);
  Eigen::ColPivHouseholderQR<Matrix> qr(psi_t_q);
  qr.setThreshold(tol);
  detail::count_madds(2 * psi_t_q.size() * psi_t_q.cols() + psi_t_q.size() * z.cols());
  if (qr.rank() < psi_t_q.cols()) return {pinv(psi_t_q, tol) * z, true};
  return {qr.solve(z), false};
}

/// One-pass approximation from Y = M Omega and Z = Psi^T M.
/// `psi_t_apply(Q)` must return Psi^T Q.
template <class PsiTApply>
SingleView single_view_from_sketches(const Matrix& y, const Matrix& z, PsiTApply&& psi_t_apply) {
  detail::require(y.cols() < z.rows(), "single_view: requires ell_r < ell_l");
  SingleView out;
  out.Q = orth_basis(y);
  const Matrix psi_t_q = psi_t_apply(out.Q);
  auto [w, deficient] = core_least_squares(psi_t_q, z);
  out.W = std::move(w);
  out.rank_deficient = deficient;
  return out;
}

/// Dense convenience form with explicit Omega (n x ell_r) and Psi (m x ell_l).
inline SingleView single_view(const Matrix& m, const Matrix& omega, const Matrix& psi) {
  detail::require(omega.rows() == m.cols() && psi.rows() == m.rows(), "single_view: sketch shapes do not match M");
  detail::require(psi.cols() <= std::min(m.rows(), m.cols()), "single_view: ell_l exceeds min dimension");
  const Matrix y = m * omega;
  const Matrix z = psi.transpose() * m;
  detail::count_madds(m.size() * (omega.cols() + psi.cols()));
  return single_view_from_sketches(y, z, [&](const Matrix& q) { return Matrix(psi.transpose() * q); });
}

/// Nystrom approximation M ~ F F^T, F = (M Omega) (Omega^T M Omega)^{+1/2}.
struct NystromFactor {
  Matrix F;
  Matrix reconstruct() const { return F * F.transpose(); }
};

/// From y = M Omega and b = Omega^T M Omega. Eigenvalues of b at or below
/// 1e-12 * ell * lambda_max are treated as zero.
inline NystromFactor nystrom_from_sketch(const Matrix& y, const Matrix& b) {
  detail::require(b.rows() == b.cols() && b.rows() == y.cols(), "nystrom: sketch shapes do not match");
  const Matrix bs = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(bs);
  if (eig.info() != Eigen::Success) throw InfeasibleError("nystrom: eigensolver did not converge");
  const Vector& lambda = eig.eigenvalues();
  const double cut = 1e-12 * static_cast<double>(b.rows()) * std::max(lambda.maxCoeff(), 0.0);
  Vector scale = Vector::Zero(lambda.size());
  for (Index k = 0; k < lambda.size(); ++k)
    if (lambda(k) > cut) scale(k) = 1.0 / std::sqrt(lambda(k));
  return {y * eig.eigenvectors() * scale.asDiagonal()};
}

inline NystromFactor nystrom_psd(const Matrix& m, const Matrix& omega) {
  detail::require(m.rows() == m.cols(), "nystrom_psd: matrix not square");
  detail::require(omega.rows() == m.rows(), "nystrom_psd: sketch rows do not match");
  if ((m - m.transpose()).norm() > 1e-10 * m.norm()) throw DimensionError("nystrom_psd: matrix is not symmetric");
  const Matrix y = m * omega;
  detail::count_madds(m.size() * omega.cols());
  return nystrom_from_sketch(y, omega.transpose() * y);
}

}  // namespace krp
