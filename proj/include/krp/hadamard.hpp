#pragma once

// Randomized Tucker recompression of the Hadamard product of two order-3
// Tucker tensors. With x = [F; A, B, C] and y = [G; U, V, W],
//   x * y = (F kron G) x_1 (A rkr U) x_2 (B rkr V) x_3 (C rkr W),
// where rkr is the row-wise Kronecker product. Mode sketches and the final
// core are formed through this identity; x * y itself is never materialized.

#include "krp/tucker.hpp"

namespace krp {

namespace detail {

inline void check_hadamard_pair(const TuckerTensor& x, const TuckerTensor& y) {
  x.validate();
  y.validate();
  require(x.order() == 3 && y.order() == 3, "hadamard_recompress: both inputs must have order 3");
  require(x.dims() == y.dims(), "hadamard_recompress: ambient dims differ");
}

// A_i rkr U_i for every mode
inline std::vector<Matrix> hadamard_mode_matrices(const TuckerTensor& x, const TuckerTensor& y) {
  std::vector<Matrix> m;
  for (std::size_t i = 0; i < x.factors.size(); ++i) m.push_back(transposed_khatri_rao(x.factors[i], y.factors[i]));
  return m;
}

}  // namespace detail

/// Omega_{i,j} for j != i in ascending j, each n_j x ell, from stream (i, j).
inline std::vector<Matrix> hadamard_sketch_factors(const std::vector<Index>& dims, Index mode, Index ell,
                                                   const SketchConfig& cfg) {
  std::vector<Matrix> out;
  for (Index j = 0; j < static_cast<Index>(dims.size()); ++j) {
    if (j == mode) continue;
    out.push_back(draw_dense(dims[static_cast<std::size_t>(j)], ell,
                             cfg.with_stream(static_cast<std::uint64_t>(mode), static_cast<std::uint64_t>(j), cfg.counter)));
  }
  return out;
}

/// (x * y)_(mode) times the KRP of `omegas` (ascending modes, skipping `mode`),
/// computed as M_mode * mttkrp(F kron G, {M_j^T Omega_j}, mode).
inline Matrix hadamard_mode_sketch(const TuckerTensor& x, const TuckerTensor& y, Index mode,
                                   const std::vector<Matrix>& omegas) {
  detail::check_hadamard_pair(x, y);
  detail::require(mode >= 0 && mode < 3, "hadamard_mode_sketch: mode out of range");
  detail::require(omegas.size() == 2, "hadamard_mode_sketch: need two sketch factors");
  const std::vector<Matrix> m = detail::hadamard_mode_matrices(x, y);
  const DenseTensor h = kron_tensor(x.core, y.core);
  std::vector<Matrix> reduced;
  std::size_t k = 0;
  for (Index j = 0; j < 3; ++j) {
    if (j == mode) continue;
    const Matrix& mj = m[static_cast<std::size_t>(j)];
    detail::require(omegas[k].rows() == mj.rows(), "hadamard_mode_sketch: sketch factor rows differ from dim");
    reduced.push_back(mj.transpose() * omegas[k]);
    detail::count_madds(mj.size() * omegas[k].cols());
    ++k;
  }
  const Matrix& mi = m[static_cast<std::size_t>(mode)];
  const Matrix z = mttkrp(h, reduced, mode);
  detail::count_madds(mi.size() * z.cols());
  return mi * z;
}

/// Randomized HOSVD of x * y with sketch sizes ranks + p. The result has
/// orthonormal factors and ranks r_i + p, or fewer where a sketch is
/// numerically rank deficient.
inline TuckerTensor hadamard_recompress(const TuckerTensor& x, const TuckerTensor& y, const std::vector<Index>& ranks,
                                        Index p, const SketchConfig& cfg) {
  detail::check_hadamard_pair(x, y);
  const std::vector<Index> dims = x.dims();
  RankSpec{ranks, p}.validate(dims);
  const std::vector<Matrix> m = detail::hadamard_mode_matrices(x, y);
  const DenseTensor h = kron_tensor(x.core, y.core);

  TuckerTensor out;
  std::vector<Matrix> projected;  // Q_i^T M_i
  for (Index i = 0; i < 3; ++i) {
    const Index ell = ranks[static_cast<std::size_t>(i)] + p;
    const std::vector<Matrix> omegas = hadamard_sketch_factors(dims, i, ell, cfg);
    std::vector<Matrix> reduced;
    std::size_t k = 0;
    for (Index j = 0; j < 3; ++j) {
      if (j == i) continue;
      const Matrix& mj = m[static_cast<std::size_t>(j)];
      reduced.push_back(mj.transpose() * omegas[k++]);
      detail::count_madds(mj.size() * ell);
    }
    const Matrix& mi = m[static_cast<std::size_t>(i)];
    const Matrix q = orth_basis(mi * mttkrp(h, reduced, i));
    detail::count_madds(mi.size() * ell);
    projected.push_back(q.transpose() * mi);
    detail::count_madds(mi.size() * ell);
    out.factors.push_back(q);
  }
  out.core = multi_ttm(h, projected);
  out.orthonormal.assign(3, true);
  return out;
}

/// x * y formed through the Kronecker core; for oracles and small inputs.
inline DenseTensor hadamard_materialize(const TuckerTensor& x, const TuckerTensor& y) {
  detail::check_hadamard_pair(x, y);
  return multi_ttm(kron_tensor(x.core, y.core), detail::hadamard_mode_matrices(x, y));
}

}  // namespace krp
