#pragma once

// Deterministic and randomized Tucker compression.

#include "krp/linalg.hpp"
#include "krp/random.hpp"

#include <numeric>
#include <optional>

namespace krp {

struct TuckerTensor {
  DenseTensor core;
  std::vector<Matrix> factors;
  std::vector<bool> orthonormal;

  Index order() const { return core.order(); }

  std::vector<Index> ranks() const { return core.dims(); }

  std::vector<Index> dims() const {
    std::vector<Index> d;
    for (const auto& f : factors) d.push_back(f.rows());
    return d;
  }

  void validate() const {
    detail::require(static_cast<Index>(factors.size()) == core.order(), "TuckerTensor: need one factor per mode");
    detail::require(orthonormal.size() == factors.size(), "TuckerTensor: need one orthonormality flag per factor");
    for (Index i = 0; i < core.order(); ++i) {
      const Matrix& f = factors[static_cast<std::size_t>(i)];
      detail::require(f.cols() == core.dim(i), "TuckerTensor: factor column count differs from core dim");
      if (orthonormal[static_cast<std::size_t>(i)]) {
        const double err = (f.transpose() * f - Matrix::Identity(f.cols(), f.cols())).norm();
        detail::require(err <= 1e-10 * static_cast<double>(f.cols()), "TuckerTensor: flagged factor is not orthonormal");
      }
    }
  }

  DenseTensor reconstruct() const { return multi_ttm(core, factors); }
};

struct RankSpec {
  std::vector<Index> ranks;
  Index oversample = 0;

  Index sketch_size(Index mode) const { return ranks[static_cast<std::size_t>(mode)] + oversample; }

  void validate(const std::vector<Index>& dims) const {
    detail::require(ranks.size() == dims.size(), "RankSpec: expected " + std::to_string(dims.size()) +
                                                     " ranks, got " + std::to_string(ranks.size()));
    detail::require(oversample >= 0, "RankSpec: oversampling must be >= 0");
    for (std::size_t i = 0; i < dims.size(); ++i) {
      detail::require(ranks[i] >= 1, "RankSpec: ranks must be >= 1");
      const Index ell = ranks[i] + oversample;
      const Index others = detail::product(dims, i);
      detail::require(ell <= std::min(dims[i], others),
                      "RankSpec: rank + oversampling " + std::to_string(ell) + " exceeds mode " + std::to_string(i) +
                          " limit " + std::to_string(std::min(dims[i], others)));
    }
  }
};

enum class FactorMethod { gram, svd };

namespace detail {

inline std::vector<Index> resolve_order(const std::vector<Index>& order, Index d) {
  if (order.empty()) {
    std::vector<Index> o(static_cast<std::size_t>(d));
    std::iota(o.begin(), o.end(), Index{0});
    return o;
  }
  require(static_cast<Index>(order.size()) == d, "mode order must list every mode once");
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  for (Index i : order) {
    require(i >= 0 && i < d && !seen[static_cast<std::size_t>(i)], "mode order must be a permutation");
    seen[static_cast<std::size_t>(i)] = true;
  }
  return order;
}

/// X_(i) X_(i)^T accumulated over the contiguous blocks of x.
inline Matrix mode_gram(const DenseTensor& x, Index mode) {
  const auto [left, n, right] = split_at(x.dims(), mode);
  Matrix g = Matrix::Zero(n, n);
  for (Index b = 0; b < right; ++b) {
    Eigen::Map<const Matrix> xb(x.raw() + b * left * n, left, n);
    g.selfadjointView<Eigen::Lower>().rankUpdate(xb.transpose());
  }
  count_madds(x.size() * n);
  return g.selfadjointView<Eigen::Lower>();
}

/// X_(i) * omega, with omega indexed by unfolding columns.
inline Matrix unfolding_times(const DenseTensor& x, Index mode, const Matrix& omega) {
  const auto [left, n, right] = split_at(x.dims(), mode);
  require(omega.rows() == left * right, "unfolding_times: sketch rows do not match the unfolding");
  Matrix y = Matrix::Zero(n, omega.cols());
  for (Index b = 0; b < right; ++b) {
    Eigen::Map<const Matrix> xb(x.raw() + b * left * n, left, n);
    y.noalias() += xb.transpose() * omega.middleRows(b * left, left);
  }
  count_madds(x.size() * omega.cols());
  return y;
}

inline Matrix leading_factor(const DenseTensor& x, Index mode, Index r, FactorMethod method) {
  if (method == FactorMethod::gram) return leading_eigenvectors(mode_gram(x, mode), r);
  return leading_left_singular_vectors(mode_unfold(x, mode), r);
}

inline TuckerTensor assemble(const DenseTensor& x, std::vector<Matrix> factors) {
  TuckerTensor t;
  t.core = multi_ttm(x, factors, true);
  t.orthonormal.assign(factors.size(), true);
  t.factors = std::move(factors);
  return t;
}

}  // namespace detail

inline void check_ranks(const DenseTensor& x, const std::vector<Index>& ranks) {
  RankSpec{ranks, 0}.validate(x.dims());
}

/// Factor i spans the leading r_i left singular vectors of X_(i).
inline TuckerTensor hosvd(const DenseTensor& x, const std::vector<Index>& ranks,
                          FactorMethod method = FactorMethod::gram) {
  check_ranks(x, ranks);
  std::vector<Matrix> factors;
  for (Index i = 0; i < x.order(); ++i)
    factors.push_back(detail::leading_factor(x, i, ranks[static_cast<std::size_t>(i)], method));
  return detail::assemble(x, std::move(factors));
}

inline TuckerTensor sthosvd(const DenseTensor& x, const std::vector<Index>& ranks,
                            const std::vector<Index>& order = {}, FactorMethod method = FactorMethod::gram) {
  check_ranks(x, ranks);
  TuckerTensor t;
  t.core = x;
  t.factors.resize(static_cast<std::size_t>(x.order()));
  t.orthonormal.assign(static_cast<std::size_t>(x.order()), true);
  for (Index i : detail::resolve_order(order, x.order())) {
    Matrix q = detail::leading_factor(t.core, i, ranks[static_cast<std::size_t>(i)], method);
    t.core = ttm(t.core, q, i, true);
    t.factors[static_cast<std::size_t>(i)] = std::move(q);
  }
  return t;
}

inline TuckerTensor rhosvd_krp(const DenseTensor& x, const RankSpec& spec, const SketchConfig& cfg,
                               bool memoize = false) {
  spec.validate(x.dims());
  const Index d = x.order();
  std::vector<Matrix> factors(static_cast<std::size_t>(d));
  if (memoize) {
    Index ell_max = 0;
    for (Index i = 0; i < d; ++i) ell_max = std::max(ell_max, spec.sketch_size(i));
    const MemoizedKrp pool(x.dims(), ell_max, cfg);
    const std::vector<Matrix> sketches = memoized_mttkrp_all(x, pool);
    for (Index i = 0; i < d; ++i)
      factors[static_cast<std::size_t>(i)] = orth_basis(sketches[static_cast<std::size_t>(i)].leftCols(spec.sketch_size(i)));
  } else {
    for (Index i = 0; i < d; ++i) {
      std::vector<Index> other;
      for (Index j = 0; j < d; ++j)
        if (j != i) other.push_back(x.dim(j));
      Matrix y;
      if (other.empty()) {
        y = mttkrp(x, std::vector<Matrix>{}, i);
      } else {
        const KrpSketch s = draw_krp(other, spec.sketch_size(i), cfg.with_stream(static_cast<std::uint64_t>(i), 0, cfg.counter));
        y = mttkrp(x, s.factors, i);
      }
      factors[static_cast<std::size_t>(i)] = orth_basis(y);
    }
  }
  return detail::assemble(x, std::move(factors));
}

inline TuckerTensor rsthosvd_krp(const DenseTensor& x, const RankSpec& spec, const SketchConfig& cfg,
                                 const std::vector<Index>& order = {}) {
  spec.validate(x.dims());
  const Index d = x.order();
  TuckerTensor t;
  t.core = x;
  t.factors.resize(static_cast<std::size_t>(d));
  t.orthonormal.assign(static_cast<std::size_t>(d), true);
  for (Index i : detail::resolve_order(order, d)) {
    const Index ell = spec.sketch_size(i);
    std::vector<Index> other;
    for (Index j = 0; j < d; ++j)
      if (j != i) other.push_back(t.core.dim(j));
    detail::require(ell <= detail::product(other), "rsthosvd_krp: sketch size exceeds the current core unfolding");
    Matrix y;
    if (other.empty()) {
      y = mttkrp(t.core, std::vector<Matrix>{}, i);
    } else {
      const KrpSketch s = draw_krp(other, ell, cfg.with_stream(static_cast<std::uint64_t>(i), 0, cfg.counter));
      y = mttkrp(t.core, s.factors, i);
    }
    Matrix q = orth_basis(y);
    t.core = ttm(t.core, q, i, true);
    t.factors[static_cast<std::size_t>(i)] = std::move(q);
  }
  return t;
}

inline TuckerTensor rhosvd_gaussian(const DenseTensor& x, const RankSpec& spec, const SketchConfig& cfg) {
  spec.validate(x.dims());
  std::vector<Matrix> factors;
  for (Index i = 0; i < x.order(); ++i) {
    const Index rows = x.size() / x.dim(i);
    const Matrix omega =
        draw_gaussian_dense(rows, spec.sketch_size(i), cfg.with_stream(static_cast<std::uint64_t>(i), 0, cfg.counter));
    factors.push_back(orth_basis(detail::unfolding_times(x, i, omega)));
  }
  return detail::assemble(x, std::move(factors));
}

inline TuckerTensor rsthosvd_gaussian(const DenseTensor& x, const RankSpec& spec, const SketchConfig& cfg,
                                      const std::vector<Index>& order = {}) {
  spec.validate(x.dims());
  const Index d = x.order();
  TuckerTensor t;
  t.core = x;
  t.factors.resize(static_cast<std::size_t>(d));
  t.orthonormal.assign(static_cast<std::size_t>(d), true);
  for (Index i : detail::resolve_order(order, d)) {
    const Index ell = spec.sketch_size(i);
    const Index rows = t.core.size() / t.core.dim(i);
    detail::require(ell <= rows, "rsthosvd_gaussian: sketch size exceeds the current core unfolding");
    const Matrix omega = draw_gaussian_dense(rows, ell, cfg.with_stream(static_cast<std::uint64_t>(i), 0, cfg.counter));
    Matrix q = orth_basis(detail::unfolding_times(t.core, i, omega));
    t.core = ttm(t.core, q, i, true);
    t.factors[static_cast<std::size_t>(i)] = std::move(q);
  }
  return t;
}

/// Optional second pass: HOSVD of the core, folded into the factors.
inline TuckerTensor recompress(const TuckerTensor& t, const std::vector<Index>& ranks,
                               FactorMethod method = FactorMethod::gram) {
  const TuckerTensor inner = hosvd(t.core, ranks, method);
  TuckerTensor out;
  out.core = inner.core;
  for (std::size_t i = 0; i < t.factors.size(); ++i) {
    out.factors.push_back(t.factors[i] * inner.factors[i]);
    out.orthonormal.push_back(t.orthonormal[i]);
  }
  return out;
}

/// ||x - reconstruct(t)||_F / ||x||_F
inline double tucker_error(const DenseTensor& x, const TuckerTensor& t) {
  detail::require(t.dims() == x.dims(), "tucker_error: dims mismatch");
  const double nx = fro_norm(x);
  detail::require(nx > 0.0, "tucker_error: x is zero");
  return fro_norm(x - t.reconstruct()) / nx;
}

}  // namespace krp
