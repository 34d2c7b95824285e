#pragma once

// Seeded random factor matrices for Khatri-Rao and dense sketches.
//
// Every entry is a pure function of (seed, context, mode, counter, factor,
// entry index): a stream key is mixed from the labels, and entry e of that
// stream is the SplitMix64 finalizer applied to key + (e + 1) * golden. Draws
// for different modes therefore never depend on the order they are made in.

#include "krp/tensor.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace krp {

enum class Distribution { gaussian, rademacher };

inline const char* to_string(Distribution d) { return d == Distribution::gaussian ? "gaussian" : "rademacher"; }

/// Counts random scalars drawn, per (context, mode) stream and in total.
/// Increments are thread-safe.
class RngLedger {
 public:
  void add(std::uint64_t context, std::uint64_t mode, std::uint64_t count) {
    {
      std::lock_guard lock(mutex_);
      per_stream_[{context, mode}] += count;
    }
    total_.fetch_add(count, std::memory_order_relaxed);
  }

  std::uint64_t total() const { return total_.load(std::memory_order_relaxed); }

  std::uint64_t count(std::uint64_t context, std::uint64_t mode) const {
    std::lock_guard lock(mutex_);
    auto it = per_stream_.find({context, mode});
    return it == per_stream_.end() ? 0 : it->second;
  }

  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> streams() const {
    std::lock_guard lock(mutex_);
    return per_stream_;
  }

  void reset() {
    std::lock_guard lock(mutex_);
    per_stream_.clear();
    total_.store(0);
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> per_stream_;
  std::atomic<std::uint64_t> total_{0};
};

struct SketchConfig {
  Distribution distribution = Distribution::gaussian;
  std::uint64_t seed = 0;
  std::uint64_t context = 0;
  std::uint64_t mode = 0;
  std::uint64_t counter = 0;
  RngLedger* ledger = nullptr;

  SketchConfig with_stream(std::uint64_t ctx, std::uint64_t md, std::uint64_t ctr = 0) const {
    SketchConfig c = *this;
    c.context = ctx;
    c.mode = md;
    c.counter = ctr;
    return c;
  }
};

namespace detail {

constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(const SketchConfig& cfg, std::uint64_t factor) {
  std::uint64_t k = mix64(cfg.seed + golden_gamma);
  for (std::uint64_t label : {cfg.context, cfg.mode, cfg.counter, factor}) k = mix64(k ^ (label + golden_gamma));
  return k;
}

constexpr std::uint64_t stream_bits(std::uint64_t key, std::uint64_t e) { return mix64(key + (e + 1) * golden_gamma); }

// uniform on (0, 1]
inline double unit_open_left(std::uint64_t bits) { return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53; }

inline void fill_stream(double* out, Index count, const SketchConfig& cfg, std::uint64_t factor) {
  const std::uint64_t key = stream_key(cfg, factor);
  if (cfg.distribution == Distribution::rademacher) {
    for (Index e = 0; e < count; ++e)
      out[e] = (stream_bits(key, static_cast<std::uint64_t>(e)) >> 63) ? -1.0 : 1.0;
    return;
  }
  for (Index e = 0; e < count; ++e) {
    const auto u = static_cast<std::uint64_t>(e);
    const double r = std::sqrt(-2.0 * std::log(unit_open_left(stream_bits(key, 2 * u))));
    const double theta = 2.0 * std::numbers::pi * unit_open_left(stream_bits(key, 2 * u + 1));
    out[e] = r * std::cos(theta);
  }
}

}  // namespace detail

/// rows x cols matrix of i.i.d. entries from the stream (cfg, factor).
/// Does not touch the ledger.
inline Matrix draw_matrix(Index rows, Index cols, const SketchConfig& cfg, std::uint64_t factor = 0) {
  detail::require(rows >= 1 && cols >= 1, "draw_matrix: shape must be positive");
  Matrix m(rows, cols);
  detail::fill_stream(m.data(), m.size(), cfg, factor);
  return m;
}

/// Implicit Omega = factors[0] kr factors[1] kr ... kr factors[d-1]
/// (the first factor's row index varies slowest).
struct KrpSketch {
  std::vector<Matrix> factors;

  Index order() const { return static_cast<Index>(factors.size()); }
  Index cols() const { return factors.empty() ? 0 : factors.front().cols(); }
  Index rows() const {
    Index n = 1;
    for (const auto& f : factors) n *= f.rows();
    return n;
  }
  std::vector<Index> dims() const {
    std::vector<Index> d;
    for (const auto& f : factors) d.push_back(f.rows());
    return d;
  }
  void validate() const {
    detail::require(!factors.empty(), "KrpSketch: no factors");
    for (const auto& f : factors) detail::require(f.cols() == cols(), "KrpSketch: factors have differing column counts");
  }
};

inline KrpSketch draw_krp(const std::vector<Index>& dims, Index ell, const SketchConfig& cfg) {
  detail::require(ell >= 1, "draw_krp: ell must be >= 1");
  detail::require(!dims.empty(), "draw_krp: no dims");
  KrpSketch s;
  std::uint64_t drawn = 0;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    detail::require(dims[j] >= 1, "draw_krp: dims must be >= 1");
    s.factors.push_back(draw_matrix(dims[j], ell, cfg, j));
    drawn += static_cast<std::uint64_t>(dims[j] * ell);
  }
  if (cfg.ledger) cfg.ledger->add(cfg.context, cfg.mode, drawn);
  return s;
}

/// Dense matrix with i.i.d. entries of cfg.distribution.
inline Matrix draw_dense(Index rows, Index ell, const SketchConfig& cfg) {
  Matrix m = draw_matrix(rows, ell, cfg);
  if (cfg.ledger) cfg.ledger->add(cfg.context, cfg.mode, static_cast<std::uint64_t>(rows * ell));
  return m;
}

inline Matrix draw_gaussian_dense(Index rows, Index ell, SketchConfig cfg) {
  cfg.distribution = Distribution::gaussian;
  return draw_dense(rows, ell, cfg);
}

inline constexpr Index default_materialize_cap = Index{1} << 27;

/// Explicit N x ell matrix; only meant for oracles and small problems.
inline Matrix materialize(const KrpSketch& s, Index cap = default_materialize_cap) {
  s.validate();
  detail::require(s.rows() <= cap / std::max<Index>(s.cols(), 1),
                  "materialize: " + std::to_string(s.rows()) + " x " + std::to_string(s.cols()) + " exceeds the cap");
  Matrix acc = s.factors.front();
  for (std::size_t j = 1; j < s.factors.size(); ++j) acc = khatri_rao(acc, s.factors[j]);
  return acc;
}

/// x * Omega for x with Omega.rows() columns, without forming Omega.
inline Matrix apply_krp(const Matrix& x, const KrpSketch& s) {
  s.validate();
  detail::require(x.cols() == s.rows(), "apply_krp: column count does not match sketch rows");
  std::vector<Index> dims{x.rows()};
  for (auto it = s.factors.rbegin(); it != s.factors.rend(); ++it) dims.push_back(it->rows());
  const DenseTensor t(dims, std::vector<double>(x.data(), x.data() + x.size()));
  const std::vector<Matrix> reversed(s.factors.rbegin(), s.factors.rend());
  return mttkrp(t, reversed, 0);
}

/// One pool of factors shared by all mode sketches of an order-d tensor.
///
/// Pool factors P_1..P_{d-1} (0-based modes) are drawn once. Mode 0 uses them
/// as drawn. Mode i >= 1 needs a factor for mode 0 but must not use P_i, which
/// its own sketch skips; when n_i == n_0 that idle P_i fills the mode-0 slot,
/// otherwise one extra n_0 x ell factor is drawn (once) for the purpose. Every
/// mode sketch is thus a KRP of d-1 independent factors, and on uniform dims
/// the ledger grows by exactly (d-1) n ell.
class MemoizedKrp {
 public:
  static constexpr std::uint64_t context_tag = 0x6d656d6fULL;

  MemoizedKrp(const std::vector<Index>& dims, Index ell, const SketchConfig& cfg) : dims_(dims), ell_(ell) {
    detail::require(!dims.empty(), "MemoizedKrp: no dims");
    detail::require(ell >= 1, "MemoizedKrp: ell must be >= 1");
    const SketchConfig c = cfg.with_stream(context_tag, 0, cfg.counter);
    std::uint64_t drawn = 0;
    pool_.resize(dims.size());
    for (std::size_t j = 1; j < dims.size(); ++j) {
      pool_[j] = draw_matrix(dims[j], ell, c, j);
      drawn += static_cast<std::uint64_t>(dims[j] * ell);
    }
    const bool need_extra = std::any_of(dims.begin() + 1, dims.end(), [&](Index n) { return n != dims[0]; });
    if (need_extra) {
      pool_[0] = draw_matrix(dims[0], ell, c, 0);
      drawn += static_cast<std::uint64_t>(dims[0] * ell);
    }
    if (cfg.ledger) cfg.ledger->add(c.context, c.mode, drawn);
  }

  Index cols() const { return ell_; }
  const std::vector<Index>& dims() const { return dims_; }

  /// Factor standing in for mode j inside the sketch of mode i (j != i).
  const Matrix& factor(Index i, Index j) const {
    if (j != 0) return pool_[static_cast<std::size_t>(j)];
    return dims_[static_cast<std::size_t>(i)] == dims_[0] ? pool_[static_cast<std::size_t>(i)] : pool_[0];
  }

  /// The d-1 factors for mode i in ascending mode order, truncated to ell columns.
  std::vector<Matrix> factors_for_mode(Index i, Index ell) const {
    detail::require(ell >= 1 && ell <= ell_, "MemoizedKrp: ell exceeds the pool width");
    std::vector<Matrix> out;
    for (Index j = 0; j < static_cast<Index>(dims_.size()); ++j)
      if (j != i) out.push_back(factor(i, j).leftCols(ell));
    return out;
  }

 private:
  std::vector<Index> dims_;
  Index ell_;
  std::vector<Matrix> pool_;
};

inline MemoizedKrp memoized_streams(const std::vector<Index>& dims, Index ell, const SketchConfig& cfg) {
  return MemoizedKrp(dims, ell, cfg);
}

/// All d sketches X_(i) * KRP(pool factors for mode i), sharing the partial
/// contractions of the trailing modes between modes (dimension tree).
/// Column count is the pool width.
inline std::vector<Matrix> memoized_mttkrp_all(const DenseTensor& x, const MemoizedKrp& pool) {
  detail::require(x.dims() == pool.dims(), "memoized_mttkrp_all: tensor dims differ from pool dims");
  const Index d = x.order();
  const Index ell = pool.cols();
  std::vector<Matrix> out(static_cast<std::size_t>(d));
  if (d == 1) {
    out[0] = Eigen::Map<const Matrix>(x.raw(), x.dim(0), 1);
    return out;
  }
  const auto& dims = x.dims();
  auto dim = [&](Index j) { return dims[static_cast<std::size_t>(j)]; };

  // right[k] holds, per column, the tensor contracted over modes > k (dims n_0..n_k)
  std::vector<Matrix> right(static_cast<std::size_t>(d));
  {
    const Index lead = x.size() / dim(d - 1);
    Eigen::Map<const Matrix> xm(x.raw(), lead, dim(d - 1));
    right[static_cast<std::size_t>(d - 2)] = xm * pool.factor(0, d - 1);
    detail::count_madds(x.size() * ell);
  }
  for (Index k = d - 2; k >= 1; --k) {
    const Matrix& prev = right[static_cast<std::size_t>(k)];
    const Index len = prev.rows() / dim(k);
    Matrix next(len, ell);
    for (Index c = 0; c < ell; ++c) {
      Eigen::Map<const Matrix> vm(prev.col(c).data(), len, dim(k));
      next.col(c).noalias() = vm * pool.factor(0, k).col(c);
    }
    detail::count_madds(prev.size());
    right[static_cast<std::size_t>(k - 1)] = std::move(next);
  }

  out[0] = right[0];
  Vector v, w;
  for (Index i = 1; i < d - 1; ++i) {
    const Matrix& r = right[static_cast<std::size_t>(i)];
    Matrix y(dim(i), ell);
    for (Index c = 0; c < ell; ++c) {
      v = r.col(c);
      Index len = v.size();
      for (Index j = 0; j < i; ++j) {
        const Index rest = len / dim(j);
        Eigen::Map<const Matrix> vm(v.data(), dim(j), rest);
        w.noalias() = vm.transpose() * pool.factor(i, j).col(c);
        detail::count_madds(len);
        v.swap(w);
        len = rest;
      }
      y.col(c) = v;
    }
    out[static_cast<std::size_t>(i)] = std::move(y);
  }
  out[static_cast<std::size_t>(d - 1)] = mttkrp(x, pool.factors_for_mode(d - 1, ell), d - 1);
  return out;
}

}  // namespace krp
