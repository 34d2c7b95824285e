#pragma once

// Block-structured matrices M = sum_j E_j kron M_j with 0/1 placement
// patterns E_j, and their Khatri-Rao sketches
//   M (Omega_1 kr Omega_2) = sum_j (E_j Omega_1) kr (M_j Omega_2),
// which never touch the (mp) x (nq) matrix itself.

#include "krp/lowrank.hpp"

#include <set>

namespace krp {

/// p x q 0/1 matrix stored as a coordinate list of its ones.
struct Pattern {
  Index rows = 0;
  Index cols = 0;
  std::vector<std::pair<Index, Index>> ones;

  void validate() const {
    detail::require(rows >= 1 && cols >= 1, "Pattern: shape must be positive");
    std::set<std::pair<Index, Index>> seen;
    for (const auto& [r, c] : ones) {
      detail::require(r >= 0 && r < rows && c >= 0 && c < cols, "Pattern: coordinate out of range");
      detail::require(seen.insert({r, c}).second, "Pattern: duplicate coordinate");
    }
  }

  Pattern transposed() const {
    Pattern t{cols, rows, {}};
    t.ones.reserve(ones.size());
    for (const auto& [r, c] : ones) t.ones.emplace_back(c, r);
    return t;
  }

  Matrix dense() const {
    Matrix e = Matrix::Zero(rows, cols);
    for (const auto& [r, c] : ones) e(r, c) = 1.0;
    return e;
  }

  /// E * x by gathering and adding rows of x.
  Matrix times(const Matrix& x) const {
    detail::require(x.rows() == cols, "Pattern::times: shape mismatch");
    Matrix out = Matrix::Zero(rows, x.cols());
    for (const auto& [r, c] : ones) out.row(r) += x.row(c);
    detail::count_madds(static_cast<Index>(ones.size()) * x.cols());
    return out;
  }
};

struct BlockTerm {
  Pattern pattern;
  Matrix block;
};

class BlockStructuredMatrix {
 public:
  BlockStructuredMatrix(Index p, Index q, Index m, Index n) : p_(p), q_(q), m_(m), n_(n) {
    detail::require(p >= 1 && q >= 1 && m >= 1 && n >= 1, "BlockStructuredMatrix: shape must be positive");
  }

  void add_term(Pattern pattern, Matrix block) {
    pattern.validate();
    detail::require(pattern.rows == p_ && pattern.cols == q_, "BlockStructuredMatrix: pattern shape mismatch");
    detail::require(block.rows() == m_ && block.cols() == n_, "BlockStructuredMatrix: block shape mismatch");
    terms_.push_back({std::move(pattern), std::move(block)});
  }

  Index p() const { return p_; }
  Index q() const { return q_; }
  Index m() const { return m_; }
  Index n() const { return n_; }
  Index rows() const { return m_ * p_; }
  Index cols() const { return n_ * q_; }
  const std::vector<BlockTerm>& terms() const { return terms_; }

  /// sum_j E_j^T kron M_j^T
  BlockStructuredMatrix transposed() const {
    BlockStructuredMatrix t(q_, p_, n_, m_);
    for (const auto& term : terms_) t.terms_.push_back({term.pattern.transposed(), term.block.transpose()});
    return t;
  }

  /// M * x for a dense x with cols() rows.
  Matrix apply(const Matrix& x) const {
    detail::require(x.rows() == cols(), "BlockStructuredMatrix::apply: shape mismatch");
    Matrix out = Matrix::Zero(rows(), x.cols());
    for (const auto& term : terms_)
      for (const auto& [r, c] : term.pattern.ones) {
        out.middleRows(r * m_, m_).noalias() += term.block * x.middleRows(c * n_, n_);
        detail::count_madds(m_ * n_ * x.cols());
      }
    return out;
  }

 private:
  Index p_, q_, m_, n_;
  std::vector<BlockTerm> terms_;
};

inline Matrix materialize_block(const BlockStructuredMatrix& a, Index cap = default_materialize_cap) {
  detail::require(a.rows() <= cap / a.cols(), "materialize_block: matrix exceeds the cap");
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (const auto& term : a.terms())
    for (const auto& [r, c] : term.pattern.ones) out.block(r * a.m(), c * a.n(), a.m(), a.n()) += term.block;
  return out;
}

/// sum_j (E_j Omega_1) kr (M_j Omega_2) for a two-factor sketch over dims (q, n).
inline Matrix structured_sketch(const BlockStructuredMatrix& a, const KrpSketch& sketch) {
  sketch.validate();
  detail::require(sketch.order() == 2 && sketch.factors[0].rows() == a.q() && sketch.factors[1].rows() == a.n(),
                  "structured_sketch: sketch must have factors of shape q x l and n x l");
  const Index ell = sketch.cols();
  Matrix y = Matrix::Zero(a.rows(), ell);
  for (const auto& term : a.terms()) {
    const Matrix e_omega = term.pattern.times(sketch.factors[0]);
    const Matrix m_omega = term.block * sketch.factors[1];
    detail::count_madds(a.m() * a.n() * ell);
    // only block rows that the pattern touches are nonzero in E_j Omega_1
    std::vector<bool> touched(static_cast<std::size_t>(a.p()), false);
    for (const auto& rc : term.pattern.ones) touched[static_cast<std::size_t>(rc.first)] = true;
    for (Index r = 0; r < a.p(); ++r) {
      if (!touched[static_cast<std::size_t>(r)]) continue;
      for (Index k = 0; k < ell; ++k) y.col(k).segment(r * a.m(), a.m()) += e_omega(r, k) * m_omega.col(k);
      detail::count_madds(a.m() * ell);
    }
  }
  return y;
}

struct BlockSingleView {
  SvdTriplet svd;
  bool rank_deficient = false;
};

/// Single-view randomized SVD of a block-structured matrix from explicit
/// sketches: Omega over dims (q, n) with ell_r columns, Psi over (p, m) with
/// ell_l columns. Result truncated to rank r (r = 0 gives an empty triplet).
inline BlockSingleView single_view_block(const BlockStructuredMatrix& a, Index r, const KrpSketch& omega,
                                         const KrpSketch& psi) {
  detail::require(r >= 0, "single_view_block: r must be >= 0");
  detail::require(omega.cols() <= std::min(a.rows(), a.cols()) && psi.cols() <= std::min(a.rows(), a.cols()),
                  "single_view_block: sketch size exceeds min dimension");
  detail::require(r <= omega.cols(), "single_view_block: r exceeds ell_r");
  const Matrix y = structured_sketch(a, omega);
  const Matrix z = structured_sketch(a.transposed(), psi);  // M^T Psi
  const SingleView sv = single_view_from_sketches(y, Matrix(z.transpose()), [&](const Matrix& q) {
    return Matrix(apply_krp(Matrix(q.transpose()), psi).transpose());
  });
  SvdTriplet w = thin_svd(sv.W);
  w.U = sv.Q * w.U;
  return {truncate_svd(w, std::min(r, w.rank())), sv.rank_deficient};
}

/// Same, drawing Omega (stream context 0) and Psi (stream context 1) from cfg.
inline BlockSingleView single_view_block(const BlockStructuredMatrix& a, Index r, Index ell_r, Index ell_l,
                                         const SketchConfig& cfg) {
  const KrpSketch omega = draw_krp({a.q(), a.n()}, ell_r, cfg.with_stream(0, 0, cfg.counter));
  const KrpSketch psi = draw_krp({a.p(), a.m()}, ell_l, cfg.with_stream(1, 0, cfg.counter));
  return single_view_block(a, r, omega, psi);
}

/// Multilevel block matrix: sum over terms of
///   E^(1)_{i_1} kron ... kron E^(L)_{i_L} kron M^{(i_1..i_L)}.
class MultilevelBlockMatrix {
 public:
  struct Term {
    std::vector<Index> index;  // one pattern index per level
    Matrix leaf;
  };

  MultilevelBlockMatrix(std::vector<std::vector<Pattern>> level_patterns, Index m, Index n)
      : levels_(std::move(level_patterns)), m_(m), n_(n) {
    detail::require(!levels_.empty(), "MultilevelBlockMatrix: need at least one level");
    detail::require(m >= 1 && n >= 1, "MultilevelBlockMatrix: leaf shape must be positive");
    for (const auto& level : levels_) {
      detail::require(!level.empty(), "MultilevelBlockMatrix: empty level");
      for (const auto& e : level) {
        e.validate();
        detail::require(e.rows == level.front().rows && e.cols == level.front().cols,
                        "MultilevelBlockMatrix: patterns within a level differ in shape");
      }
    }
  }

  void add_term(std::vector<Index> index, Matrix leaf) {
    detail::require(index.size() == levels_.size(), "MultilevelBlockMatrix: index arity mismatch");
    for (std::size_t j = 0; j < index.size(); ++j)
      detail::require(index[j] >= 0 && index[j] < static_cast<Index>(levels_[j].size()),
                      "MultilevelBlockMatrix: pattern index out of range");
    detail::require(leaf.rows() == m_ && leaf.cols() == n_, "MultilevelBlockMatrix: leaf shape mismatch");
    terms_.push_back({std::move(index), std::move(leaf)});
  }

  Index levels() const { return static_cast<Index>(levels_.size()); }
  const Pattern& pattern(Index level, Index k) const {
    return levels_[static_cast<std::size_t>(level)][static_cast<std::size_t>(k)];
  }
  Index level_rows(Index level) const { return pattern(level, 0).rows; }
  Index level_cols(Index level) const { return pattern(level, 0).cols; }
  Index m() const { return m_; }
  Index n() const { return n_; }
  Index rows() const {
    Index r = m_;
    for (Index j = 0; j < levels(); ++j) r *= level_rows(j);
    return r;
  }
  Index cols() const {
    Index c = n_;
    for (Index j = 0; j < levels(); ++j) c *= level_cols(j);
    return c;
  }
  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<std::vector<Pattern>> levels_;
  Index m_, n_;
  std::vector<Term> terms_;
};

inline Matrix materialize_multilevel(const MultilevelBlockMatrix& a, Index cap = default_materialize_cap) {
  detail::require(a.rows() <= cap / a.cols(), "materialize_multilevel: matrix exceeds the cap");
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (const auto& term : a.terms()) {
    Matrix k = a.pattern(0, term.index[0]).dense();
    for (Index j = 1; j < a.levels(); ++j) k = kron(k, a.pattern(j, term.index[static_cast<std::size_t>(j)]).dense());
    out += kron(k, term.leaf);
  }
  return out;
}

/// sum over terms of (E^(1) Omega_1) kr ... kr (E^(L) Omega_L) kr (M Omega_{L+1}).
inline Matrix multilevel_sketch(const MultilevelBlockMatrix& a, const KrpSketch& sketch) {
  sketch.validate();
  detail::require(sketch.order() == a.levels() + 1, "multilevel_sketch: sketch needs L + 1 factors");
  for (Index j = 0; j < a.levels(); ++j)
    detail::require(sketch.factors[static_cast<std::size_t>(j)].rows() == a.level_cols(j),
                    "multilevel_sketch: factor shape mismatch at level " + std::to_string(j));
  detail::require(sketch.factors.back().rows() == a.n(), "multilevel_sketch: leaf factor shape mismatch");
  Matrix y = Matrix::Zero(a.rows(), sketch.cols());
  for (const auto& term : a.terms()) {
    Matrix acc = a.pattern(0, term.index[0]).times(sketch.factors[0]);
    for (Index j = 1; j < a.levels(); ++j)
      acc = khatri_rao(acc, a.pattern(j, term.index[static_cast<std::size_t>(j)]).times(sketch.factors[static_cast<std::size_t>(j)]));
    detail::count_madds(a.m() * a.n() * sketch.cols() + a.rows() * sketch.cols());
    y += khatri_rao(acc, term.leaf * sketch.factors.back());
  }
  return y;
}

}  // namespace krp
