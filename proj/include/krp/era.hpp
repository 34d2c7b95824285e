#pragma once

// Eigensystem realization from Markov parameters H_k = C A^(k-1) B, H_0 = D,
// with the block-Hankel compression done by one of three SVD paths.

#include "krp/block_structured.hpp"

#include <Eigen/Eigenvalues>

#include <complex>
#include <limits>
#include <string>

namespace krp {

/// Blocks H_0 .. H_{2s-1}, all m x n.
struct MarkovSequence {
  std::vector<Matrix> blocks;
  Index s = 0;

  Index m() const { return blocks.empty() ? 0 : blocks.front().rows(); }
  Index n() const { return blocks.empty() ? 0 : blocks.front().cols(); }

  void validate() const {
    detail::require(s >= 2, "MarkovSequence: s must be >= 2");
    detail::require(static_cast<Index>(blocks.size()) >= 2 * s,
                    "MarkovSequence: need 2s = " + std::to_string(2 * s) + " blocks, got " +
                        std::to_string(blocks.size()));
    for (const auto& h : blocks)
      detail::require(h.rows() == m() && h.cols() == n(), "MarkovSequence: blocks differ in shape");
  }
};

/// Markov parameters of (A, B, C, D) for k = 0 .. 2s-1.
inline MarkovSequence simulate_markov(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d, Index s) {
  detail::require(a.rows() == a.cols() && b.rows() == a.rows() && c.cols() == a.rows(),
                  "simulate_markov: inconsistent system shapes");
  detail::require(d.rows() == c.rows() && d.cols() == b.cols(), "simulate_markov: D shape mismatch");
  MarkovSequence seq;
  seq.s = s;
  seq.blocks.push_back(d);
  Matrix ak_b = b;
  for (Index k = 1; k < 2 * s; ++k) {
    seq.blocks.push_back(c * ak_b);
    ak_b = a * ak_b;
  }
  return seq;
}

/// (s-1) x (s-1) block Hankel with block (i, j) = H_{i+j+1+shift} (0-based
/// i, j). shift = 0 gives the Hankel matrix, shift = 1 the one-step shift.
inline BlockStructuredMatrix build_hankel(const MarkovSequence& seq, Index shift = 0) {
  seq.validate();
  detail::require(shift == 0 || shift == 1, "build_hankel: shift must be 0 or 1");
  const Index g = seq.s - 1;
  BlockStructuredMatrix h(g, g, seq.m(), seq.n());
  for (Index k = 0; k <= 2 * g - 2; ++k) {
    Pattern e{g, g, {}};
    for (Index r = std::max<Index>(0, k - g + 1); r <= std::min(k, g - 1); ++r) e.ones.emplace_back(r, k - r);
    h.add_term(std::move(e), seq.blocks[static_cast<std::size_t>(k + 1 + shift)]);
  }
  return h;
}

struct EraSystem {
  Matrix A, B, C, D;
  Index order() const { return A.rows(); }
};

enum class EraMethod { krp_single_view, gaussian_single_view, dense_svd };

inline const char* to_string(EraMethod m) {
  switch (m) {
    case EraMethod::krp_single_view: return "krp-single-view";
    case EraMethod::gaussian_single_view: return "gaussian-single-view";
    case EraMethod::dense_svd: return "dense-svd";
  }
  return "?";
}

inline std::optional<EraMethod> parse_era_method(const std::string& s) {
  for (auto m : {EraMethod::krp_single_view, EraMethod::gaussian_single_view, EraMethod::dense_svd})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

struct EraResult {
  EraSystem system;
  Vector singular_values;  // leading r of the Hankel matrix, as computed
  std::vector<std::string> warnings;
};

inline Index era_left_sketch(Index ell_r) { return (3 * ell_r + 1) / 2; }

inline EraResult era_identify(const MarkovSequence& seq, Index r, Index rho, EraMethod method,
                              const SketchConfig& cfg = {}) {
  detail::require(r >= 1, "era_identify: order r must be >= 1");
  detail::require(rho >= 0, "era_identify: oversampling must be >= 0");
  const BlockStructuredMatrix h = build_hankel(seq);
  detail::require(r <= std::min(h.rows(), h.cols()), "era_identify: r exceeds the Hankel dimensions");
  EraResult out;
  // sketches wider than the Hankel matrix are clamped: ell_l to the smaller
  // dimension, ell_r strictly below ell_l
  const Index cap = std::min(h.rows(), h.cols());
  Index ell_r = r + rho;
  Index ell_l = era_left_sketch(ell_r);
  if (method != EraMethod::dense_svd && ell_l > cap) {
    ell_l = cap;
    ell_r = std::min(ell_r, ell_l - 1);
    out.warnings.push_back("sketch sizes clamped to ell_r = " + std::to_string(ell_r) + ", ell_l = " +
                           std::to_string(ell_l) + " by the Hankel dimensions");
    detail::require(r <= ell_r, "era_identify: r leaves no room for a single-view sketch of this Hankel matrix");
  }

  SvdTriplet svd;
  switch (method) {
    case EraMethod::dense_svd:
      svd = truncate_svd(thin_svd(materialize_block(h)), r);
      break;
    case EraMethod::krp_single_view:
      svd = single_view_block(h, r, ell_r, ell_l, cfg).svd;
      break;
    case EraMethod::gaussian_single_view: {
      const Matrix dense = materialize_block(h);
      const Matrix omega = draw_gaussian_dense(h.cols(), ell_r, cfg.with_stream(0, 0, cfg.counter));
      const Matrix psi = draw_gaussian_dense(h.rows(), ell_l, cfg.with_stream(1, 0, cfg.counter));
      const SingleView sv = single_view(dense, omega, psi);
      SvdTriplet w = thin_svd(sv.W);
      w.U = sv.Q * w.U;
      svd = truncate_svd(w, std::min(r, w.rank()));
      break;
    }
  }

  out.singular_values = svd.S;
  if (svd.rank() < r) throw InfeasibleError("era_identify: sketch produced fewer than r singular triplets");
  const double s1 = svd.S(0);
  if (svd.S(r - 1) < 1e-12 * s1)
    out.warnings.push_back("sigma_r = " + std::to_string(svd.S(r - 1)) + " is below 1e-12 sigma_1; order " +
                           std::to_string(r) + " is likely too high");
  if (svd.S(r - 1) <= 0.0) throw InfeasibleError("era_identify: sigma_r is zero");

  const Vector sqrt_s = svd.S.cwiseSqrt();
  const Vector inv_sqrt_s = sqrt_s.cwiseInverse();
  const BlockStructuredMatrix shifted = build_hankel(seq, 1);
  const Matrix hv = shifted.apply(svd.V);  // H_up V
  EraSystem& sys = out.system;
  sys.A = inv_sqrt_s.asDiagonal() * (svd.U.transpose() * hv) * inv_sqrt_s.asDiagonal();
  sys.B = sqrt_s.asDiagonal() * svd.V.topRows(seq.n()).transpose();
  sys.C = svd.U.topRows(seq.m()) * sqrt_s.asDiagonal();
  sys.D = seq.blocks.front();
  detail::count_madds(svd.U.size() * r + r * r * 2);
  return out;
}

inline std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
  detail::require(a.rows() == a.cols(), "eigenvalues: matrix not square");
  if (a.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw InfeasibleError("eigenvalues: solver did not converge");
  std::vector<std::complex<double>> out;
  for (Index k = 0; k < a.rows(); ++k) out.push_back(es.eigenvalues()(k));
  return out;
}

/// max(max_a min_b |a - b|, max_b min_a |a - b|)
inline double hausdorff_eigs(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
  detail::require(!a.empty() && !b.empty(), "hausdorff_eigs: empty set");
  auto directed = [](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& x : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : to) best = std::min(best, std::abs(x - y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

/// Random stable system: A = V diag(lambda) V^{-1} with real eigenvalues in
/// (-0.9, 0.9), well-conditioned V; B, C Gaussian; D zero.
inline EraSystem random_stable_system(Index order, Index m, Index n, const SketchConfig& cfg) {
  SketchConfig g = cfg;
  g.distribution = Distribution::gaussian;
  g.ledger = nullptr;
  const Matrix v = Matrix::Identity(order, order) + 0.3 * draw_matrix(order, order, g.with_stream(0x657261, 0)) /
                                                        std::sqrt(static_cast<double>(order));
  const Matrix raw = draw_matrix(order, 1, g.with_stream(0x657261, 1));
  Vector lambda(order);
  // evenly spread with jitter, so the eigenvalues stay well separated
  for (Index k = 0; k < order; ++k)
    lambda(k) = -0.9 + 1.8 * (static_cast<double>(k) + 0.5 + 0.3 * std::tanh(raw(k, 0))) / static_cast<double>(order);
  EraSystem sys;
  sys.A = v * lambda.asDiagonal() * v.inverse();
  sys.B = draw_matrix(order, n, g.with_stream(0x657261, 2));
  sys.C = draw_matrix(m, order, g.with_stream(0x657261, 3));
  sys.D = Matrix::Zero(m, n);
  return sys;
}

}  // namespace krp
