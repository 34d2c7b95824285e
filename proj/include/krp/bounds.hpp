#pragma once

// Computable sample-size conditions and error bounds for Khatri-Rao sketches,
// plus a Monte-Carlo check of the subspace-embedding property.
//
// K (subgaussian norm bound) and C_S (absolute constant) are never pinned
// numerically; both are parameters defaulting to 1 and every output built on
// them should be read as uncalibrated.

#include "krp/linalg.hpp"
#include "krp/random.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>

namespace krp {

struct BoundParams {
  Index r = 1;
  Index d = 1;
  double delta = 0.05;
  double eps = 0.5;
  double K = 1.0;
  double Cs = 1.0;
  std::vector<Index> dims;  // tensor mode sizes (hosvd/sthosvd variants)
  double M = std::numeric_limits<double>::infinity();  // matrix rows; unbounded when unknown
  double N = std::numeric_limits<double>::infinity();  // matrix columns

  void validate() const {
    detail::require(delta > 0 && delta < 1, "BoundParams: delta must lie in (0, 1)");
    detail::require(eps > 0 && eps < 1, "BoundParams: eps must lie in (0, 1)");
    detail::require(r >= 1, "BoundParams: r must be >= 1");
    detail::require(d >= 1, "BoundParams: d must be >= 1");
    detail::require(K >= 1, "BoundParams: K must be >= 1");
    detail::require(Cs > 0, "BoundParams: C_S must be > 0");
  }
};

/// log of C_{K,d} = 2 (2e)^d (C_S K sqrt 2)^{2d}
inline double log_c_kd(double K, double Cs, Index d) {
  const double dd = static_cast<double>(d);
  return std::log(2.0) + dd * std::log(2.0 * std::numbers::e) + 2.0 * dd * std::log(Cs * K * std::numbers::sqrt2);
}

inline double c_kd(double K, double Cs, Index d) { return std::exp(log_c_kd(K, Cs, d)); }

namespace detail {

/// C_{K,d} ln^d(x), evaluated in log space; x must exceed 1.
inline double c_ln_pow(double K, double Cs, Index d, double x) {
  if (d == 0) return c_kd(K, Cs, 0);
  return std::exp(log_c_kd(K, Cs, d) + static_cast<double>(d) * std::log(std::log(x)));
}

}  // namespace detail

/// (1/l)(1 + C_{K,d} ln^d(8l/delta)) ln(4(N - r)/delta)
inline double gamma_rrf(const BoundParams& p, double ell, double n_cols) {
  detail::require(ell >= 1, "gamma_rrf: ell must be >= 1");
  detail::require(n_cols > static_cast<double>(p.r), "gamma_rrf: need N > r");
  return (1.0 + detail::c_ln_pow(p.K, p.Cs, p.d, 8.0 * ell / p.delta)) *
         std::log(4.0 * (n_cols - static_cast<double>(p.r)) / p.delta) / ell;
}

/// (1 + 2r(1 + 2 Gamma)) * tail_sq for the range finder.
inline double rrf_bound(const BoundParams& p, double ell, double n_cols, double tail_sq) {
  return (1.0 + 2.0 * static_cast<double>(p.r) * (1.0 + 2.0 * gamma_rrf(p, ell, n_cols))) * tail_sq;
}

/// Two-sided bound for the single-view approximation with sketch sizes
/// (ell_r, ell_l) of an m_rows x n_cols matrix.
inline double single_view_bound(const BoundParams& p, double ell_r, double ell_l, double m_rows, double n_cols,
                                double tail_sq) {
  const double r = static_cast<double>(p.r);
  const double gamma_r =
      (1.0 + detail::c_ln_pow(p.K, p.Cs, p.d, 16.0 * ell_r / p.delta)) * std::log(8.0 * (n_cols - r) / p.delta) / ell_r;
  const double gamma_l = (1.0 + detail::c_ln_pow(p.K, p.Cs, p.d, 16.0 * ell_l / p.delta)) *
                         std::log(8.0 * (m_rows - ell_r) / p.delta) / ell_l;
  return (1.0 + 2.0 * r * (1.0 + 2.0 * gamma_r)) * (1.0 + 2.0 * ell_r * (1.0 + gamma_l)) * tail_sq;
}

enum class BoundVariant { rrf, rrf_q, hosvd, sthosvd, subspace, appendix_a, single_view };

inline const char* to_string(BoundVariant v) {
  switch (v) {
    case BoundVariant::rrf: return "rrf";
    case BoundVariant::rrf_q: return "rrf-Q";
    case BoundVariant::hosvd: return "hosvd";
    case BoundVariant::sthosvd: return "sthosvd";
    case BoundVariant::subspace: return "subspace";
    case BoundVariant::appendix_a: return "appendixA";
    case BoundVariant::single_view: return "single-view";
  }
  return "?";
}

inline std::optional<BoundVariant> parse_bound_variant(const std::string& s) {
  for (auto v : {BoundVariant::rrf, BoundVariant::rrf_q, BoundVariant::hosvd, BoundVariant::sthosvd,
                 BoundVariant::subspace, BoundVariant::appendix_a, BoundVariant::single_view})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

/// One scalar inequality  cap >= ell >= rhs(ell).
struct SampleCondition {
  std::function<double(double)> rhs;
  double cap;
};

struct SampleSize {
  bool feasible = false;
  std::vector<Index> ell;  // one entry; per mode for hosvd/sthosvd; (ell_r, ell_l) for single-view
  std::vector<double> caps;
  std::string diagnostic;
};

namespace detail {

inline constexpr long max_fixed_point_iterations = 1000000;
// doubles represent every integer up to here, so ell - 1 stays distinct
inline constexpr double max_exact_integer = 9007199254740992.0;

struct ScalarSolve {
  bool feasible;
  Index ell;
  std::string diagnostic;
};

/// Smallest integer ell with ell >= rhs(ell), via ell_{k+1} = ceil(rhs(ell_k))
/// from ell_0 = start, then a downward scan. Infeasible once ell exceeds cap.
inline ScalarSolve solve_scalar(const SampleCondition& c, double start) {
  auto ok = [&](double ell) { return ell >= c.rhs(ell); };
  double ell = std::max(1.0, std::ceil(start));
  for (long it = 0;; ++it) {
    if (!std::isfinite(ell)) return {false, 0, "non-finite iterate"};
    if (ell > max_exact_integer) return {false, 0, "required ell exceeds 2^53"};
    if (ell > c.cap) return {false, 0, "required ell exceeds the cap " + std::to_string(static_cast<long long>(c.cap))};
    if (ok(ell)) break;
    if (it >= max_fixed_point_iterations) return {false, 0, "fixed-point iteration did not converge"};
    ell = std::max(ell + 1.0, std::ceil(c.rhs(ell)));
  }
  while (ell > 1.0 && ok(ell - 1.0)) ell -= 1.0;
  return {true, static_cast<Index>(ell), ""};
}

}  // namespace detail

/// The inequality for `variant`. `k` selects the mode (hosvd/sthosvd) or the
/// left/right sketch (single-view: 0 = ell_r, 1 = ell_l); `prior` holds the
/// already-solved sizes it depends on (earlier modes for sthosvd, ell_r for ell_l).
inline SampleCondition sample_condition(const BoundParams& p, BoundVariant variant, Index k = 0,
                                        const std::vector<Index>& prior = {}) {
  p.validate();
  const double r = static_cast<double>(p.r);
  const double delta = p.delta;
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const Index d = p.d;
  const double K = p.K, Cs = p.Cs;
  const double q_matrix = std::min(p.M, p.N);
  switch (variant) {
    case BoundVariant::rrf:
      return {[=](double ell) { return 8.0 * (r + r * detail::c_ln_pow(K, Cs, d, 8.0 * ell / delta)) * std::log(4.0 * r / delta); },
              q_matrix};
    case BoundVariant::rrf_q: {
      detail::require(std::isfinite(q_matrix), "sample_condition: rrf-Q needs finite M and N");
      const double rhs = 8.0 * (r + r * detail::c_ln_pow(K, Cs, d, 8.0 * q_matrix / delta)) * std::log(4.0 * r / delta);
      return {[=](double) { return rhs; }, q_matrix};
    }
    case BoundVariant::subspace:
      return {[=](double ell) {
                return 2.6 * inv_eps2 * (r + r * detail::c_ln_pow(K, Cs, d, 8.0 * ell / delta)) * std::log(4.0 * r / delta);
              },
              p.N};
    case BoundVariant::appendix_a: {
      const double dd = static_cast<double>(d);
      const double ckd = c_kd(K, Cs, d);
      const double alpha =
          8.0 * inv_eps2 * (r + std::pow(2.0, dd) * r * detail::c_ln_pow(K, Cs, d, 8.0 / delta)) * std::log(4.0 * r / delta);
      const double beta = 8.0 * inv_eps2 * r * std::pow(2.0 * dd, dd) * ckd * std::log(4.0 * r / delta);
      return {[=](double ell) { return alpha + beta * std::sqrt(ell); }, q_matrix};
    }
    case BoundVariant::hosvd:
    case BoundVariant::sthosvd: {
      detail::require(static_cast<Index>(p.dims.size()) == d, "sample_condition: dims must have d entries");
      detail::require(k >= 0 && k < d, "sample_condition: mode out of range");
      const double dd = static_cast<double>(d);
      const auto ku = static_cast<std::size_t>(k);
      double others = 1.0;
      if (variant == BoundVariant::hosvd) {
        for (std::size_t j = 0; j < p.dims.size(); ++j)
          if (j != ku) others *= static_cast<double>(p.dims[j]);
      } else {
        detail::require(static_cast<Index>(prior.size()) >= k, "sample_condition: sthosvd needs earlier modes");
        for (std::size_t j = 0; j < ku; ++j) others *= static_cast<double>(prior[j]);
        for (std::size_t j = ku + 1; j < p.dims.size(); ++j) others *= static_cast<double>(p.dims[j]);
      }
      const double cap = std::min(static_cast<double>(p.dims[ku]), others);
      return {[=](double ell) {
                return 8.0 * (r + r * detail::c_ln_pow(K, Cs, d - 1, 8.0 * dd * ell / delta)) * std::log(4.0 * r * dd / delta);
              },
              cap};
    }
    case BoundVariant::single_view: {
      if (k == 0)
        return {[=](double ell) { return r * (1.0 + detail::c_ln_pow(K, Cs, d, 16.0 * ell / delta)) * std::log(8.0 * r / delta); },
                q_matrix};
      detail::require(!prior.empty(), "sample_condition: ell_l needs ell_r");
      const double ell_r = static_cast<double>(prior[0]);
      return {[=](double ell) {
                return ell_r * (1.0 + detail::c_ln_pow(K, Cs, d, 16.0 * ell / delta)) * std::log(8.0 * ell_r / delta);
              },
              q_matrix};
    }
  }
  throw DimensionError("sample_condition: unknown variant");
}

/// Smallest integer sample sizes satisfying the variant's inequality, or
/// infeasible when the cap binds.
inline SampleSize solve_sample_size(const BoundParams& p, BoundVariant variant) {
  p.validate();
  SampleSize out;
  out.feasible = true;
  auto run = [&](Index k) {
    const SampleCondition c = sample_condition(p, variant, k, out.ell);
    out.caps.push_back(c.cap);
    const auto s = detail::solve_scalar(c, c.rhs(static_cast<double>(p.r)));
    if (!s.feasible) {
      out.feasible = false;
      out.diagnostic = s.diagnostic;
      return false;
    }
    out.ell.push_back(s.ell);
    return true;
  };
  Index count = 1;
  if (variant == BoundVariant::hosvd || variant == BoundVariant::sthosvd) count = p.d;
  if (variant == BoundVariant::single_view) count = 2;
  for (Index k = 0; k < count; ++k)
    if (!run(k)) break;
  return out;
}

enum class TuckerVariant { hosvd, sthosvd };

/// sum_i (1 + 2 r_i (1 + 2 Gamma_i)) sum_{j > r_i} sigma_j^2(X_(i)).
/// `singular_values[i]` are those of the mode-i unfolding; `params.d` is
/// ignored in favour of the tensor order.
inline double tucker_bound(const std::vector<Vector>& singular_values, const std::vector<Index>& dims,
                           const std::vector<Index>& ranks, const std::vector<Index>& ells, const BoundParams& params,
                           TuckerVariant variant) {
  const Index d = static_cast<Index>(dims.size());
  detail::require(static_cast<Index>(singular_values.size()) == d && static_cast<Index>(ranks.size()) == d &&
                      static_cast<Index>(ells.size()) == d,
                  "tucker_bound: need one entry per mode");
  const double dd = static_cast<double>(d);
  double total = 0.0;
  for (Index i = 0; i < d; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const Vector& s = singular_values[iu];
    const Index r = ranks[iu];
    const double tail = r < s.size() ? s.tail(s.size() - r).squaredNorm() : 0.0;
    if (tail == 0.0) continue;
    double others = 1.0;
    for (Index j = 0; j < d; ++j) {
      if (j == i) continue;
      const auto ju = static_cast<std::size_t>(j);
      others *= static_cast<double>(variant == TuckerVariant::sthosvd && j < i ? ells[ju] : dims[ju]);
    }
    const double ell = static_cast<double>(ells[iu]);
    const double gamma = (1.0 + detail::c_ln_pow(params.K, params.Cs, d - 1, 8.0 * dd * ell / params.delta)) *
                         std::log(4.0 * dd * (others - static_cast<double>(r)) / params.delta) / ell;
    total += (1.0 + 2.0 * static_cast<double>(r) * (1.0 + 2.0 * gamma)) * tail;
  }
  return total;
}

/// Fraction of trials in which every squared singular value of W^T Omega lies
/// in [(1 - eps) ell, (1 + eps) ell], for one random orthonormal W (N x r) and
/// a fresh KRP Omega over `dims` per trial.
inline double embedding_check(Index r, const std::vector<Index>& dims, Index ell, double eps, Index trials,
                              const SketchConfig& cfg) {
  const Index n = detail::product(dims);
  detail::require(r >= 1 && r <= n, "embedding_check: need 1 <= r <= N");
  detail::require(ell >= r, "embedding_check: need ell >= r");
  detail::require(trials >= 1, "embedding_check: trials must be >= 1");
  detail::require(eps >= 0, "embedding_check: eps must be >= 0");
  SketchConfig wcfg = cfg.with_stream(0x656d6264ULL, 0, cfg.counter);
  wcfg.distribution = Distribution::gaussian;
  wcfg.ledger = nullptr;
  const Matrix w = orth_basis(draw_matrix(n, r, wcfg));
  detail::require(w.cols() == r, "embedding_check: random basis is rank deficient");
  const Matrix wt = w.transpose();
  const double lo = (1.0 - eps) * static_cast<double>(ell);
  const double hi = (1.0 + eps) * static_cast<double>(ell);
  Index hits = 0;
  for (Index t = 0; t < trials; ++t) {
    const KrpSketch omega = draw_krp(dims, ell, cfg.with_stream(cfg.context, cfg.mode, static_cast<std::uint64_t>(t)));
    const Matrix wt_omega = apply_krp(wt, omega);  // r x ell
    const Matrix gram = wt_omega * wt_omega.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const Vector& s2 = eig.eigenvalues();
    if (s2.minCoeff() >= lo && s2.maxCoeff() <= hi) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace krp
