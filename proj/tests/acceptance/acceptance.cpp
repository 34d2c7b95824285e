// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `acceptance 4 6` runs only criteria 4 and 6.

#include "../bound_oracle.hpp"
#include "../oracles.hpp"
#include "krp/block_structured.hpp"
#include "krp/bounds.hpp"
#include "krp/cauchy.hpp"
#include "krp/era.hpp"
#include "krp/hadamard.hpp"
#include "krp/lowrank.hpp"
#include "krp/sensors.hpp"
#include "krp/tucker.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

using krp::DenseTensor;
using krp::Index;
using krp::Matrix;
using krp::SketchConfig;
using krp::TuckerTensor;
using krp::Vector;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

SketchConfig seeded(std::uint64_t seed, krp::RngLedger* ledger = nullptr) {
  SketchConfig c{.seed = seed};
  c.ledger = ledger;
  return c;
}

// 1. structured sketch against dense M * Omega
Outcome structured_sketch_oracle() {
  oracle::Gen g(101);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Index p, q, m, n;
    do {
      p = g.uniform_int(1, 10), q = g.uniform_int(1, 10), m = g.uniform_int(1, 12), n = g.uniform_int(1, 12);
    } while (p * q * m * n > 10000);
    krp::BlockStructuredMatrix a(p, q, m, n);
    for (Index t = g.uniform_int(1, 5); t > 0; --t) {
      krp::Pattern e{p, q, {}};
      for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < q; ++j)
          if (g.uniform(0, 1) < 0.3) e.ones.emplace_back(i, j);
      a.add_term(std::move(e), g.matrix(m, n));
    }
    const auto s = krp::draw_krp({q, n}, g.uniform_int(1, 8), seeded(static_cast<std::uint64_t>(trial)));
    const Matrix dense = krp::materialize_block(a) * oracle::khatri_rao(s.factors);
    if (dense.norm() == 0) continue;
    worst = std::max(worst, oracle::rel_diff(krp::structured_sketch(a, s), dense));
  }
  return {worst <= 1e-12, "max relative error " + fmt("%.3g", worst) + " over 50 instances"};
}

// 2. MTTKRP against an explicit Khatri-Rao product
Outcome mttkrp_oracle() {
  oracle::Gen g(102);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = g.uniform_int(3, 5);
    const std::vector<Index> dims = g.dims(d, 10000, 12);
    const DenseTensor x = g.tensor(dims);
    const Index mode = g.uniform_int(0, d - 1);
    const Index ell = g.uniform_int(1, 8);
    std::vector<Matrix> factors;
    for (Index j = 0; j < d; ++j)
      if (j != mode) factors.push_back(g.matrix(dims[static_cast<std::size_t>(j)], ell));
    worst = std::max(worst, oracle::rel_diff(krp::mttkrp(x, factors, mode), oracle::mttkrp(x, factors, mode)));
  }
  return {worst <= 1e-12, "max relative error " + fmt("%.3g", worst) + " over 50 tensors"};
}

// 3. exact multilinear rank (2,3,2) recovered by every algorithm
Outcome exact_rank_recovery() {
  const std::vector<Index> ranks{2, 3, 2};
  double worst = 0.0;
  std::string worst_alg;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    oracle::Gen g(200 + seed);
    const DenseTensor x = oracle::low_multilinear_rank(g, {15, 15, 15}, ranks);
    const krp::RankSpec spec{ranks, 0};
    const SketchConfig cfg = seeded(seed);
    const std::vector<std::pair<std::string, TuckerTensor>> runs{
        {"hosvd", krp::hosvd(x, ranks)},
        {"sthosvd", krp::sthosvd(x, ranks)},
        {"rhosvd-krp", krp::rhosvd_krp(x, spec, cfg)},
        {"rhosvd-krp-memo", krp::rhosvd_krp(x, spec, cfg, true)},
        {"rsthosvd-krp", krp::rsthosvd_krp(x, spec, cfg)},
        {"rhosvd-gauss", krp::rhosvd_gaussian(x, spec, cfg)},
        {"rsthosvd-gauss", krp::rsthosvd_gaussian(x, spec, cfg)}};
    for (const auto& [name, t] : runs) {
      const double e = krp::tucker_error(x, t);
      if (e >= worst) {
        worst = e;
        worst_alg = name;
      }
    }
  }
  return {worst <= 1e-8, "worst relative error " + fmt("%.3g", worst) + " (" + worst_alg + ") over 7 algorithms x 10 seeds"};
}

// 4. Cauchy tensor, KRP vs Gaussian error parity
Outcome cauchy_parity() {
  const DenseTensor x = krp::cauchy_tensor(40, 4, 2.0);
  bool ok = true;
  std::ostringstream detail;
  double floor_gap = std::numeric_limits<double>::infinity();
  for (Index r : {5, 10, 15}) {
    const std::vector<Index> ranks(4, r);
    const krp::RankSpec spec{ranks, 0};
    // the Gram path has a sqrt(eps) accuracy floor that the sketches undercut at r=15
    const double hosvd_err = krp::tucker_error(x, krp::hosvd(x, ranks, krp::FactorMethod::svd));
    std::vector<double> krp_fresh, krp_memo, krp_st, gauss, gauss_st;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SketchConfig cfg = seeded(seed);
      krp_fresh.push_back(krp::tucker_error(x, krp::rhosvd_krp(x, spec, cfg)));
      krp_memo.push_back(krp::tucker_error(x, krp::rhosvd_krp(x, spec, cfg, true)));
      krp_st.push_back(krp::tucker_error(x, krp::rsthosvd_krp(x, spec, cfg)));
      gauss.push_back(krp::tucker_error(x, krp::rhosvd_gaussian(x, spec, cfg)));
      gauss_st.push_back(krp::tucker_error(x, krp::rsthosvd_gaussian(x, spec, cfg)));
    }
    for (const auto* v : {&krp_fresh, &krp_memo, &krp_st, &gauss, &gauss_st})
      for (double e : *v) floor_gap = std::min(floor_gap, e - hosvd_err);
    const double ratio_fresh = median(krp_fresh) / median(gauss);
    const double ratio_memo = median(krp_memo) / median(gauss);
    const double ratio_st = median(krp_st) / median(gauss_st);
    ok = ok && ratio_fresh <= 1.5 && ratio_memo <= 1.5 && ratio_st <= 1.5;
    detail << "r=" << r << " ratios " << fmt("%.3f", ratio_fresh) << "/" << fmt("%.3f", ratio_memo) << "/"
           << fmt("%.3f", ratio_st) << "; ";
  }
  ok = ok && floor_gap >= -1e-12;
  detail << "min(err - hosvd err) " << fmt("%.3g", floor_gap);
  return {ok, detail.str()};
}

// 5. 0.95-quantile of the range-finder residual against the theorem bound
Outcome quantile_sanity() {
  oracle::Gen g(105);
  const Index n = 64, r = 5, ell = 25;
  Vector s(n);
  for (Index j = 0; j < n; ++j) s(j) = std::pow(0.5, static_cast<double>(j));
  const Matrix m = g.orthonormal(n, n) * s.asDiagonal() * g.orthonormal(n, n).transpose();
  std::vector<double> errs;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const krp::SketchSpec spec{krp::SketchKind::krp, {8, 8}, seeded(seed)};
    const Matrix q = krp::orth_basis(krp::sketch_right(m, ell, spec));
    errs.push_back((m - q * (q.transpose() * m)).squaredNorm());
  }
  std::sort(errs.begin(), errs.end());
  const double q95 = errs[static_cast<std::size_t>(0.95 * 199)];
  krp::BoundParams p;
  p.r = r;
  p.d = 2;
  p.delta = 0.05;
  const double bound = krp::rrf_bound(p, ell, static_cast<double>(n), s.tail(n - r).squaredNorm());
  return {q95 <= bound, "q95 " + fmt("%.3g", q95) + ", bound " + fmt("%.3g", bound) + ", bound/empirical ratio " +
                            fmt("%.3g", bound / q95)};
}

// 6. ERA at desk scale
Outcome era_desk() {
  const Index order = 5, m = 6, n = 4, s = 25, rho = 20;
  const krp::EraSystem sys = krp::random_stable_system(order, m, n, seeded(106));
  const krp::MarkovSequence seq = krp::simulate_markov(sys.A, sys.B, sys.C, sys.D, s);
  const auto truth = krp::eigenvalues(sys.A);

  const auto dense = krp::era_identify(seq, order, 0, krp::EraMethod::dense_svd);
  const double h_dense = krp::hausdorff_eigs(krp::eigenvalues(dense.system.A), truth);

  std::vector<double> h_krp;
  std::uint64_t ledger_krp = 0, ledger_gauss = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    krp::RngLedger lk, lg;
    const auto res = krp::era_identify(seq, order, rho, krp::EraMethod::krp_single_view, seeded(seed, &lk));
    h_krp.push_back(krp::hausdorff_eigs(krp::eigenvalues(res.system.A), truth));
    krp::era_identify(seq, order, rho, krp::EraMethod::gaussian_single_view, seeded(seed, &lg));
    ledger_krp = lk.total();
    ledger_gauss = lg.total();
  }
  const double share = static_cast<double>(ledger_krp) / static_cast<double>(ledger_gauss);
  const bool ok = h_dense <= 1e-8 && median(h_krp) <= 1e-6 && share < 0.10;
  return {ok, "dense Hausdorff " + fmt("%.3g", h_dense) + ", KRP median Hausdorff " + fmt("%.3g", median(h_krp)) +
                  ", RNG ledger KRP " + std::to_string(ledger_krp) + " vs Gaussian " + std::to_string(ledger_gauss) +
                  " (" + fmt("%.1f", 100 * share) + "%, required < 10%)"};
}

// 7. sensor placement on exact-rank synthetic snapshots
Outcome sensor_placement() {
  const krp::SyntheticFlow flow = krp::synthetic_flow({24, 18, 12}, {3, 3, 3}, 40, 5, seeded(107));
  const krp::SensorModel model = krp::train_sensors(flow.snapshots, {3, 3, 3});
  const DenseTensor rec = krp::reconstruct_field(model, krp::measure(flow.held_out, model));
  const double err = oracle::rel_diff(rec, flow.held_out);
  double interp = 0.0;
  for (std::size_t i = 0; i < model.factors.size(); ++i) {
    const Matrix& a = model.factors[i];
    Matrix pa(a.cols(), a.cols());
    for (Index k = 0; k < a.cols(); ++k) pa.row(k) = a.row(model.indices[i][static_cast<std::size_t>(k)]);
    interp = std::max(interp, (pa - Matrix::Identity(a.cols(), a.cols())).norm());
  }
  return {err <= 1e-8 && interp <= 1e-10,
          "held-out relative error " + fmt("%.3g", err) + ", max ||P^T A - I|| " + fmt("%.3g", interp)};
}

// 8. Hadamard recompression of a Tucker pair
Outcome hadamard_recompression() {
  oracle::Gen g(108);
  auto random_tucker = [&]() {
    TuckerTensor t;
    t.core = g.tensor({3, 3, 3});
    for (int i = 0; i < 3; ++i) t.factors.push_back(g.matrix(12, 3));
    t.orthonormal.assign(3, false);
    return t;
  };
  const TuckerTensor x = random_tucker(), y = random_tucker();
  const DenseTensor dense = krp::hadamard(x.reconstruct(), y.reconstruct());
  const SketchConfig cfg = seeded(8);
  const TuckerTensor h = krp::hadamard_recompress(x, y, {9, 9, 9}, 2, cfg);
  const double err = krp::tucker_error(dense, h);
  const double ref = krp::tucker_error(dense, krp::hosvd(dense, {9, 9, 9}));
  const auto omegas = krp::hadamard_sketch_factors(x.dims(), 0, 11, cfg);
  const double sketch_diff =
      oracle::rel_diff(krp::hadamard_mode_sketch(x, y, 0, omegas), oracle::mttkrp(dense, omegas, 0));
  const bool ok = err <= 1.5 * ref && sketch_diff <= 1e-11;
  return {ok, "error " + fmt("%.3g", err) + " vs dense HOSVD " + fmt("%.3g", ref) + " (ratio " +
                  fmt("%.3g", ref > 0 ? err / ref : 0.0) + "), mode-1 sketch difference " + fmt("%.3g", sketch_diff)};
}

// 9. RNG ledger counts
Outcome rng_accounting() {
  const Index n = 20, d = 4, ell = 7;
  oracle::Gen g(109);
  const DenseTensor x = g.tensor(std::vector<Index>(d, n));
  const krp::RankSpec spec{std::vector<Index>(d, ell), 0};
  auto count = [&](auto&& run) {
    krp::RngLedger ledger;
    run(seeded(9, &ledger));
    return ledger.total();
  };
  const std::uint64_t gauss = count([&](const SketchConfig& c) { krp::rhosvd_gaussian(x, spec, c); });
  const std::uint64_t fresh = count([&](const SketchConfig& c) { krp::rhosvd_krp(x, spec, c); });
  const std::uint64_t memo = count([&](const SketchConfig& c) { krp::rhosvd_krp(x, spec, c, true); });
  const std::uint64_t st = count([&](const SketchConfig& c) { krp::rsthosvd_krp(x, spec, c); });
  std::uint64_t st_expected = 0;
  for (Index i = 1; i <= d; ++i) st_expected += static_cast<std::uint64_t>((d - i) * n * ell + (i - 1) * ell * ell);
  const bool ok = gauss == 224000 && fresh == 1680 && memo == 420 && st == st_expected;
  return {ok, "gaussian " + std::to_string(gauss) + "/224000, krp " + std::to_string(fresh) + "/1680, memoized " +
                  std::to_string(memo) + "/420, rsthosvd-krp " + std::to_string(st) + "/" + std::to_string(st_expected)};
}

// 10. empirical subspace embedding
Outcome subspace_embedding() {
  const double freq = krp::embedding_check(4, {16, 16}, 2000, 0.5, 200, seeded(110));
  return {freq >= 0.95, "frequency " + fmt("%.3f", freq) + " over 200 trials"};
}

// 11. bound-solver contract against the independent long-double evaluator
Outcome bound_solver_contract() {
  using krp::BoundVariant;
  using bound_oracle::Real;
  const std::vector<BoundVariant> variants{BoundVariant::rrf,     BoundVariant::rrf_q,    BoundVariant::hosvd,
                                           BoundVariant::sthosvd, BoundVariant::subspace, BoundVariant::appendix_a,
                                           BoundVariant::single_view};
  oracle::Gen g(111);
  int violations = 0, feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 30; ++trial) {
    krp::BoundParams p;
    p.r = g.uniform_int(1, 8);
    p.d = g.uniform_int(1, 4);
    p.delta = std::exp(g.uniform(std::log(1e-4), std::log(0.5)));
    p.eps = g.uniform(0.1, 0.9);
    p.K = g.uniform(1, 2);
    p.Cs = g.uniform(0.5, 1.5);
    p.M = std::floor(std::exp(g.uniform(std::log(1e3), std::log(1e18))));
    p.N = std::floor(std::exp(g.uniform(std::log(1e3), std::log(1e18))));
    for (Index j = 0; j < p.d; ++j) p.dims.push_back(static_cast<Index>(std::exp(g.uniform(std::log(2.0), std::log(1e15)))));
    const BoundVariant v = variants[static_cast<std::size_t>(trial) % variants.size()];
    const krp::SampleSize s = krp::solve_sample_size(p, v);
    for (std::size_t k = 0; k < s.ell.size(); ++k) {
      const Real ell = s.ell[k];
      const Index ki = static_cast<Index>(k);
      if (ell < bound_oracle::rhs(p, v, ell, ki, s.ell)) ++violations;
      if (ell > bound_oracle::cap(p, v, ki, s.ell)) ++violations;
      if (ell > 1 && ell - 1 >= bound_oracle::rhs(p, v, ell - 1, ki, s.ell)) ++violations;
    }
    if (s.feasible) {
      ++feasible;
    } else {
      ++infeasible;
      const Index k = static_cast<Index>(s.ell.size());
      const Real c = std::floor(bound_oracle::cap(p, v, k, s.ell));
      if (c >= bound_oracle::rhs(p, v, c, k, s.ell)) ++violations;  // cap does not bind
    }
  }
  return {violations == 0, std::to_string(feasible) + " feasible, " + std::to_string(infeasible) +
                               " infeasible (cap binds), " + std::to_string(violations) + " contract violations"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "structured sketch equals dense sketch", 10, structured_sketch_oracle},
      {2, "mttkrp equals explicit Khatri-Rao multiply", 10, mttkrp_oracle},
      {3, "exact multilinear rank recovery", 30, exact_rank_recovery},
      {4, "Cauchy tensor KRP/Gaussian error parity", 300, cauchy_parity},
      {5, "range-finder quantile below theorem bound", 60, quantile_sanity},
      {6, "ERA at desk scale", 60, era_desk},
      {7, "sensor placement reconstruction", 30, sensor_placement},
      {8, "Hadamard Tucker recompression", 30, hadamard_recompression},
      {9, "RNG ledger accounting", 30, rng_accounting},
      {10, "empirical subspace embedding", 120, subspace_embedding},
      {11, "bound-solver contract", 10, bound_solver_contract},
  };
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s  #%-2d %s (%.2f s, limit %.0f s%s): %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.limit_seconds, in_time ? "" : ", EXCEEDED", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
