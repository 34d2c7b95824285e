// krp_cli: command-line front end for the sketching, Tucker, ERA, sensor and
// bound routines. Exit codes: 0 success, 2 usage, 3 I/O, 4 infeasible.

#include "krp/bounds.hpp"
#include "krp/cauchy.hpp"
#include "krp/era.hpp"
#include "krp/hadamard.hpp"
#include "krp/io.hpp"
#include "krp/report.hpp"
#include "krp/sensors.hpp"
#include "krp/tucker.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

namespace {

using krp::Index;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<Index> parse_list(const std::string& text, const std::string& flag) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not an integer");
    }
    if (used != item.size()) throw UsageError(flag + ": '" + item + "' is not an integer");
    out.push_back(static_cast<Index>(v));
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

// comma-separated per mode; a single value broadcasts to all d modes
std::vector<Index> parse_ranks(const std::string& text, Index d) {
  std::vector<Index> r = parse_list(text, "--ranks");
  if (r.size() == 1) r.assign(static_cast<std::size_t>(d), r.front());
  if (static_cast<Index>(r.size()) != d)
    throw UsageError("--ranks: expected 1 or " + std::to_string(d) + " values, got " + std::to_string(r.size()));
  return r;
}

krp::Distribution parse_dist(const std::string& s) {
  if (s == "gaussian") return krp::Distribution::gaussian;
  if (s == "rademacher") return krp::Distribution::rademacher;
  throw UsageError("--dist must be gaussian or rademacher");
}

struct Common {
  std::uint64_t seed = 0;
  std::string dist = "gaussian";
  std::string report;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "RNG seed");
  sub->add_option("--dist", c.dist, "gaussian | rademacher");
  sub->add_option("--report", c.report, "CSV report path (JSON sidecar at <path>.json)");
}

void emit(const krp::RunReport& report, const std::string& path) {
  report.validate();
  std::cout << krp::RunReport::csv_header() << "\n" << report.csv_row() << "\n";
  if (!path.empty()) krp::write_report(path, report);
}

krp::TuckerTensor run_tucker(const std::string& name, const krp::DenseTensor& x, const std::vector<Index>& ranks,
                             Index oversample, const krp::SketchConfig& cfg) {
  const krp::RankSpec spec{ranks, oversample};
  if (name == "hosvd") return krp::hosvd(x, ranks);
  if (name == "sthosvd") return krp::sthosvd(x, ranks);
  if (name == "rhosvd-krp") return krp::rhosvd_krp(x, spec, cfg);
  if (name == "rhosvd-krp-memo") return krp::rhosvd_krp(x, spec, cfg, true);
  if (name == "rsthosvd-krp") return krp::rsthosvd_krp(x, spec, cfg);
  if (name == "rhosvd-gauss") return krp::rhosvd_gaussian(x, spec, cfg);
  if (name == "rsthosvd-gauss") return krp::rsthosvd_gaussian(x, spec, cfg);
  throw UsageError("unknown algorithm " + name);
}

double markov_residual(const krp::EraSystem& sys, const krp::MarkovSequence& seq, std::vector<double>& per_k) {
  double worst = 0.0;
  krp::Matrix ak = krp::Matrix::Identity(sys.order(), sys.order());
  for (std::size_t k = 1; k < seq.blocks.size(); ++k) {
    const double nh = seq.blocks[k].norm();
    const double res = (sys.C * ak * sys.B - seq.blocks[k]).norm() / (nh > 0 ? nh : 1.0);
    per_k.push_back(res);
    worst = std::max(worst, res);
    ak = sys.A * ak;
  }
  return worst;
}

std::filesystem::path sibling(const std::filesystem::path& base, const std::string& suffix) {
  return base.string() + suffix;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Khatri-Rao sketching toolkit"};
  app.require_subcommand(1);
  std::function<void()> action;

  // gen-cauchy
  struct {
    Index n = 0, d = 0;
    double alpha = 2.0;
    std::string out;
  } cauchy;
  auto* gen_cauchy = app.add_subcommand("gen-cauchy", "write the Cauchy tensor (sum_k i_k^alpha)^(-1/alpha)");
  gen_cauchy->add_option("--n", cauchy.n, "mode size")->required();
  gen_cauchy->add_option("--d", cauchy.d, "order")->required();
  gen_cauchy->add_option("--alpha", cauchy.alpha, "exponent");
  gen_cauchy->add_option("--out", cauchy.out, "output tensor file")->required();
  gen_cauchy->callback([&] {
    action = [&] { krp::write_tensor(cauchy.out, krp::cauchy_tensor(cauchy.n, cauchy.d, cauchy.alpha)); };
  });

  // Tucker algorithms
  struct {
    std::string in, ranks, out;
    Index oversample = 0;
    Common common;
  } tucker;
  for (const std::string name :
       {"hosvd", "sthosvd", "rhosvd-krp", "rhosvd-krp-memo", "rsthosvd-krp", "rhosvd-gauss", "rsthosvd-gauss"}) {
    auto* sub = app.add_subcommand(name, "Tucker compression with " + name);
    sub->add_option("--in", tucker.in, "input tensor file")->required();
    sub->add_option("--ranks", tucker.ranks, "ranks per mode, comma-separated; one value broadcasts")->required();
    sub->add_option("--oversample", tucker.oversample, "oversampling p (randomized variants)");
    sub->add_option("--out", tucker.out, "output Tucker file");
    add_common(sub, tucker.common);
    sub->callback([&, name] {
      action = [&, name] {
        const krp::DenseTensor x = krp::read_tensor(tucker.in);
        const std::vector<Index> ranks = parse_ranks(tucker.ranks, x.order());
        krp::RngLedger ledger;
        krp::FlopCounter flops;
        krp::SketchConfig cfg{.distribution = parse_dist(tucker.common.dist), .seed = tucker.common.seed};
        cfg.ledger = &ledger;
        const krp::Stopwatch clock;
        krp::TuckerTensor t;
        {
          const krp::FlopScope scope(flops);
          t = run_tucker(name, x, ranks, tucker.oversample, cfg);
        }
        const double elapsed = clock.seconds();
        krp::RunReport r{name,        ranks,          tucker.common.seed, krp::tucker_error(x, t),
                         flops.madds, ledger.total(), elapsed,            {},
                         {}};
        r.metrics.emplace_back("oversample", static_cast<double>(tucker.oversample));
        r.notes.emplace_back("dims", krp::join_indices(x.dims(), ','));
        r.notes.emplace_back("output_ranks", krp::join_indices(t.ranks(), ','));
        r.notes.emplace_back("distribution", tucker.common.dist);
        if (!tucker.out.empty()) krp::write_tucker(tucker.out, t);
        emit(r, tucker.common.report);
      };
    });
  }

  // gen-markov
  struct {
    Index order = 4, m = 3, n = 2, s = 12;
    std::uint64_t seed = 0;
    std::string out, true_a;
  } gmarkov;
  auto* gen_markov = app.add_subcommand("gen-markov", "write Markov parameters of a random stable system");
  gen_markov->add_option("--order", gmarkov.order, "state dimension");
  gen_markov->add_option("--m", gmarkov.m, "outputs");
  gen_markov->add_option("--n", gmarkov.n, "inputs");
  gen_markov->add_option("--s", gmarkov.s, "horizon; 2s blocks are written");
  gen_markov->add_option("--seed", gmarkov.seed, "RNG seed");
  gen_markov->add_option("--out", gmarkov.out, "output m x n x 2s tensor")->required();
  gen_markov->add_option("--true-a", gmarkov.true_a, "also write the state matrix A");
  gen_markov->callback([&] {
    action = [&] {
      const krp::EraSystem sys =
          krp::random_stable_system(gmarkov.order, gmarkov.m, gmarkov.n, krp::SketchConfig{.seed = gmarkov.seed});
      krp::write_tensor(gmarkov.out, krp::markov_to_tensor(krp::simulate_markov(sys.A, sys.B, sys.C, sys.D, gmarkov.s)));
      if (!gmarkov.true_a.empty()) krp::write_matrix(gmarkov.true_a, sys.A);
    };
  });

  // era
  struct {
    std::string in, method = "krp-single-view", out_prefix, true_a;
    Index r = 0, oversample = 0;
    Common common;
  } era;
  auto* era_cmd = app.add_subcommand("era", "eigensystem realization from Markov parameters");
  era_cmd->add_option("--markov-in", era.in, "m x n x 2s Markov tensor")->required();
  era_cmd->add_option("--r", era.r, "realized order")->required();
  era_cmd->add_option("--oversample", era.oversample, "oversampling rho; ell_r = r + rho, ell_l = ceil(1.5 ell_r)");
  era_cmd->add_option("--method", era.method, "krp-single-view | gaussian-single-view | dense-svd");
  era_cmd->add_option("--out-prefix", era.out_prefix, "write <prefix>.A/.B/.C/.D.kten and <prefix>.json");
  era_cmd->add_option("--true-a", era.true_a, "reference A for the Hausdorff eigenvalue distance");
  add_common(era_cmd, era.common);
  era_cmd->callback([&] {
    action = [&] {
      const auto method = krp::parse_era_method(era.method);
      if (!method) throw UsageError("--method: unknown ERA method " + era.method);
      const krp::MarkovSequence seq = krp::markov_from_tensor(krp::read_tensor(era.in));
      std::optional<krp::Matrix> true_a;
      if (!era.true_a.empty()) true_a = krp::read_matrix(era.true_a);
      krp::RngLedger ledger;
      krp::FlopCounter flops;
      krp::SketchConfig cfg{.distribution = parse_dist(era.common.dist), .seed = era.common.seed};
      cfg.ledger = &ledger;
      const krp::Stopwatch clock;
      krp::EraResult res;
      {
        const krp::FlopScope scope(flops);
        res = krp::era_identify(seq, era.r, era.oversample, *method, cfg);
      }
      const double elapsed = clock.seconds();
      std::vector<double> per_k;
      const double residual = markov_residual(res.system, seq, per_k);
      krp::RunReport r{std::string("era-") + krp::to_string(*method), {era.r}, era.common.seed, residual,
                       flops.madds, ledger.total(), elapsed, {}, {}};
      r.metrics.emplace_back("oversample", static_cast<double>(era.oversample));
      r.metrics.emplace_back("sigma_1", res.singular_values(0));
      r.metrics.emplace_back("sigma_r", res.singular_values(era.r - 1));
      if (true_a)
        r.metrics.emplace_back("hausdorff",
                               krp::hausdorff_eigs(krp::eigenvalues(res.system.A), krp::eigenvalues(*true_a)));
      for (std::size_t k = 0; k < res.warnings.size(); ++k)
        r.notes.emplace_back("warning_" + std::to_string(k), res.warnings[k]);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
      if (!era.out_prefix.empty()) {
        krp::write_matrix(sibling(era.out_prefix, ".A.kten"), res.system.A);
        krp::write_matrix(sibling(era.out_prefix, ".B.kten"), res.system.B);
        krp::write_matrix(sibling(era.out_prefix, ".C.kten"), res.system.C);
        krp::write_matrix(sibling(era.out_prefix, ".D.kten"), res.system.D);
        nlohmann::ordered_json diag = r.to_json();
        diag["markov_residuals"] = per_k;
        diag["singular_values"] = std::vector<double>(res.singular_values.data(),
                                                      res.singular_values.data() + res.singular_values.size());
        nlohmann::ordered_json streams = nlohmann::ordered_json::array();
        for (const auto& [key, count] : ledger.streams())
          streams.push_back({{"context", key.first}, {"mode", key.second}, {"scalars", count}});
        diag["rng_streams"] = streams;
        krp::write_file_atomic(sibling(era.out_prefix, ".json"), diag.dump(2) + "\n");
      }
      emit(r, era.common.report);
    };
  });

  // sensors
  auto* sensors = app.add_subcommand("sensors", "sensor placement and field reconstruction");
  sensors->require_subcommand(1);
  struct {
    std::string in, ranks, compressor = "hosvd", model;
    Common common;
  } train;
  auto* train_cmd = sensors->add_subcommand("train", "choose sensors from N_1 x ... x N_d x T snapshots");
  train_cmd->add_option("--in", train.in, "snapshot tensor, last mode = time")->required();
  train_cmd->add_option("--ranks", train.ranks, "sensors per spatial mode; one value broadcasts")->required();
  train_cmd->add_option("--compressor", train.compressor, "hosvd | sthosvd | rhosvd-krp | rsthosvd-krp");
  train_cmd->add_option("--model", train.model, "output model manifest (JSON); factors go to <model>.a<i>.kten")
      ->required();
  add_common(train_cmd, train.common);
  train_cmd->callback([&] {
    action = [&] {
      const auto compressor = krp::parse_sensor_compressor(train.compressor);
      if (!compressor) throw UsageError("--compressor: unknown compressor " + train.compressor);
      const krp::DenseTensor snaps = krp::read_tensor(train.in);
      if (snaps.order() < 2) throw UsageError("--in: snapshots need a spatial mode and a time mode");
      const std::vector<Index> ranks = parse_ranks(train.ranks, snaps.order() - 1);
      krp::RngLedger ledger;
      krp::FlopCounter flops;
      krp::SketchConfig cfg{.distribution = parse_dist(train.common.dist), .seed = train.common.seed};
      cfg.ledger = &ledger;
      const krp::Stopwatch clock;
      krp::SensorModel model;
      {
        const krp::FlopScope scope(flops);
        model = krp::train_sensors(snaps, ranks, *compressor, cfg);
      }
      const double elapsed = clock.seconds();
      const double err = krp::fro_norm(snaps) > 0
                             ? krp::fro_norm(snaps - krp::reconstruct_field(model, krp::measure(snaps, model))) /
                                   krp::fro_norm(snaps)
                             : 0.0;
      nlohmann::ordered_json manifest;
      manifest["format"] = "krp-sensor-model";
      manifest["version"] = 1;
      manifest["dims"] = model.dims();
      manifest["indices"] = model.indices;
      std::vector<std::string> files;
      for (Index i = 0; i < model.order(); ++i) {
        const std::filesystem::path f = sibling(train.model, ".a" + std::to_string(i) + ".kten");
        krp::write_matrix(f, model.factors[static_cast<std::size_t>(i)]);
        files.push_back(f.filename().string());
      }
      manifest["factors"] = files;
      krp::write_file_atomic(train.model, manifest.dump(2) + "\n");
      krp::RunReport r{"sensors-train-" + train.compressor, ranks, train.common.seed, err, flops.madds, ledger.total(),
                       elapsed, {}, {}};
      emit(r, train.common.report);
    };
  });

  struct {
    std::string model, in, out, report;
    bool measured = false;
  } recon;
  auto* recon_cmd = sensors->add_subcommand("reconstruct", "lift sensor readings to a full field");
  recon_cmd->add_option("--model", recon.model, "model manifest from 'sensors train'")->required();
  recon_cmd->add_option("--in", recon.in, "full field (sampled at the sensors) or, with --measured, readings")
      ->required();
  recon_cmd->add_flag("--measured", recon.measured, "input already holds the l_1 x ... x l_d sensor readings");
  recon_cmd->add_option("--out", recon.out, "output field");
  recon_cmd->add_option("--report", recon.report, "CSV report path");
  recon_cmd->callback([&] {
    action = [&] {
      krp::SensorModel model;
      nlohmann::json manifest;
      try {
        manifest = nlohmann::json::parse(krp::read_file(recon.model));
        model.indices = manifest.at("indices").get<std::vector<std::vector<Index>>>();
        const std::filesystem::path dir = std::filesystem::path(recon.model).parent_path();
        for (const auto& f : manifest.at("factors")) model.factors.push_back(krp::read_matrix(dir / f.get<std::string>()));
      } catch (const nlohmann::json::exception& e) {
        throw krp::IoError(recon.model + ": malformed model manifest: " + e.what());
      }
      try {
        model.validate();
      } catch (const krp::DimensionError& e) {
        throw krp::IoError(recon.model + ": " + e.what());
      }
      const krp::DenseTensor input = krp::read_tensor(recon.in);
      krp::FlopCounter flops;
      const krp::Stopwatch clock;
      krp::DenseTensor readings, field;
      {
        const krp::FlopScope scope(flops);
        readings = recon.measured ? input : krp::measure(input, model);
        field = krp::reconstruct_field(model, readings);
      }
      const double elapsed = clock.seconds();
      // full input: error against it; readings only: interpolation residual at the sensors
      const krp::DenseTensor& ref = recon.measured ? readings : input;
      const krp::DenseTensor cmp = recon.measured ? krp::measure(field, model) : field;
      const double nref = krp::fro_norm(ref);
      const double err = nref > 0 ? krp::fro_norm(cmp - ref) / nref : 0.0;
      if (!recon.out.empty()) krp::write_tensor(recon.out, field);
      krp::RunReport r{"sensors-reconstruct", model.sensor_counts(), 0, err, flops.madds, 0, elapsed, {}, {}};
      r.notes.emplace_back("error_reference", recon.measured ? "sensor readings" : "input field");
      emit(r, recon.report);
    };
  });

  // hadamard-recompress
  struct {
    std::string x, y, ranks, out;
    Index oversample = 0;
    bool no_check = false;
    Common common;
  } had;
  auto* had_cmd = app.add_subcommand("hadamard-recompress", "randomized Tucker recompression of x .* y (order 3)");
  had_cmd->add_option("--x", had.x, "first Tucker file")->required();
  had_cmd->add_option("--y", had.y, "second Tucker file")->required();
  had_cmd->add_option("--ranks", had.ranks, "target ranks; one value broadcasts")->required();
  had_cmd->add_option("--oversample", had.oversample, "oversampling p; output ranks are at most ranks + p");
  had_cmd->add_option("--out", had.out, "output Tucker file");
  had_cmd->add_flag("--no-check", had.no_check, "skip the dense error check (relative_error reported as -1)");
  add_common(had_cmd, had.common);
  had_cmd->callback([&] {
    action = [&] {
      const krp::TuckerTensor x = krp::read_tucker(had.x);
      const krp::TuckerTensor y = krp::read_tucker(had.y);
      const std::vector<Index> ranks = parse_ranks(had.ranks, x.order());
      krp::RngLedger ledger;
      krp::FlopCounter flops;
      krp::SketchConfig cfg{.distribution = parse_dist(had.common.dist), .seed = had.common.seed};
      cfg.ledger = &ledger;
      const krp::Stopwatch clock;
      krp::TuckerTensor h;
      {
        const krp::FlopScope scope(flops);
        h = krp::hadamard_recompress(x, y, ranks, had.oversample, cfg);
      }
      const double elapsed = clock.seconds();
      const double err = had.no_check ? -1.0 : krp::tucker_error(krp::hadamard_materialize(x, y), h);
      if (!had.out.empty()) krp::write_tucker(had.out, h);
      krp::RunReport r{"hadamard-recompress", ranks, had.common.seed, err, flops.madds, ledger.total(), elapsed, {}, {}};
      r.metrics.emplace_back("oversample", static_cast<double>(had.oversample));
      r.notes.emplace_back("output_ranks", krp::join_indices(h.ranks(), ','));
      emit(r, had.common.report);
    };
  });

  // bounds
  struct {
    std::string variant, dims;
    krp::BoundParams p;
    std::string out;
  } bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "smallest sample size satisfying a theorem's inequality");
  bounds_cmd->add_option("--variant", bounds.variant, "rrf | rrf-Q | hosvd | sthosvd | subspace | appendixA | single-view")
      ->required();
  bounds_cmd->add_option("--r", bounds.p.r, "target rank");
  bounds_cmd->add_option("--d", bounds.p.d, "number of KRP factors (tensor order for hosvd/sthosvd)");
  bounds_cmd->add_option("--delta", bounds.p.delta, "failure probability");
  bounds_cmd->add_option("--eps", bounds.p.eps, "embedding distortion");
  bounds_cmd->add_option("--K", bounds.p.K, "subgaussian norm bound");
  bounds_cmd->add_option("--Cs", bounds.p.Cs, "absolute constant C_S (uncalibrated)");
  bounds_cmd->add_option("--M", bounds.p.M, "matrix rows (default unbounded)");
  bounds_cmd->add_option("--N", bounds.p.N, "matrix columns (default unbounded)");
  bounds_cmd->add_option("--dims", bounds.dims, "tensor mode sizes, comma-separated (hosvd/sthosvd)");
  bounds_cmd->add_option("--out", bounds.out, "also write the CSV here");
  bounds_cmd->callback([&] {
    action = [&] {
      const auto variant = krp::parse_bound_variant(bounds.variant);
      if (!variant) throw UsageError("--variant: unknown variant " + bounds.variant);
      if (!bounds.dims.empty()) bounds.p.dims = parse_list(bounds.dims, "--dims");
      const krp::SampleSize s = krp::solve_sample_size(bounds.p, *variant);
      std::string caps;
      for (std::size_t k = 0; k < s.caps.size(); ++k) caps += (k ? ";" : "") + krp::format_double(s.caps[k]);
      const std::string csv =
          "variant,r,d,delta,eps,K,Cs,feasible,ell,caps,cs_status,diagnostic\n" + bounds.variant + "," +
          std::to_string(bounds.p.r) + "," + std::to_string(bounds.p.d) + "," + krp::format_double(bounds.p.delta) + "," +
          krp::format_double(bounds.p.eps) + "," + krp::format_double(bounds.p.K) + "," +
          krp::format_double(bounds.p.Cs) + "," + (s.feasible ? "1" : "0") + "," + krp::join_indices(s.ell) + "," +
          caps + ",uncalibrated," + s.diagnostic + "\n";
      std::cout << csv;
      if (!bounds.out.empty()) krp::write_file_atomic(bounds.out, csv);
      if (!s.feasible) throw krp::InfeasibleError("bounds: " + s.diagnostic);
    };
  });

  // embed-check
  struct {
    Index r = 1, ell = 1, trials = 200;
    double eps = 0.5;
    std::string dims;
    std::uint64_t seed = 0;
    std::string dist = "gaussian";
  } embed;
  auto* embed_cmd = app.add_subcommand("embed-check", "Monte-Carlo subspace-embedding frequency of a KRP sketch");
  embed_cmd->add_option("--r", embed.r, "subspace dimension");
  embed_cmd->add_option("--dims", embed.dims, "KRP factor sizes, comma-separated")->required();
  embed_cmd->add_option("--ell", embed.ell, "sketch size")->required();
  embed_cmd->add_option("--eps", embed.eps, "distortion");
  embed_cmd->add_option("--trials", embed.trials, "number of sketches");
  embed_cmd->add_option("--seed", embed.seed, "RNG seed");
  embed_cmd->add_option("--dist", embed.dist, "gaussian | rademacher");
  embed_cmd->callback([&] {
    action = [&] {
      const std::vector<Index> dims = parse_list(embed.dims, "--dims");
      const krp::SketchConfig cfg{.distribution = parse_dist(embed.dist), .seed = embed.seed};
      const double freq = krp::embedding_check(embed.r, dims, embed.ell, embed.eps, embed.trials, cfg);
      std::cout << "r,dims,ell,eps,trials,frequency\n"
                << embed.r << "," << krp::join_indices(dims) << "," << embed.ell << "," << krp::format_double(embed.eps)
                << "," << embed.trials << "," << krp::format_double(freq) << "\n";
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const krp::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const krp::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const krp::DimensionError& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
