#pragma once

// Sensor placement from a Tucker compression of snapshot data: column-pivoted
// QR of each spatial factor picks the sensor indices, and a field measured on
// the Cartesian sensor grid is lifted back through A_i = Q_i (P_i^T Q_i)^-1.

#include "krp/tucker.hpp"

#include <numbers>
#include <optional>
#include <string>

namespace krp {

enum class SensorCompressor { hosvd, sthosvd, rhosvd_krp, rsthosvd_krp };

inline const char* to_string(SensorCompressor c) {
  switch (c) {
    case SensorCompressor::hosvd: return "hosvd";
    case SensorCompressor::sthosvd: return "sthosvd";
    case SensorCompressor::rhosvd_krp: return "rhosvd-krp";
    case SensorCompressor::rsthosvd_krp: return "rsthosvd-krp";
  }
  return "?";
}

inline std::optional<SensorCompressor> parse_sensor_compressor(const std::string& s) {
  for (auto c : {SensorCompressor::hosvd, SensorCompressor::sthosvd, SensorCompressor::rhosvd_krp,
                 SensorCompressor::rsthosvd_krp})
    if (s == to_string(c)) return c;
  return std::nullopt;
}

struct SensorModel {
  std::vector<std::vector<Index>> indices;  // 0-based, one set per spatial mode
  std::vector<Matrix> factors;              // A_i, N_i x l_i

  Index order() const { return static_cast<Index>(factors.size()); }

  std::vector<Index> dims() const {
    std::vector<Index> d;
    for (const auto& a : factors) d.push_back(a.rows());
    return d;
  }

  std::vector<Index> sensor_counts() const {
    std::vector<Index> d;
    for (const auto& s : indices) d.push_back(static_cast<Index>(s.size()));
    return d;
  }

  void validate() const {
    detail::require(!factors.empty(), "SensorModel: no modes");
    detail::require(indices.size() == factors.size(), "SensorModel: need one index set per factor");
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const Matrix& a = factors[i];
      detail::require(static_cast<Index>(indices[i].size()) == a.cols(),
                      "SensorModel: index count differs from factor width on mode " + std::to_string(i));
      std::vector<bool> seen(static_cast<std::size_t>(a.rows()), false);
      for (Index k : indices[i]) {
        detail::require(k >= 0 && k < a.rows(), "SensorModel: sensor index out of range");
        detail::require(!seen[static_cast<std::size_t>(k)], "SensorModel: repeated sensor index");
        seen[static_cast<std::size_t>(k)] = true;
      }
    }
  }
};

namespace detail {

// l x n 0/1 matrix picking rows `idx` of an n-vector
inline Matrix selection_matrix(const std::vector<Index>& idx, Index n) {
  Matrix p = Matrix::Zero(static_cast<Index>(idx.size()), n);
  for (std::size_t k = 0; k < idx.size(); ++k) p(static_cast<Index>(k), idx[k]) = 1.0;
  return p;
}

inline std::vector<Matrix> spatial_factors(const DenseTensor& snapshots, const std::vector<Index>& ranks,
                                           SensorCompressor compressor, const SketchConfig& cfg) {
  const Index d = snapshots.order() - 1;
  std::vector<Index> full = ranks;
  // the snapshot factor is discarded; its rank only has to be admissible for
  // the sequential variants, which reach it after the spatial modes
  full.push_back(std::min(snapshots.dim(d), detail::product(ranks)));
  TuckerTensor t;
  switch (compressor) {
    case SensorCompressor::hosvd: t = hosvd(snapshots, full); break;
    case SensorCompressor::sthosvd: t = sthosvd(snapshots, full); break;
    case SensorCompressor::rhosvd_krp: t = rhosvd_krp(snapshots, {full, 0}, cfg); break;
    case SensorCompressor::rsthosvd_krp: t = rsthosvd_krp(snapshots, {full, 0}, cfg); break;
  }
  t.factors.pop_back();
  return t.factors;
}

}  // namespace detail

/// Snapshots are N_1 x ... x N_d x T; ranks holds l_1 .. l_d. The last mode is
/// never compressed.
inline SensorModel train_sensors(const DenseTensor& snapshots, const std::vector<Index>& ranks,
                                 SensorCompressor compressor = SensorCompressor::hosvd, const SketchConfig& cfg = {}) {
  detail::require(snapshots.order() >= 2, "train_sensors: need at least one spatial mode and a snapshot mode");
  const Index d = snapshots.order() - 1;
  detail::require(static_cast<Index>(ranks.size()) == d,
                  "train_sensors: expected " + std::to_string(d) + " spatial ranks, got " + std::to_string(ranks.size()));
  for (Index i = 0; i < d; ++i) {
    const Index l = ranks[static_cast<std::size_t>(i)];
    detail::require(l >= 1 && l <= snapshots.dim(i), "train_sensors: rank out of range on mode " + std::to_string(i));
  }
  const std::vector<Matrix> q = detail::spatial_factors(snapshots, ranks, compressor, cfg);

  SensorModel model;
  for (Index i = 0; i < d; ++i) {
    const Matrix& qi = q[static_cast<std::size_t>(i)];
    const Index l = ranks[static_cast<std::size_t>(i)];
    if (qi.cols() < l)
      throw InfeasibleError("train_sensors: compressed basis on mode " + std::to_string(i) + " has only " +
                            std::to_string(qi.cols()) + " columns");
    std::vector<Index> idx = pivoted_qr_columns(qi.transpose(), l);
    Matrix pq(l, l);
    for (Index k = 0; k < l; ++k) pq.row(k) = qi.row(idx[static_cast<std::size_t>(k)]);
    const Eigen::JacobiSVD<Matrix> svd(pq);
    const double q_norm = Eigen::JacobiSVD<Matrix>(qi).singularValues()(0);
    if (svd.singularValues()(l - 1) <= 1e-10 * q_norm)
      throw InfeasibleError("train_sensors: P^T Q is singular on mode " + std::to_string(i));
    model.factors.push_back(qi * pq.inverse());
    model.indices.push_back(std::move(idx));
    detail::count_madds(qi.rows() * l * l);
  }
  return model;
}

/// Samples of `field` on the sensor grid. Modes beyond the model's order are
/// carried along unchanged.
inline DenseTensor measure(const DenseTensor& field, const SensorModel& model) {
  model.validate();
  detail::require(field.order() >= model.order(), "measure: field has fewer modes than the model");
  std::vector<Matrix> sel;
  for (Index i = 0; i < model.order(); ++i) {
    detail::require(field.dim(i) == model.factors[static_cast<std::size_t>(i)].rows(),
                    "measure: field dim differs from the model on mode " + std::to_string(i));
    sel.push_back(detail::selection_matrix(model.indices[static_cast<std::size_t>(i)], field.dim(i)));
  }
  std::vector<ModeProduct> products;
  for (Index i = 0; i < model.order(); ++i) products.push_back({i, &sel[static_cast<std::size_t>(i)]});
  return multi_ttm(field, std::move(products));
}

/// measured x_1 A_1 x_2 ... x_d A_d
inline DenseTensor reconstruct_field(const SensorModel& model, const DenseTensor& measured) {
  model.validate();
  detail::require(measured.order() >= model.order(), "reconstruct_field: measurement has fewer modes than the model");
  std::vector<ModeProduct> products;
  for (Index i = 0; i < model.order(); ++i) {
    const Matrix& a = model.factors[static_cast<std::size_t>(i)];
    detail::require(measured.dim(i) == a.cols(), "reconstruct_field: measured dim differs from sensor count on mode " +
                                                     std::to_string(i));
    products.push_back({i, &a});
  }
  return multi_ttm(measured, std::move(products));
}

/// Synthetic spatio-temporal data: smooth separable spatial modes (cosines of
/// increasing frequency) mixed by Gaussian cores, plus optional noise.
struct SyntheticFlow {
  DenseTensor snapshots;  // N_1 x ... x N_d x T
  DenseTensor held_out;   // N_1 x ... x N_d x T_test, same spatial modes
  std::vector<Matrix> modes;
};

inline SyntheticFlow synthetic_flow(const std::vector<Index>& dims, const std::vector<Index>& ranks, Index t_train,
                                    Index t_test, const SketchConfig& cfg, double noise = 0.0) {
  detail::require(!dims.empty() && dims.size() == ranks.size(), "synthetic_flow: dims and ranks differ in length");
  detail::require(t_train >= 1 && t_test >= 1, "synthetic_flow: snapshot counts must be >= 1");
  constexpr std::uint64_t tag = 0x666c6f77;
  SketchConfig g = cfg;
  g.distribution = Distribution::gaussian;
  g.ledger = nullptr;
  SyntheticFlow out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    detail::require(ranks[i] >= 1 && ranks[i] <= dims[i], "synthetic_flow: rank out of range");
    Matrix u(dims[i], ranks[i]);
    for (Index k = 0; k < ranks[i]; ++k)
      for (Index x = 0; x < dims[i]; ++x)
        u(x, k) = std::cos(std::numbers::pi * static_cast<double>(k) * (static_cast<double>(x) + 0.5) /
                           static_cast<double>(dims[i]));
    out.modes.push_back(u);
  }
  auto make = [&](Index t, std::uint64_t which) {
    std::vector<Index> core_dims = ranks;
    core_dims.push_back(t);
    DenseTensor core(core_dims);
    const Matrix c = draw_matrix(core.size(), 1, g.with_stream(tag, which));
    std::copy(c.data(), c.data() + c.size(), core.raw());
    std::vector<ModeProduct> products;
    for (std::size_t i = 0; i < dims.size(); ++i) products.push_back({static_cast<Index>(i), &out.modes[i]});
    DenseTensor x = multi_ttm(core, std::move(products));
    if (noise > 0.0) {
      const Matrix e = draw_matrix(x.size(), 1, g.with_stream(tag, which + 2));
      x.vec() += noise * fro_norm(x) / std::sqrt(static_cast<double>(x.size())) * e.col(0);
    }
    return x;
  };
  out.snapshots = make(t_train, 0);
  out.held_out = make(t_test, 1);
  return out;
}

}  // namespace krp
