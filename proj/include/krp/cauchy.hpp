#pragma once

// Cauchy test tensor x(i_1..i_d) = (i_1^a + ... + i_d^a)^(-1/a), 1-based indices.

#include "krp/tensor.hpp"

#include <cmath>

namespace krp {

/// One entry, for 1-based `idx`; lets large configurations be spot-checked
/// without forming the tensor.
inline double cauchy_entry(const std::vector<Index>& idx, double alpha) {
  detail::require(!idx.empty(), "cauchy_entry: empty index");
  detail::require(alpha > 0 && std::isfinite(alpha), "cauchy_entry: alpha must be positive");
  double s = 0.0;
  for (Index i : idx) {
    detail::require(i >= 1, "cauchy_entry: indices are 1-based");
    s += std::pow(static_cast<double>(i), alpha);
  }
  return std::pow(s, -1.0 / alpha);
}

inline DenseTensor cauchy_tensor(Index n, Index d, double alpha) {
  detail::require(n >= 1 && d >= 1, "cauchy_tensor: n and d must be >= 1");
  detail::require(alpha > 0 && std::isfinite(alpha), "cauchy_tensor: alpha must be positive");
  std::vector<double> powers(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) powers[static_cast<std::size_t>(i)] = std::pow(static_cast<double>(i + 1), alpha);
  DenseTensor x(std::vector<Index>(static_cast<std::size_t>(d), n));
  std::vector<Index> idx(static_cast<std::size_t>(d), 0);
  for (Index lin = 0; lin < x.size(); ++lin) {
    double s = 0.0;
    for (Index k : idx) s += powers[static_cast<std::size_t>(k)];
    x[lin] = std::pow(s, -1.0 / alpha);
    for (std::size_t k = 0; k < idx.size() && ++idx[k] == n; ++k) idx[k] = 0;
  }
  return x;
}

}  // namespace krp
