#pragma once

// Dense tensors and the multilinear kernels used by every sketching routine.
//
// Linearization is first-index-fastest. The mode-i unfolding places element
// (i_1, ..., i_d) at row i_i and column sum_{k != i} i_k * J_k with
// J_k = prod_{m < k, m != i} n_m, so that a multi-TTM unfolds as
// A_i X_(i) (A_d kron ... kron A_{i+1} kron A_{i-1} kron ... kron A_1)^T.

#include "krp/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>

namespace krp {

class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
    check_dims();
    data_.assign(static_cast<std::size_t>(detail::product(dims_)), 0.0);
  }

  DenseTensor(std::vector<Index> dims, std::vector<double> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims();
    detail::require(static_cast<Index>(data_.size()) == detail::product(dims_),
                    "tensor data length does not match dims " + detail::shape_string(dims_));
  }

  static DenseTensor from_matrix(const Matrix& m) {
    DenseTensor t({m.rows(), m.cols()});
    std::copy(m.data(), m.data() + m.size(), t.data_.begin());
    return t;
  }

  Index order() const { return static_cast<Index>(dims_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim(Index mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  Index size() const { return static_cast<Index>(data_.size()); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator[](Index linear) { return data_[static_cast<std::size_t>(linear)]; }
  double operator[](Index linear) const { return data_[static_cast<std::size_t>(linear)]; }

  Index linear_index(std::span<const Index> idx) const {
    detail::require(static_cast<Index>(idx.size()) == order(), "index arity mismatch");
    Index lin = 0;
    Index stride = 1;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      lin += idx[k] * stride;
      stride *= dims_[k];
    }
    return lin;
  }

  double& at(std::initializer_list<Index> idx) {
    return data_[static_cast<std::size_t>(linear_index({idx.begin(), idx.size()}))];
  }
  double at(std::initializer_list<Index> idx) const {
    return data_[static_cast<std::size_t>(linear_index({idx.begin(), idx.size()}))];
  }

  Eigen::Map<Vector> vec() { return {data_.data(), size()}; }
  Eigen::Map<const Vector> vec() const { return {data_.data(), size()}; }

  /// Order-2 tensor as a matrix (no reinterpretation of the data order).
  Matrix to_matrix() const {
    detail::require(order() == 2, "to_matrix requires an order-2 tensor");
    return Eigen::Map<const Matrix>(data_.data(), dims_[0], dims_[1]);
  }

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  void check_dims() const {
    detail::require(!dims_.empty(), "tensor order must be >= 1");
    for (Index n : dims_) detail::require(n >= 1, "tensor mode sizes must be >= 1");
  }

  std::vector<Index> dims_;
  std::vector<double> data_;
};

inline double fro_norm(const DenseTensor& x) { return x.vec().norm(); }

inline DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
  detail::require(a.dims() == b.dims(), "tensor difference: dims mismatch");
  DenseTensor out(a.dims());
  out.vec() = a.vec() - b.vec();
  return out;
}

namespace detail {

struct ModeSplit {
  Index left;   // prod of sizes before the mode
  Index size;   // the mode size
  Index right;  // prod of sizes after the mode
};

inline ModeSplit split_at(const std::vector<Index>& dims, Index mode) {
  ModeSplit s{1, dims[static_cast<std::size_t>(mode)], 1};
  for (Index k = 0; k < mode; ++k) s.left *= dims[static_cast<std::size_t>(k)];
  for (Index k = mode + 1; k < static_cast<Index>(dims.size()); ++k) s.right *= dims[static_cast<std::size_t>(k)];
  return s;
}

inline void check_mode(const DenseTensor& x, Index mode) {
  require(mode >= 0 && mode < x.order(),
          "mode " + std::to_string(mode) + " out of range for order-" + std::to_string(x.order()) + " tensor");
}

}  // namespace detail

/// Mode-`mode` unfolding X_(mode), shape n_mode x prod_{k != mode} n_k.
inline Matrix mode_unfold(const DenseTensor& x, Index mode) {
  detail::check_mode(x, mode);
  const auto [left, n, right] = detail::split_at(x.dims(), mode);
  Matrix out(n, left * right);
  for (Index b = 0; b < right; ++b) {
    Eigen::Map<const Matrix> block(x.raw() + b * left * n, left, n);
    out.middleCols(b * left, left) = block.transpose();
  }
  return out;
}

/// Inverse of mode_unfold.
inline DenseTensor mode_fold(const Matrix& m, Index mode, const std::vector<Index>& dims) {
  detail::require(mode >= 0 && mode < static_cast<Index>(dims.size()), "fold: mode out of range");
  const auto [left, n, right] = detail::split_at(dims, mode);
  detail::require(m.rows() == n && m.cols() == left * right,
                  "fold: matrix shape does not match dims " + detail::shape_string(dims));
  DenseTensor out(dims);
  for (Index b = 0; b < right; ++b) {
    Eigen::Map<Matrix> block(out.raw() + b * left * n, left, n);
    block = m.middleCols(b * left, left).transpose();
  }
  return out;
}

/// Y = X x_mode A (or A^T when `transpose_a`), i.e. Y_(mode) = A X_(mode).
inline DenseTensor ttm(const DenseTensor& x, const Matrix& a, Index mode, bool transpose_a = false) {
  detail::check_mode(x, mode);
  const Index out_rows = transpose_a ? a.cols() : a.rows();
  const Index inner = transpose_a ? a.rows() : a.cols();
  const auto [left, n, right] = detail::split_at(x.dims(), mode);
  detail::require(inner == n, "ttm: matrix has " + std::to_string(inner) + " columns, mode " +
                                  std::to_string(mode) + " has size " + std::to_string(n));
  std::vector<Index> out_dims = x.dims();
  out_dims[static_cast<std::size_t>(mode)] = out_rows;
  DenseTensor y(out_dims);
  detail::count_madds(left * n * right * out_rows);
  if (left == 1) {
    Eigen::Map<const Matrix> xm(x.raw(), n, right);
    Eigen::Map<Matrix> ym(y.raw(), out_rows, right);
    if (transpose_a)
      ym.noalias() = a.transpose() * xm;
    else
      ym.noalias() = a * xm;
    return y;
  }
  for (Index b = 0; b < right; ++b) {
    Eigen::Map<const Matrix> xb(x.raw() + b * left * n, left, n);
    Eigen::Map<Matrix> yb(y.raw() + b * left * out_rows, left, out_rows);
    if (transpose_a)
      yb.noalias() = xb * a;
    else
      yb.noalias() = xb * a.transpose();
  }
  return y;
}

/// One factor of a multi-TTM: contract `mode` with `*matrix` (or its transpose).
struct ModeProduct {
  Index mode;
  const Matrix* matrix;
  bool transpose = false;

  Index out_size() const { return transpose ? matrix->cols() : matrix->rows(); }
  Index in_size() const { return transpose ? matrix->rows() : matrix->cols(); }
};

/// X x_{m1} A_1 x_{m2} A_2 ... for distinct modes. Contractions are applied
/// greedily: the product whose result is smallest goes first, ties to the
/// lowest mode.
inline DenseTensor multi_ttm(const DenseTensor& x, std::vector<ModeProduct> products) {
  std::vector<bool> seen(static_cast<std::size_t>(x.order()), false);
  for (const auto& p : products) {
    detail::check_mode(x, p.mode);
    detail::require(!seen[static_cast<std::size_t>(p.mode)], "multi_ttm: duplicate mode " + std::to_string(p.mode));
    seen[static_cast<std::size_t>(p.mode)] = true;
    detail::require(p.in_size() == x.dim(p.mode), "multi_ttm: shape mismatch on mode " + std::to_string(p.mode));
  }
  std::sort(products.begin(), products.end(), [](const auto& a, const auto& b) { return a.mode < b.mode; });
  DenseTensor current = x;
  while (!products.empty()) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < products.size(); ++k) {
      // result size = size / n * out, so compare out/n across candidates
      const auto& c = products[k];
      const auto& b = products[best];
      if (c.out_size() * b.in_size() < b.out_size() * c.in_size()) best = k;
    }
    current = ttm(current, *products[best].matrix, products[best].mode, products[best].transpose);
    products.erase(products.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return current;
}

/// X x_1 A_1 x_2 ... x_d A_d with one matrix per mode.
inline DenseTensor multi_ttm(const DenseTensor& x, const std::vector<Matrix>& mats, bool transpose = false) {
  detail::require(static_cast<Index>(mats.size()) == x.order(), "multi_ttm: need one matrix per mode");
  std::vector<ModeProduct> products;
  for (Index k = 0; k < x.order(); ++k) products.push_back({k, &mats[static_cast<std::size_t>(k)], transpose});
  return multi_ttm(x, std::move(products));
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Tensor Kronecker product: H(alpha + a*g_k, ...) = F(a, ...) * G(alpha, ...),
/// the index of `g` running fastest within each mode.
inline DenseTensor kron_tensor(const DenseTensor& f, const DenseTensor& g) {
  detail::require(f.order() == g.order(), "kron_tensor: orders differ");
  const Index d = f.order();
  std::vector<Index> dims(static_cast<std::size_t>(d));
  for (Index k = 0; k < d; ++k) dims[static_cast<std::size_t>(k)] = f.dim(k) * g.dim(k);
  DenseTensor h(dims);
  std::vector<Index> fi(static_cast<std::size_t>(d), 0);
  for (Index lf = 0; lf < f.size(); ++lf) {
    std::vector<Index> gi(static_cast<std::size_t>(d), 0);
    for (Index lg = 0; lg < g.size(); ++lg) {
      Index lin = 0;
      Index stride = 1;
      for (std::size_t k = 0; k < static_cast<std::size_t>(d); ++k) {
        lin += (gi[k] + fi[k] * g.dims()[k]) * stride;
        stride *= dims[k];
      }
      h[lin] = f[lf] * g[lg];
      for (std::size_t k = 0; k < gi.size() && ++gi[k] == g.dims()[k]; ++k) gi[k] = 0;
    }
    for (std::size_t k = 0; k < fi.size() && ++fi[k] == f.dims()[k]; ++k) fi[k] = 0;
  }
  return h;
}

/// Column-wise Kronecker product: column k is a(:,k) kron b(:,k).
inline Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  detail::require(a.cols() == b.cols(), "khatri_rao: column counts differ");
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Index k = 0; k < a.cols(); ++k)
    for (Index i = 0; i < a.rows(); ++i) out.col(k).segment(i * b.rows(), b.rows()) = a(i, k) * b.col(k);
  return out;
}

/// Row-wise Kronecker product (A^T khatri_rao U^T)^T: row i is a(i,:) kron u(i,:).
inline Matrix transposed_khatri_rao(const Matrix& a, const Matrix& u) {
  detail::require(a.rows() == u.rows(), "transposed_khatri_rao: row counts differ");
  Matrix out(a.rows(), a.cols() * u.cols());
  for (Index j = 0; j < a.cols(); ++j)
    out.middleCols(j * u.cols(), u.cols()) = u.array().colwise() * a.col(j).array();
  return out;
}

inline DenseTensor hadamard(const DenseTensor& x, const DenseTensor& y) {
  detail::require(x.dims() == y.dims(), "hadamard: dims mismatch");
  DenseTensor out(x.dims());
  out.vec() = x.vec().cwiseProduct(y.vec());
  return out;
}

/// Matricized tensor times Khatri-Rao product:
///   X_(mode) (F_{d} kr ... kr F_{mode+1} kr F_{mode-1} kr ... kr F_{1}),
/// where `factors` lists F_j for j != mode in ascending mode order, each n_j x l.
/// The Khatri-Rao product is never formed: the largest contraction is one
/// GEMM over all columns, the rest are per-column vector contractions.
/// For an order-1 tensor `factors` is empty and the result is x as an n x 1
/// matrix (the empty Khatri-Rao product is the 1 x 1 identity).
inline Matrix mttkrp(const DenseTensor& x, std::span<const Matrix> factors, Index mode) {
  detail::check_mode(x, mode);
  const Index d = x.order();
  detail::require(static_cast<Index>(factors.size()) == d - 1,
                  "mttkrp: expected " + std::to_string(d - 1) + " factors, got " + std::to_string(factors.size()));
  if (d == 1) return Eigen::Map<const Matrix>(x.raw(), x.dim(0), 1);

  auto factor = [&](Index j) -> const Matrix& {
    return factors[static_cast<std::size_t>(j < mode ? j : j - 1)];
  };
  const Index ell = factors[0].cols();
  for (Index j = 0; j < d; ++j) {
    if (j == mode) continue;
    detail::require(factor(j).cols() == ell, "mttkrp: factors have differing column counts");
    detail::require(factor(j).rows() == x.dim(j), "mttkrp: factor for mode " + std::to_string(j) +
                                                      " has " + std::to_string(factor(j).rows()) +
                                                      " rows, expected " + std::to_string(x.dim(j)));
  }

  const auto& dims = x.dims();
  auto dim = [&](Index j) { return dims[static_cast<std::size_t>(j)]; };
  Matrix out(x.dim(mode), ell);
  Vector v, w;

  // contract leading modes first..last-1 (exclusive of `mode`) of a vector of length len
  auto contract_front = [&](Index first, Index last, Index k, Index len) {
    for (Index j = first; j < last; ++j) {
      const Index rest = len / dim(j);
      Eigen::Map<const Matrix> vm(v.data(), dim(j), rest);
      w.noalias() = vm.transpose() * factor(j).col(k);
      detail::count_madds(len);
      v.swap(w);
      len = rest;
    }
    return len;
  };

  if (mode != d - 1) {
    const Index last = d - 1;
    const Index lead = x.size() / dim(last);
    Eigen::Map<const Matrix> xm(x.raw(), lead, dim(last));
    const Matrix t = xm * factor(last);
    detail::count_madds(x.size() * ell);
    for (Index k = 0; k < ell; ++k) {
      v = t.col(k);
      Index len = lead;
      for (Index j = d - 2; j > mode; --j) {
        len /= dim(j);
        Eigen::Map<const Matrix> vm(v.data(), len, dim(j));
        w.noalias() = vm * factor(j).col(k);
        detail::count_madds(len * dim(j));
        v.swap(w);
      }
      contract_front(0, mode, k, len);
      out.col(k) = v;
    }
  } else {
    const Index rest = x.size() / dim(0);
    Eigen::Map<const Matrix> xm(x.raw(), dim(0), rest);
    const Matrix t = factor(0).transpose() * xm;
    detail::count_madds(x.size() * ell);
    for (Index k = 0; k < ell; ++k) {
      v = t.row(k).transpose();
      contract_front(1, mode, k, rest);
      out.col(k) = v;
    }
  }
  return out;
}

inline Matrix mttkrp(const DenseTensor& x, const std::vector<Matrix>& factors, Index mode) {
  return mttkrp(x, std::span<const Matrix>(factors), mode);
}

/// Frobenius norm of X x_mode (I - Q Q^T) for Q with orthonormal columns.
inline double projection_residual(const DenseTensor& x, const Matrix& q, Index mode) {
  const Matrix xm = mode_unfold(x, mode);
  return (xm - q * (q.transpose() * xm)).norm();
}

}  // namespace krp
