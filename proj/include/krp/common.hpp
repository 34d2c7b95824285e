#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace krp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Shape or argument contract violation (bad mode, mismatched sizes, ...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical request that cannot be satisfied (rank too large, cap exceeded,
/// singular system, solver non-convergence).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File format or filesystem failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

inline Index product(const std::vector<Index>& v, std::size_t skip = static_cast<std::size_t>(-1)) {
  Index p = 1;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (k != skip) p *= v[k];
  return p;
}

inline std::string shape_string(const std::vector<Index>& dims) {
  std::string s;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k) s += 'x';
    s += std::to_string(dims[k]);
  }
  return s;
}

}  // namespace detail

/// Multiply-add counter. Kernels report into the counter installed on the
/// calling thread by a FlopScope; with no scope installed counting is a no-op.
struct FlopCounter {
  std::uint64_t madds = 0;
};

namespace detail {
inline thread_local FlopCounter* active_flop_counter = nullptr;

inline void count_madds(Index n) {
  if (active_flop_counter != nullptr) active_flop_counter->madds += static_cast<std::uint64_t>(n);
}
}  // namespace detail

class FlopScope {
 public:
  explicit FlopScope(FlopCounter& counter) : previous_(detail::active_flop_counter) {
    detail::active_flop_counter = &counter;
  }
  ~FlopScope() { detail::active_flop_counter = previous_; }
  FlopScope(const FlopScope&) = delete;
  FlopScope& operator=(const FlopScope&) = delete;

 private:
  FlopCounter* previous_;
};

}  // namespace krp
