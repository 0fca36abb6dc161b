#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <vector>

#include "mwh/lattice.hpp"
#include "mwh/trigmat.hpp"
#include "mwh/types.hpp"

namespace mwh {

/// Every data-parallel kernel has a serial reference path selected by Exec.
/// Reductions are blocked with a fixed block size and combined in block
/// order, so results do not depend on the number of threads.
enum class Exec { serial, parallel };

inline constexpr std::int64_t kReduceBlock = 256;

/// The first exception raised by any iteration is rethrown on the caller's
/// thread once the loop has finished.
template <class F>
void parallel_for(Exec ex, std::int64_t n, F&& f) {
  if (ex == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr err;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#pragma omp critical(mwh_parallel_for_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

/// max(0, max_i f(i)); max is exact under reordering.
template <class F>
double max_over(Exec ex, std::int64_t n, F&& f) {
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  parallel_for(ex, n, [&](std::int64_t i) { v[static_cast<std::size_t>(i)] = static_cast<double>(f(i)); });
  double best = 0.0;
  for (double x : v) best = std::max(best, x);
  return best;
}

/// sum_i f(i) with deterministic association.  acc(T&, i) adds term i.
template <class T, class Acc>
T ordered_sum(Exec ex, std::int64_t n, const T& zero, Acc&& acc) {
  const std::int64_t nb = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<T> partial(static_cast<std::size_t>(nb), zero);
  parallel_for(ex, nb, [&](std::int64_t b) {
    T& p = partial[static_cast<std::size_t>(b)];
    const std::int64_t hi = std::min(n, (b + 1) * kReduceBlock);
    for (std::int64_t i = b * kReduceBlock; i < hi; ++i) acc(p, i);
  });
  T total = zero;
  for (const T& p : partial) total += p;
  return total;
}

/// Flattened trigonometric polynomial for hot loops: evaluation uses one
/// sincos per coordinate and a caller-owned workspace, no allocation.
class FlatPoly {
 public:
  struct Workspace {
    std::vector<cplx> powers;
  };

  FlatPoly() = default;
  explicit FlatPoly(const MatTrigPoly& p);

  int n() const { return n_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Workspace workspace() const { return Workspace{std::vector<cplx>(static_cast<std::size_t>(pow_size_))}; }

  /// out (rows*cols, column-major) = p(x).
  void eval(const double* x, cplx* out, Workspace& ws) const;

 private:
  int n_ = 0, rows_ = 0, cols_ = 0, terms_ = 0;
  std::vector<int> lo_, span_, offset_;
  int pow_size_ = 0;
  std::vector<int> freq_;     // terms x n, relative to lo
  std::vector<cplx> coeff_;   // terms x rows*cols
};

/// C = A B for column-major square d x d blocks.
inline void small_matmul(const cplx* A, const cplx* B, cplx* C, int d) {
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      cplx s = 0;
      for (int k = 0; k < d; ++k) s += A[i + k * d] * B[k + j * d];
      C[i + j * d] = s;
    }
}

std::vector<CMat> evaluate_grid(const MatTrigPoly& p, const std::vector<RVec>& pts, Exec ex = Exec::parallel);

/// max over pts of || sum_i m(psi_i x)^* m(psi_i x) - I ||_2.
double qmf_sweep(const MatTrigPoly& m, const DilationSystem& sys, const std::vector<RVec>& pts,
                 Exec ex = Exec::parallel);

}  // namespace mwh
