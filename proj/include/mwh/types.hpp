#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace mwh {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Integer frequency vector; ordered lexicographically so maps keyed by it
/// iterate deterministically.
using Freq = std::vector<int>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline Freq to_freq(const IVec& v) {
  Freq f(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f[static_cast<std::size_t>(i)] = static_cast<int>(v[i]);
  return f;
}

inline IVec to_ivec(const Freq& f) {
  IVec v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) v[static_cast<Eigen::Index>(i)] = f[i];
  return v;
}

inline RVec to_rvec(const Freq& f) {
  RVec v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) v[static_cast<Eigen::Index>(i)] = f[i];
  return v;
}

/// Points of the uniform grid {j / per_dim} covering [0,1)^n, last coordinate
/// varying slowest.
std::vector<RVec> unit_grid(int n, int per_dim);

}  // namespace mwh
