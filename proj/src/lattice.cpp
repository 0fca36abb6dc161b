#include "mwh/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mwh/error.hpp"

namespace mwh {

namespace {

constexpr double kExpansiveMargin = 1e-9;

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

double op_norm(const RMat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<RMat> svd(M);
  return svd.singularValues()(0);
}

// Zigzag code used for the digit tie-break: 0, 1, -1, 2, -2, ... -> 0, 1, 2, 3, 4, ...
std::int64_t zigzag(std::int64_t v) { return v > 0 ? 2 * v - 1 : -2 * v; }

bool digit_less(const IVec& a, const IVec& b) {
  const std::int64_t la = a.cwiseAbs().sum(), lb = b.cwiseAbs().sum();
  if (la != lb) return la < lb;
  for (Eigen::Index c = a.size() - 1; c >= 0; --c) {
    const std::int64_t za = zigzag(a[c]), zb = zigzag(b[c]);
    if (za != zb) return za < zb;
  }
  return false;
}

// P * A * Q = diag(d) with P, Q unimodular.
void smith_form(const IMat& A, IMat& P, IVec& d) {
  const Eigen::Index n = A.rows();
  IMat M = A;
  P = IMat::Identity(n, n);
  IMat Q = IMat::Identity(n, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (;;) {
      Eigen::Index pi = -1, pj = -1;
      std::int64_t best = 0;
      for (Eigen::Index i = t; i < n; ++i)
        for (Eigen::Index j = t; j < n; ++j) {
          const std::int64_t v = std::llabs(M(i, j));
          if (v != 0 && (best == 0 || v < best)) {
            best = v;
            pi = i;
            pj = j;
          }
        }
      if (pi < 0) break;
      M.row(t).swap(M.row(pi));
      P.row(t).swap(P.row(pi));
      M.col(t).swap(M.col(pj));
      Q.col(t).swap(Q.col(pj));
      bool done = true;
      for (Eigen::Index i = t + 1; i < n; ++i) {
        const std::int64_t f = M(i, t) / M(t, t);
        M.row(i) -= f * M.row(t);
        P.row(i) -= f * P.row(t);
        if (M(i, t) != 0) done = false;
      }
      for (Eigen::Index j = t + 1; j < n; ++j) {
        const std::int64_t f = M(t, j) / M(t, t);
        M.col(j) -= f * M.col(t);
        Q.col(j) -= f * Q.col(t);
        if (M(t, j) != 0) done = false;
      }
      if (done) {
        for (Eigen::Index i = t + 1; i < n && done; ++i)
          for (Eigen::Index j = t + 1; j < n; ++j)
            if (M(i, j) % M(t, t) != 0) {
              M.row(t) += M.row(i);
              P.row(t) += P.row(i);
              done = false;
              break;
            }
      }
      if (done) break;
    }
    if (M(t, t) < 0) {
      M.row(t) = -M.row(t);
      P.row(t) = -P.row(t);
    }
  }
  d = M.diagonal();
}

}  // namespace

std::int64_t integer_det(const IMat& A) {
  const Eigen::Index n = A.rows();
  if (n == 0) return 1;
  IMat M = A;
  std::int64_t sign = 1, prev = 1;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (M(k, k) == 0) {
      Eigen::Index r = k + 1;
      while (r < n && M(r, k) == 0) ++r;
      if (r == n) return 0;
      M.row(k).swap(M.row(r));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i)
      for (Eigen::Index j = k + 1; j < n; ++j)
        M(i, j) = (M(i, j) * M(k, k) - M(i, k) * M(k, j)) / prev;
    prev = M(k, k);
  }
  return sign * M(n - 1, n - 1);
}

IMat integer_adjugate(const IMat& A) {
  const Eigen::Index n = A.rows();
  IMat adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  IMat minor(n - 1, n - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = A(r, c);
        }
        ++rr;
      }
      const std::int64_t cof = ((i + j) % 2 == 0 ? 1 : -1) * integer_det(minor);
      adj(j, i) = cof;
    }
  return adj;
}

DilationSystem DilationSystem::from_real(const RMat& A) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "lattice", "dilation matrix must be square and nonempty");
  IMat Ai(A.rows(), A.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      const double v = A(i, j);
      if (!std::isfinite(v) || std::abs(v - std::round(v)) > 0.0)
        throw Error(ErrorCode::NotInteger, "lattice", "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not an integer");
      Ai(i, j) = static_cast<std::int64_t>(std::llround(v));
    }
  return build(Ai);
}

DilationSystem DilationSystem::make(const IMat& A) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "lattice", "dilation matrix must be square and nonempty");
  DilationSystem s;
  s.n_ = static_cast<int>(A.rows());
  s.A_ = A;
  s.Ar_ = A.cast<double>();

  Eigen::EigenSolver<RMat> es(s.Ar_, false);
  double min_abs = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) min_abs = std::min(min_abs, std::abs(es.eigenvalues()[i]));
  if (!(min_abs > 1.0 + kExpansiveMargin))
    throw Error(ErrorCode::NotExpansive, "lattice", "eigenvalue of modulus " + std::to_string(min_abs) + " <= 1");

  s.det_ = integer_det(A);
  s.q_ = static_cast<int>(std::llabs(s.det_));
  if (s.q_ < 2) throw Error(ErrorCode::NotExpansive, "lattice", "|det A| must be at least 2");
  s.adjT_ = integer_adjugate(A).transpose();
  s.Ainv_ = s.Ar_.inverse();

  s.rho_ = 0.5 * (1.0 + min_abs);
  s.inv_powers_.push_back(RMat::Identity(s.n_, s.n_));
  double scale = 1.0;
  int J = 0;
  for (;;) {
    ++J;
    s.inv_powers_.push_back(s.inv_powers_.back() * s.Ainv_);
    scale *= s.rho_;
    if (scale * op_norm(s.inv_powers_.back()) < 1e-12) break;
    if (J > 100000) throw Error(ErrorCode::NotExpansive, "lattice", "adapted norm truncation did not converge");
  }
  s.J_ = J;
  s.inv_powers_.push_back(s.inv_powers_.back() * s.Ainv_);
  s.adapted_theta_ = 1.0 / s.rho_ + scale * op_norm(s.inv_powers_.back()) + 1e-12;

  const double inv_norm = op_norm(s.Ainv_);
  if (inv_norm < 1.0 - 1e-12) {
    s.theta_ = inv_norm;
    s.freq_euclidean_ = true;
  } else {
    s.theta_ = s.adapted_theta_;
    s.freq_euclidean_ = false;
  }

  smith_form(A, s.smith_P_, s.smith_d_);
  return s;
}

DilationSystem DilationSystem::build(const IMat& A) {
  DilationSystem s = make(A);
  std::int64_t bound = 0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) bound = std::max<std::int64_t>(bound, A.row(i).cwiseAbs().sum());

  std::vector<IVec> cand;
  IVec g = IVec::Constant(s.n_, -bound);
  for (;;) {
    cand.push_back(g);
    Eigen::Index c = 0;
    while (c < s.n_ && g[c] == bound) g[c++] = -bound;
    if (c == s.n_) break;
    ++g[c];
  }
  std::stable_sort(cand.begin(), cand.end(), digit_less);

  std::set<Freq> seen;
  for (const IVec& v : cand) {
    if (seen.insert(to_freq(s.residue_key(v))).second) s.digits_.push_back(v);
    if (static_cast<int>(s.digits_.size()) == s.q_) break;
  }
  if (static_cast<int>(s.digits_.size()) != s.q_)
    throw Error(ErrorCode::InvalidDigits, "lattice", "digit search box does not cover all residue classes");
  return s;
}

DilationSystem DilationSystem::with_digits(const IMat& A, std::vector<IVec> digits) {
  DilationSystem s = make(A);
  if (static_cast<int>(digits.size()) != s.q_)
    throw Error(ErrorCode::InvalidDigits, "lattice", "expected " + std::to_string(s.q_) + " digits");
  std::set<Freq> seen;
  for (const IVec& g : digits) {
    if (g.size() != s.n_) throw Error(ErrorCode::DimensionMismatch, "lattice", "digit has wrong dimension");
    if (!seen.insert(to_freq(s.residue_key(g))).second)
      throw Error(ErrorCode::InvalidDigits, "lattice", "digits are not pairwise incongruent modulo A Z^n");
  }
  if (!digits.front().isZero()) throw Error(ErrorCode::InvalidDigits, "lattice", "first digit must be 0");
  s.digits_ = std::move(digits);
  return s;
}

RVec DilationSystem::inverse_branch(int i, const RVec& x) const {
  if (i < 0 || i >= q_)
    throw Error(ErrorCode::IndexOutOfRange, "lattice", "branch index " + std::to_string(i) + " outside [0," + std::to_string(q_) + ")");
  return Ainv_ * (x + digits_[static_cast<std::size_t>(i)].cast<double>());
}

double DilationSystem::adapted_norm(const RVec& x) const {
  double acc = 0.0, scale = 1.0;
  for (int j = 0; j <= J_; ++j) {
    acc += scale * (inv_powers_[static_cast<std::size_t>(j)] * x).norm();
    scale *= rho_;
  }
  return acc;
}

double DilationSystem::freq_norm(const RVec& s) const {
  if (freq_euclidean_) return s.norm();
  double acc = 0.0, scale = 1.0;
  for (int j = 0; j <= J_; ++j) {
    acc += scale * (inv_powers_[static_cast<std::size_t>(j)].transpose() * s).norm();
    scale *= rho_;
  }
  return acc;
}

IVec DilationSystem::residue_key(const IVec& g) const {
  IVec r = smith_P_ * g;
  for (Eigen::Index c = 0; c < r.size(); ++c) r[c] = smith_d_[c] == 1 ? 0 : floor_mod(r[c], smith_d_[c]);
  return r;
}

bool DilationSystem::in_lattice_image(const IVec& g) const {
  const IVec u = adjT_.transpose() * g;
  for (Eigen::Index c = 0; c < u.size(); ++c)
    if (u[c] % det_ != 0) return false;
  return true;
}

std::optional<IVec> DilationSystem::transpose_preimage(const IVec& t) const {
  IVec u = adjT_ * t;
  for (Eigen::Index c = 0; c < u.size(); ++c) {
    if (u[c] % det_ != 0) return std::nullopt;
    u[c] /= det_;
  }
  return u;
}

}  // namespace mwh
