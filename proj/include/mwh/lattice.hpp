#pragma once

#include <optional>
#include <vector>

#include "mwh/types.hpp"

namespace mwh {

/// Expansive integer dilation A on Z^n together with a complete digit set for
/// Z^n / A Z^n and the norms used to bound contractions.
///
/// Frequencies transform by A^T, so the frequency-side contraction factor
/// theta refers to A^{-T}.  When ||A^{-1}||_2 < 1 the Euclidean norm already
/// certifies it; otherwise the adapted norm for A^T is used.
class DilationSystem {
 public:
  static DilationSystem build(const IMat& A);
  /// Accepts a real matrix; throws NotInteger if some entry is not integral.
  static DilationSystem from_real(const RMat& A);
  /// Same dilation, caller-supplied digits (validated; first digit must be 0).
  static DilationSystem with_digits(const IMat& A, std::vector<IVec> digits);

  int n() const { return n_; }
  const IMat& A() const { return A_; }
  int q() const { return q_; }
  const std::vector<IVec>& digits() const { return digits_; }
  double rho() const { return rho_; }
  double theta() const { return theta_; }
  int norm_truncation() const { return J_; }
  /// Contraction of every inverse branch in the adapted norm (space side).
  double adapted_contraction() const { return adapted_theta_; }
  bool freq_norm_euclidean() const { return freq_euclidean_; }
  const RMat& A_real() const { return Ar_; }
  const RMat& A_inv() const { return Ainv_; }
  const IVec& smith_diagonal() const { return smith_d_; }

  /// psi_i(x) = A^{-1}(x + g_i), i in [0, q).
  RVec inverse_branch(int i, const RVec& x) const;

  /// sum_{j<=J} rho^j ||A^{-j} x||.
  double adapted_norm(const RVec& x) const;
  /// Norm on frequency space in which A^{-T} contracts by theta.
  double freq_norm(const RVec& s) const;

  /// Residue class of g in Z^n / A Z^n (via the Smith form of A).
  IVec residue_key(const IVec& g) const;
  bool in_lattice_image(const IVec& g) const;
  /// The integer s with A^T s = t, if it exists.
  std::optional<IVec> transpose_preimage(const IVec& t) const;

  RVec apply(const RVec& x) const { return Ar_ * x; }
  RVec apply_inv(const RVec& x) const { return Ainv_ * x; }

 private:
  DilationSystem() = default;
  static DilationSystem make(const IMat& A);

  int n_ = 0;
  IMat A_;
  int q_ = 0;
  std::vector<IVec> digits_;
  double rho_ = 0;
  double theta_ = 0;
  double adapted_theta_ = 0;
  int J_ = 0;
  bool freq_euclidean_ = true;
  RMat Ar_, Ainv_;
  std::vector<RMat> inv_powers_;  // A^{-j}, j = 0..J+1
  IMat smith_P_;
  IVec smith_d_;
  IMat adjT_;  // adjugate of A^T
  std::int64_t det_ = 0;
};

/// Signed determinant via fraction-free elimination.
std::int64_t integer_det(const IMat& M);
/// adj(M) with adj(M) M = det(M) I.
IMat integer_adjugate(const IMat& M);

}  // namespace mwh
