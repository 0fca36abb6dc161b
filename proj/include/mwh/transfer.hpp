#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "mwh/error.hpp"
#include "mwh/lattice.hpp"
#include "mwh/trigmat.hpp"

namespace mwh {

/// Sorted, deduplicated frequency set.
class SupportSet {
 public:
  SupportSet() = default;
  explicit SupportSet(std::vector<Freq> freqs);

  const std::vector<Freq>& freqs() const { return freqs_; }
  std::size_t size() const { return freqs_.size(); }
  bool contains(const Freq& k) const { return index_.count(k) != 0; }
  /// Position of k, or -1.
  int index_of(const Freq& k) const;
  /// max_c |k_c|.
  int radius() const;

 private:
  std::vector<Freq> freqs_;
  std::map<Freq, int> index_;
};

/// (Rh)_s = q F_{A^T s} with F = m^* h m.
MatTrigPoly transfer_apply(const MatTrigPoly& m, const DilationSystem& sys, const MatTrigPoly& h);

/// D = supp(m) - supp(m).
std::vector<Freq> difference_set(const MatTrigPoly& m);

/// Smallest R-closed set containing the contraction ball and `extra`.
SupportSet invariant_support(const MatTrigPoly& m, const DilationSystem& sys);
SupportSet close_support(const MatTrigPoly& m, const DilationSystem& sys, std::vector<Freq> seed);
bool is_closed(const MatTrigPoly& m, const DilationSystem& sys, const SupportSet& K);

/// One basis element of coefficient space: E_{ab} e_s.
struct BasisTriple {
  int s;
  int a;
  int b;
};

class TransitionOperator {
 public:
  TransitionOperator(SupportSet K, int n, int d, CMat matrix);

  const SupportSet& support() const { return K_; }
  int n() const { return n_; }
  int d() const { return d_; }
  Eigen::Index size() const { return matrix_.rows(); }
  const CMat& matrix() const { return matrix_; }
  BasisTriple basis(Eigen::Index idx) const;
  Eigen::Index index(int s, int a, int b) const { return (static_cast<Eigen::Index>(s) * d_ + a) * d_ + b; }

  /// Coefficient vector of h; throws SupportNotClosed when supp h is not in K.
  CVec to_vector(const MatTrigPoly& h) const;
  MatTrigPoly from_vector(const CVec& v) const;

 private:
  SupportSet K_;
  int n_, d_;
  CMat matrix_;
};

inline constexpr Eigen::Index kMaxTransitionSize = 4096;

/// Throws SupportNotClosed if K is not R-invariant, BudgetExceeded if the
/// matrix would exceed kMaxTransitionSize.
TransitionOperator transition_operator(const MatTrigPoly& m, const DilationSystem& sys, const SupportSet& K);

struct SpectralData {
  std::vector<cplx> eigenvalues;
  std::vector<MatTrigPoly> fixed_right;
  /// Rows are left-fixed covectors, biorthogonal to fixed_right.
  CMat fixed_left;
  /// Coefficient-space basis of the fixed space (columns); at the pivot rows
  /// it is the identity.
  CMat fixed_basis;
  std::vector<Eigen::Index> pivots;
  CMat T1;
  std::vector<cplx> peripheral;
  bool semisimple_peripheral = true;
  double theta = 0;
  double ess_radius = 0;
  /// max entry |T1 - Cesaro mean|; negative when the cross-check was skipped.
  double cesaro_defect = -1;
};

class DefectivePeripheralError : public Error {
 public:
  DefectivePeripheralError(const std::string& msg, std::vector<cplx> eigenvalues)
      : Error(ErrorCode::DefectivePeripheral, "transfer", msg), eigenvalues_(std::move(eigenvalues)) {}
  const std::vector<cplx>& eigenvalues() const { return eigenvalues_; }

 private:
  std::vector<cplx> eigenvalues_;
};

/// Cesaro mean (1/k) sum_{j=1..k} T^j for k = 2^log2k, by doubling.
CMat cesaro_matrix(const CMat& T, int log2k);

/// Throws DefectivePeripheralError when a peripheral eigenvalue is defective.
SpectralData spectral_data(const TransitionOperator& T, const DilationSystem& sys, double tol);

double ess_radius_bound(const DilationSystem& sys);

/// The full chain filter -> support -> transition matrix -> spectral data,
/// with T1 extended to arbitrary polynomial arguments.
class TransferAnalysis {
 public:
  TransferAnalysis(MatTrigPoly m, DilationSystem sys, double tol = 1e-10);
  /// Assembles an analysis from stages computed separately.
  TransferAnalysis(MatTrigPoly m, DilationSystem sys, TransitionOperator T, SpectralData spec);

  const MatTrigPoly& filter() const { return m_; }
  const DilationSystem& system() const { return sys_; }
  const SupportSet& support() const { return T_.support(); }
  const TransitionOperator& transition() const { return T_; }
  const SpectralData& spectral() const { return spec_; }
  int fixed_dim() const { return static_cast<int>(spec_.fixed_right.size()); }

  MatTrigPoly apply_R(const MatTrigPoly& h) const { return transfer_apply(m_, sys_, h); }
  /// T1 of any polynomial: iterate R until the support lies in K*, then apply T1.
  MatTrigPoly project(const MatTrigPoly& p) const;
  /// Least-squares coordinates of h in the fixed basis; residual in *resid.
  CVec coords(const MatTrigPoly& h, double* resid = nullptr) const;
  MatTrigPoly from_coords(const CVec& c) const;

 private:
  MatTrigPoly m_;
  DilationSystem sys_;
  TransitionOperator T_;
  SpectralData spec_;
};

using MatFunction = std::function<CMat(const RVec&)>;

/// (1/k) sum_{j=1..k} (R^j f)(x) by summation over the preimage tree.
/// Branches with ||m^{(j)}||_F <= 1e-13 are pruned; exceeding `budget` live
/// branches throws BudgetExceeded.
CMat cesaro_apply(const MatTrigPoly& m, const DilationSystem& sys, const MatFunction& f, const RVec& x, int k,
                  std::int64_t budget = std::int64_t{1} << 22);

/// Pointwise R f(x) = sum_i m(psi_i x)^* f(psi_i x) m(psi_i x).
CMat transfer_pointwise(const MatTrigPoly& m, const DilationSystem& sys, const MatFunction& f, const RVec& x);

/// Exact QMF residual via the coefficient route: max coefficient of R1 - 1.
double qmf_residual_exact(const MatTrigPoly& m, const DilationSystem& sys);

}  // namespace mwh
