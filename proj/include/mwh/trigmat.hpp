#pragma once

#include <map>
#include <string>
#include <vector>

#include "mwh/lattice.hpp"
#include "mwh/types.hpp"

namespace mwh {

/// p(x) = sum_k M_k exp(2 pi i k.x) with finitely many rows x cols
/// coefficients M_k.  Square (d x d) polynomials represent filters and
/// harmonic maps; d x 1 ones represent sections.
class MatTrigPoly {
 public:
  using Coeffs = std::map<Freq, CMat>;

  static constexpr double kPruneTol = 1e-15;

  MatTrigPoly() = default;
  MatTrigPoly(int n, int rows, int cols) : n_(n), rows_(rows), cols_(cols) {}
  MatTrigPoly(int n, int d) : MatTrigPoly(n, d, d) {}

  static MatTrigPoly constant(int n, const CMat& M);
  static MatTrigPoly monomial(const Freq& k, const CMat& M);
  static MatTrigPoly identity(int n, int d) { return constant(n, CMat::Identity(d, d)); }

  int n() const { return n_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  /// Matrix size of a square polynomial.
  int d() const { return rows_; }
  const Coeffs& coeffs() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }

  /// Coefficient at k (zero matrix when absent).
  CMat coeff(const Freq& k) const;
  /// Adds M to the coefficient at k.
  void add(const Freq& k, const CMat& M);
  void set(const Freq& k, const CMat& M);
  /// Drops coefficients with max-abs entry <= tol.
  MatTrigPoly& prune(double tol = kPruneTol);

  std::vector<Freq> support() const;
  /// max_c |k_c| over the support.
  int degree() const;

  CMat operator()(const RVec& x) const { return evaluate(x); }
  CMat evaluate(const RVec& x) const;

  MatTrigPoly adjoint() const;

  MatTrigPoly& operator+=(const MatTrigPoly& o);
  MatTrigPoly& operator-=(const MatTrigPoly& o);
  MatTrigPoly& operator*=(cplx s);

  /// Largest entry modulus over all coefficients.
  double max_abs() const;

  /// Trigonometric interpolation from samples on the uniform per_dim^n grid
  /// (ordered as unit_grid).  The Nyquist term is split symmetrically.
  static MatTrigPoly interpolate(int n, int per_dim, const std::vector<CMat>& samples);

 private:
  void check_same_shape(const MatTrigPoly& o) const;

  int n_ = 1;
  int rows_ = 1;
  int cols_ = 1;
  Coeffs coeffs_;
};

MatTrigPoly operator+(MatTrigPoly a, const MatTrigPoly& b);
MatTrigPoly operator-(MatTrigPoly a, const MatTrigPoly& b);
MatTrigPoly operator*(cplx s, MatTrigPoly a);

/// Convolution of coefficients; pointwise matrix product.
MatTrigPoly poly_product(const MatTrigPoly& p, const MatTrigPoly& r);
inline MatTrigPoly adjoint(const MatTrigPoly& p) { return p.adjoint(); }

/// max_k max entry |a_k - b_k|.
double max_coeff_diff(const MatTrigPoly& a, const MatTrigPoly& b);

/// sup over the 2^grid_level grid of || sum_i m(psi_i x)^* m(psi_i x) - I ||_2.
double qmf_residual(const MatTrigPoly& m, const DilationSystem& sys, int grid_level);

struct ElReport {
  bool holds = false;
  int l = 0;
  std::vector<CVec> E1_basis;
  double spectral_margin = 0.0;
  /// Empty when holds; otherwise DefectiveEigenvalue, PeripheralExtra,
  /// NormNotOne or NoUnitEigenvalue.
  std::string reason;
  double norm_m0 = 0.0;
  /// max_j>=1, v of ||m(psi_j 0) v||; meaningful only for QMF filters.
  double annihilation_residual = 0.0;
  /// max_v ||m(0)^* v - v||.
  double adjoint_residual = 0.0;
};

ElReport el_condition(const MatTrigPoly& m, const DilationSystem& sys, double tol);

/// Orthogonal projection onto span(basis) for an orthonormal basis.
CMat projector(const std::vector<CVec>& basis, int d);

}  // namespace mwh
