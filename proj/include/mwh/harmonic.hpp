#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mwh/cascade.hpp"
#include "mwh/transfer.hpp"
#include "mwh/trigmat.hpp"

namespace mwh {

struct UnitCertificate {
  bool passed = false;
  double min_eig = 0;
  RVec argmin;
};

struct UnitCandidate {
  MatTrigPoly h;
  UnitCertificate cert;
};

/// h = T1(I); the certificate passes iff min pointwise eigenvalue >= 1e-8.
UnitCandidate unit_candidate(const TransferAnalysis& ta, int grid_level);

struct AlgebraOptions {
  int grid_level = 8;
  double fit_tol = 1e-6;
};

/// The harmonic maps with the product a * b = T1(a h^{-1} b).
///
/// When the unit is the identity the product is computed exactly in
/// coefficients.  Otherwise a h^{-1} b is sampled on a 2^grid_level grid,
/// interpolated, and projected; the result is compared against the same
/// computation on the half grid.
class HarmonicAlgebra {
 public:
  /// Throws NotInvertible when the unit certificate failed.
  HarmonicAlgebra(const TransferAnalysis& ta, UnitCandidate unit, AlgebraOptions opt = {});

  int dim() const { return M_; }
  const std::vector<MatTrigPoly>& basis() const { return ta_->spectral().fixed_right; }
  const MatTrigPoly& unit() const { return unit_.h; }
  const UnitCertificate& unit_certificate() const { return unit_.cert; }
  bool exact_route() const { return exact_; }
  std::string route() const { return exact_ ? "exact" : "sampled"; }
  const TransferAnalysis& analysis() const { return *ta_; }
  /// Largest half-grid disagreement seen by the sampled route (0 for exact).
  double star_fit_residual() const { return fit_residual_; }

  MatTrigPoly star(const MatTrigPoly& a, const MatTrigPoly& b) const;
  CVec coords(const MatTrigPoly& h) const;
  MatTrigPoly element(const CVec& c) const { return ta_->from_coords(c); }
  CVec unit_coords() const { return unit_coords_; }

  /// c_{ij} = coords(h_i * h_j).
  const CVec& structure(int i, int j) const { return table_[static_cast<std::size_t>(i * M_ + j)]; }
  CVec star_coords(const CVec& a, const CVec& b) const;
  CVec adjoint_coords(const CVec& a) const;
  /// Matrix of left multiplication by z in the basis.
  CMat left_regular(const CVec& z) const;

  /// sup_x || h^{-1/2} a h^{-1/2} ||_2 over the grid, refined near the maxima.
  double h_norm(const MatTrigPoly& a) const;

 private:
  MatTrigPoly sampled_star(const MatTrigPoly& a, const MatTrigPoly& b, int level) const;

  const TransferAnalysis* ta_;
  UnitCandidate unit_;
  AlgebraOptions opt_;
  int M_ = 0;
  bool exact_ = false;
  mutable double fit_residual_ = 0;
  std::vector<CVec> table_;
  CMat adj_;  // coordinates of basis adjoints (columns)
  CVec unit_coords_;
};

struct Wedderburn {
  std::vector<int> blocks;
  std::vector<MatTrigPoly> central_idempotents;
  std::vector<CVec> idempotent_coords;
  int center_dim = 0;
  double orthogonality_residual = 0;
  double sum_residual = 0;
  double centrality_residual = 0;
};

/// Throws NonIntegralBlock when an eigenvalue multiplicity is not a square
/// or the clusters do not match the center dimension.
Wedderburn wedderburn(const HarmonicAlgebra& alg, double tol = 1e-7, std::uint64_t seed = 0x5eed);

struct MinimalProjection {
  CVec v;
  MatTrigPoly h;
  std::string route;
  /// max coeff |h * h - h|.
  double idempotency = -1;
  /// dim of the cut ideal h * A * h.
  int cut_dim = -1;
  /// min over the grid of the smallest eigenvalue of unit - h.
  double dominance_min_eig = 0;
  /// max coeff difference between fast and lattice routes, -1 if not compared.
  double route_diff = -1;
};

struct ProjectionOptions {
  CorrelationOptions correlation;
  /// Lattice cross-check tolerance when the fast route is used; <= 0 skips.
  double cross_check_tol = 1e-3;
  int grid_level = 6;
};

struct ProjectionSet {
  std::vector<MinimalProjection> projections;
  /// Lattice-route correlations for all pairs when computed.
  CorrelationResult lattice;
  bool lattice_available = false;
};

/// Minimal projections h_v for each vector of the E1 basis.  The fast route
/// T1(v v^*) is used iff `strong` passes; the lattice route otherwise (and as
/// a cross-check).  `alg` may be null when the algebra is unavailable.  Throws
/// PreconditionFailed when R1 != 1 or E(l) fails.
ProjectionSet minimal_projections(const TransferAnalysis& ta, const ElReport& el, const ProductEvaluator& P,
                                  const HarmonicAlgebra* alg, bool strong, const ProjectionOptions& opt = {});

struct PsiReport {
  CMat value;
  double morphism_residual = 0;
  double commutation_residual = 0;
  int image_rank = 0;
};

/// U^* a(0) U for U the E1 basis.
CMat psi_x0(const ElReport& el, const MatTrigPoly& a);
/// Morphism residual over random pairs, commutation with P(0), and the
/// rank of the basis images.
PsiReport psi_check(const HarmonicAlgebra& alg, const ElReport& el, int samples, std::uint64_t seed);

struct InvariantFunctional {
  CVec v1, v2;
};

/// <v2, f(0) v1>.
cplx tau(const InvariantFunctional& fnl, const MatTrigPoly& f);

/// h^{1/2}(x) m(x) h^{-1/2}(A x); throws SingularAtPoint.
CMat renormalize_filter(const MatTrigPoly& m, const DilationSystem& sys, const MatTrigPoly& h, const RVec& x);
/// sup over the grid of || sum_i mt(psi_i x)^* mt(psi_i x) - I ||.
double renormalized_residual(const MatTrigPoly& m, const DilationSystem& sys, const MatTrigPoly& h, int grid_level);

/// Hermitian square root and inverse square root (throws SingularAtPoint).
void hermitian_roots(const CMat& H, CMat* sqrt_h, CMat* inv_sqrt_h);

}  // namespace mwh
