#pragma once

#include <string>
#include <vector>

#include "mwh/kernels.hpp"
#include "mwh/transfer.hpp"
#include "mwh/trigmat.hpp"

namespace mwh {

struct ProductEvaluation {
  RVec x;
  int k = 0;
  CMat value;
  double err = 0;
};

/// Truncated infinite products P_K(x) = m(A^{-K}x) ... m(A^{-1}x) with
/// certified error bounds.  Requires R1 = 1 and E(l).
///
/// For any split K = k + p,
///   ||P_K(x) - P(x)|| <= 2 L C_A ||A^{-k} x|| + 2 tail(p),
/// where L bounds the Lipschitz constant of m, C_A = sum_j ||A^{-j}||, and
/// tail(p) = sup_{j>=p} ||m(0)^j - P(0)||.
class ProductEvaluator {
 public:
  struct Workspace {
    FlatPoly::Workspace poly;
    std::vector<cplx> cur, tmp, mv;
    RVec y;
    int depth = 0;
  };

  ProductEvaluator(const MatTrigPoly& m, const DilationSystem& sys, const ElReport& el, double qmf_exact,
                   int max_depth = 200);

  int d() const { return d_; }
  int max_depth() const { return max_depth_; }
  double lipschitz() const { return L_; }
  double contraction_sum() const { return CA_; }
  const CMat& P0() const { return P0_; }
  double tail(int p) const;

  /// P_K(x) for a fixed K.
  CMat product(const RVec& x, int K) const;
  /// Bound on ||P_K(x) - P(x)|| (minimized over all splits).
  double error_bound(const RVec& x, int K) const;
  /// Value within tol of P(x); throws TolNotReached past max_depth.
  ProductEvaluation evaluate(const RVec& x, double tol) const;

  Workspace workspace() const;
  /// Hot path: d*d column-major value into out, returns the error bound.
  double eval_into(const double* x, double tol, cplx* out, Workspace& ws) const;

 private:
  MatTrigPoly m_;
  FlatPoly flat_;
  RMat Ainv_;
  int n_, d_, max_depth_;
  double L_ = 0, CA_ = 0;
  CMat P0_;
  double tail0_ = 0, alpha_ = 0, B_ = 0;
  int J0_ = 1;
  std::vector<double> npow_;  // ||N^r||, r = 0..J0
  std::vector<double> tail_;  // tail(p) for p = 0..max_depth
};

/// Builds the evaluator (checking the hypotheses) and evaluates once.
ProductEvaluation matrix_product_P(const MatTrigPoly& m, const DilationSystem& sys, const RVec& x, double tol);

/// 1D normalized tent tent(t) / sqrt(sum_g tent(t+g)^2); tensor products in n dims.
double window_1d(double t);
double window(const RVec& x);

struct CascadeLevel {
  int k = 0;
  double sup_distance = 0;
  double increment = 0;
};

struct CascadeRun {
  int k = 0;
  std::vector<RVec> grid;
  /// samples[p][j]: probe section j at grid point p.
  std::vector<CVec> samples;
  /// <s0(0), P(x) e_j> at each grid point.
  std::vector<CVec> limits;
  std::vector<CascadeLevel> levels;
  std::string label;
};

/// samples(x) = <s0(A^{-k}x), P_k(x) e_j> f(A^{-k}x) for the constant probe
/// sections e_j.  Diagnostics compare against <s0(0), P(x) e_j>.
CascadeRun refinement_iterate(const ProductEvaluator& P, const MatTrigPoly& m, const DilationSystem& sys,
                              const MatTrigPoly& s0, int k, const std::vector<RVec>& grid,
                              std::int64_t budget = std::int64_t{1} << 26);

struct CorrelationOptions {
  double tol = 1e-6;
  int R0 = 2;
  std::int64_t point_budget = std::int64_t{1} << 21;
  Exec exec = Exec::parallel;
};

struct CorrelationResult {
  /// h[i][j] = h_{v_i, v_j}.
  std::vector<std::vector<MatTrigPoly>> h;
  int radius = 0;
  int grid = 0;
  std::vector<double> shell_contrib;
  double fit_residual = 0;
  double harmonic_residual = 0;
  double sample_error_bound = 0;
  double point_tol = 0;
};

/// h_{v1,v2}(x) = sum_g P(x+g)^* v2 v1^* P(x+g), summed over sup-norm shells
/// of doubling radius until the last shell contributes < tol/10, then fitted
/// in the fixed-space basis.  All pairs share one lattice sweep.
CorrelationResult correlation_matrix(const TransferAnalysis& ta, const ProductEvaluator& P,
                                     const std::vector<CVec>& vs, const CorrelationOptions& opt = {});
MatTrigPoly correlation(const TransferAnalysis& ta, const ProductEvaluator& P, const CVec& v1, const CVec& v2,
                        const CorrelationOptions& opt = {});

/// Raw lattice-sum value at one point (no fit); for tests and diagnostics.
CMat correlation_at(const ProductEvaluator& P, const CVec& v1, const CVec& v2, const RVec& x, int radius,
                    double point_tol);

struct StrongCertificate {
  bool pass = false;
  bool sole_peripheral = false;
  bool dim_ok = false;
  bool decay_ok = false;
  int dim = 0;
  int l = 0;
  int kmax_used = 0;
  /// First failing clause, and every failing clause in check order.
  std::string failed_clause;
  std::vector<std::string> failed_clauses;
  /// tau_ii((M^kW - W)^*(M^kW - W)) by direct summation and by the adjoint formula.
  std::vector<double> tau_direct, tau_adjoint;
  /// || sum_i T1(v_i v_i^*) - unit ||, only when pass.
  double unit_sum_residual = -1;
};

StrongCertificate strong_convergence_certificate(const TransferAnalysis& ta, const ElReport& el,
                                                 const MatTrigPoly& unit, int kmax, double tol,
                                                 std::int64_t budget = std::int64_t{1} << 20);

struct PmraCertificate {
  bool pass = false;
  bool idempotent = false;
  bool nonvanishing = false;
  double idempotency_defect = 0;
  RVec worst_point;
  double origin_norm = 0;
};

double idempotency_defect(const MatTrigPoly& h, const RVec& x);
PmraCertificate pmra_certificate(const MatTrigPoly& h, int grid_per_dim, double tol);

/// Rank-one operator W s = <s0, s> f(. - shift) with f the normalized tent.
struct RankOneW {
  MatTrigPoly section;  // d x 1
  RVec shift;
};

/// (W s)(y).
cplx apply_W(const RankOneW& W, const MatTrigPoly& s, const RVec& y);
/// (M W s)(y) = <s0(A^{-1}y), m(A^{-1}y) s(y)> f(A^{-1}y - shift).
cplx apply_MW(const MatTrigPoly& m, const DilationSystem& sys, const RankOneW& W, const MatTrigPoly& s,
              const RVec& y);
/// Bundle map W1^* W2 at x: phi(x) s1(x) s2(x)^*, phi = sum_g f1(x+g) f2(x+g).
CMat gram_bundle(const RankOneW& W1, const RankOneW& W2, const RVec& x);
/// <M W1 s, M W2 s'>'(x) by finite lattice summation.
cplx sampled_gram_MW(const MatTrigPoly& m, const DilationSystem& sys, const RankOneW& W1, const RankOneW& W2,
                     const MatTrigPoly& s, const MatTrigPoly& sp, const RVec& x);

}  // namespace mwh
