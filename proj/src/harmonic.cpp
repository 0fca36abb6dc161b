#include "mwh/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mwh/error.hpp"
#include "mwh/kernels.hpp"

namespace mwh {

namespace {

double op_norm(const CMat& M) { return M.size() ? Eigen::JacobiSVD<CMat>(M).singularValues()(0) : 0.0; }

double min_herm_eig(const CMat& H) {
  Eigen::SelfAdjointEigenSolver<CMat> es(CMat(0.5 * (H + H.adjoint())), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

int numeric_rank(const CMat& M, double thr) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(M);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > thr) ++r;
  return r;
}

// Local maximisation by compass search; the objective is smooth.
double refine_max(const std::function<double(const RVec&)>& f, RVec x, double step) {
  double best = f(x);
  while (step > 1e-10) {
    bool moved = false;
    for (Eigen::Index c = 0; c < x.size(); ++c)
      for (double sgn : {1.0, -1.0}) {
        RVec y = x;
        y[c] += sgn * step;
        const double v = f(y);
        if (v > best) {
          best = v;
          x = y;
          moved = true;
        }
      }
    if (!moved) step *= 0.5;
  }
  return best;
}

}  // namespace

void hermitian_roots(const CMat& H, CMat* sqrt_h, CMat* inv_sqrt_h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(CMat(0.5 * (H + H.adjoint())));
  const RVec& ev = es.eigenvalues();
  if (!(ev(0) > 1e-12)) throw Error(ErrorCode::SingularAtPoint, "harmonic", "matrix is not positive definite");
  const CMat& V = es.eigenvectors();
  if (sqrt_h) *sqrt_h = V * ev.cwiseSqrt().cast<cplx>().asDiagonal() * V.adjoint();
  if (inv_sqrt_h) *inv_sqrt_h = V * ev.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() * V.adjoint();
}

UnitCandidate unit_candidate(const TransferAnalysis& ta, int grid_level) {
  UnitCandidate uc;
  const int n = ta.system().n(), d = ta.filter().d();
  uc.h = ta.project(MatTrigPoly::identity(n, d));
  const std::vector<RVec> pts = unit_grid(n, 1 << grid_level);
  const std::vector<CMat> vals = evaluate_grid(uc.h, pts);
  uc.cert.min_eig = std::numeric_limits<double>::infinity();
  uc.cert.argmin = pts.front();
  for (std::size_t t = 0; t < pts.size(); ++t) {
    const double e = min_herm_eig(vals[t]);
    if (e < uc.cert.min_eig) {
      uc.cert.min_eig = e;
      uc.cert.argmin = pts[t];
    }
  }
  uc.cert.passed = uc.cert.min_eig >= 1e-8;
  return uc;
}

HarmonicAlgebra::HarmonicAlgebra(const TransferAnalysis& ta, UnitCandidate unit, AlgebraOptions opt)
    : ta_(&ta), unit_(std::move(unit)), opt_(opt), M_(ta.fixed_dim()) {
  if (!unit_.cert.passed)
    throw Error(ErrorCode::NotInvertible, "harmonic",
                "unit candidate T1(I) is not invertible (min eigenvalue " + std::to_string(unit_.cert.min_eig) + ")");
  const MatTrigPoly I = MatTrigPoly::identity(ta.system().n(), ta.filter().d());
  exact_ = max_coeff_diff(unit_.h, I) < 1e-10;
  unit_coords_ = coords(unit_.h);
  adj_ = CMat::Zero(M_, M_);
  for (int i = 0; i < M_; ++i) adj_.col(i) = coords(basis()[static_cast<std::size_t>(i)].adjoint());
  table_.reserve(static_cast<std::size_t>(M_ * M_));
  for (int i = 0; i < M_; ++i)
    for (int j = 0; j < M_; ++j)
      table_.push_back(coords(star(basis()[static_cast<std::size_t>(i)], basis()[static_cast<std::size_t>(j)])));
}

CVec HarmonicAlgebra::coords(const MatTrigPoly& h) const { return ta_->coords(h); }

MatTrigPoly HarmonicAlgebra::sampled_star(const MatTrigPoly& a, const MatTrigPoly& b, int level) const {
  const int n = ta_->system().n();
  const int N = 1 << level;
  const std::vector<RVec> pts = unit_grid(n, N);
  const std::vector<CMat> av = evaluate_grid(a, pts), bv = evaluate_grid(b, pts), hv = evaluate_grid(unit_.h, pts);
  std::vector<CMat> prod(pts.size());
  parallel_for(Exec::parallel, static_cast<std::int64_t>(pts.size()), [&](std::int64_t t) {
    const auto i = static_cast<std::size_t>(t);
    prod[i] = av[i] * CMat(0.5 * (hv[i] + hv[i].adjoint())).ldlt().solve(bv[i]);
  });
  return ta_->project(MatTrigPoly::interpolate(n, N, prod));
}

MatTrigPoly HarmonicAlgebra::star(const MatTrigPoly& a, const MatTrigPoly& b) const {
  if (exact_) return ta_->project(poly_product(a, b));
  MatTrigPoly fine = sampled_star(a, b, opt_.grid_level);
  const MatTrigPoly coarse = sampled_star(a, b, opt_.grid_level - 1);
  const double diff = max_coeff_diff(fine, coarse);
  fit_residual_ = std::max(fit_residual_, diff);
  if (diff > opt_.fit_tol)
    throw Error(ErrorCode::FitResidualTooLarge, "harmonic",
                "sampled star product changed by " + std::to_string(diff) + " between grid levels");
  return fine;
}

CVec HarmonicAlgebra::star_coords(const CVec& a, const CVec& b) const {
  CVec out = CVec::Zero(M_);
  for (int i = 0; i < M_; ++i)
    for (int j = 0; j < M_; ++j) out += a[i] * b[j] * structure(i, j);
  return out;
}

CVec HarmonicAlgebra::adjoint_coords(const CVec& a) const { return adj_ * a.conjugate(); }

CMat HarmonicAlgebra::left_regular(const CVec& z) const {
  CMat L = CMat::Zero(M_, M_);
  for (int j = 0; j < M_; ++j)
    for (int i = 0; i < M_; ++i) L.col(j) += z[i] * structure(i, j);
  return L;
}

double HarmonicAlgebra::h_norm(const MatTrigPoly& a) const {
  const int n = ta_->system().n();
  const int N = 1 << opt_.grid_level;
  auto value = [&](const RVec& x) {
    CMat Hi;
    hermitian_roots(unit_.h.evaluate(x), nullptr, &Hi);
    return op_norm(CMat(Hi * a.evaluate(x) * Hi));
  };
  const std::vector<RVec> pts = unit_grid(n, N);
  std::vector<double> vals(pts.size());
  parallel_for(Exec::parallel, static_cast<std::int64_t>(pts.size()),
               [&](std::int64_t t) { vals[static_cast<std::size_t>(t)] = value(pts[static_cast<std::size_t>(t)]); });
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t top = std::min<std::size_t>(8, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::size_t i, std::size_t j) { return vals[i] != vals[j] ? vals[i] > vals[j] : i < j; });
  double best = vals[order[0]];
  for (std::size_t r = 0; r < top; ++r) best = std::max(best, refine_max(value, pts[order[r]], 1.0 / N));
  return best;
}

Wedderburn wedderburn(const HarmonicAlgebra& alg, double tol, std::uint64_t seed) {
  const int M = alg.dim();
  Wedderburn w;
  if (M == 0) return w;

  // Center: z with z * b_j = b_j * z for every basis element.
  CMat C(static_cast<Eigen::Index>(M) * M, M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) C.block(static_cast<Eigen::Index>(j) * M, i, M, 1) = alg.structure(i, j) - alg.structure(j, i);
  Eigen::JacobiSVD<CMat> svd(C, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thr = 1e-8 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  std::vector<CVec> center;
  for (Eigen::Index i = 0; i < M; ++i)
    if (i >= sv.size() || sv(i) < thr) center.push_back(svd.matrixV().col(i));
  w.center_dim = static_cast<int>(center.size());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<cplx> lambdas;
  std::vector<int> mult;
  CMat L;
  for (int attempt = 0; attempt < 8; ++attempt) {
    CVec z = CVec::Zero(M);
    for (const CVec& c : center) z += uni(rng) * c;
    z = 0.5 * (z + alg.adjoint_coords(z));
    L = alg.left_regular(z);
    Eigen::ComplexEigenSolver<CMat> es(L, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + M);
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    double scale = 1.0;
    for (cplx e : ev) scale = std::max(scale, std::abs(e));
    lambdas.clear();
    mult.clear();
    for (cplx e : ev) {
      bool placed = false;
      for (std::size_t c = 0; c < lambdas.size(); ++c)
        if (std::abs(lambdas[c] - e) < tol * scale * 10) {
          ++mult[c];
          placed = true;
          break;
        }
      if (!placed) {
        lambdas.push_back(e);
        mult.push_back(1);
      }
    }
    bool separated = true;
    for (std::size_t a = 0; a < lambdas.size(); ++a)
      for (std::size_t b = a + 1; b < lambdas.size(); ++b)
        if (std::abs(lambdas[a] - lambdas[b]) < 1e-3 * scale) separated = false;
    if (static_cast<int>(lambdas.size()) == w.center_dim && separated) break;
  }
  if (static_cast<int>(lambdas.size()) != w.center_dim)
    throw Error(ErrorCode::NonIntegralBlock, "harmonic",
                std::to_string(lambdas.size()) + " eigenvalue clusters for a center of dimension " +
                    std::to_string(w.center_dim));

  struct Block {
    int k;
    double key;
    CVec e;
  };
  std::vector<Block> blocks;
  const CVec u = alg.unit_coords();
  for (std::size_t c = 0; c < lambdas.size(); ++c) {
    CVec e = u;
    for (std::size_t o = 0; o < lambdas.size(); ++o) {
      if (o == c) continue;
      e = (L * e - lambdas[o] * e) / (lambdas[c] - lambdas[o]);
    }
    const int k = static_cast<int>(std::llround(std::sqrt(static_cast<double>(mult[c]))));
    if (k * k != mult[c])
      throw Error(ErrorCode::NonIntegralBlock, "harmonic",
                  "ideal of dimension " + std::to_string(mult[c]) + " is not a full matrix block");
    blocks.push_back({k, lambdas[c].real(), e});
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const Block& a, const Block& b) { return a.k != b.k ? a.k < b.k : a.key < b.key; });

  CVec sum = CVec::Zero(M);
  for (const Block& b : blocks) {
    w.blocks.push_back(b.k);
    w.idempotent_coords.push_back(b.e);
    w.central_idempotents.push_back(alg.element(b.e));
    sum += b.e;
  }
  w.sum_residual = (sum - u).cwiseAbs().maxCoeff();
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      CVec p = alg.star_coords(blocks[a].e, blocks[b].e);
      if (a == b) p -= blocks[a].e;
      w.orthogonality_residual = std::max(w.orthogonality_residual, p.cwiseAbs().maxCoeff());
    }
    for (int j = 0; j < M; ++j) {
      CVec ej = CVec::Zero(M);
      ej[j] = 1.0;
      w.centrality_residual = std::max(
          w.centrality_residual,
          (alg.star_coords(blocks[a].e, ej) - alg.star_coords(ej, blocks[a].e)).cwiseAbs().maxCoeff());
    }
  }
  return w;
}

ProjectionSet minimal_projections(const TransferAnalysis& ta, const ElReport& el, const ProductEvaluator& P,
                                  const HarmonicAlgebra* alg, bool strong, const ProjectionOptions& opt) {
  if (qmf_residual_exact(ta.filter(), ta.system()) > 1e-10)
    throw Error(ErrorCode::PreconditionFailed, "harmonic", "minimal projections require R1 = 1");
  if (!el.holds) throw Error(ErrorCode::PreconditionFailed, "harmonic", "minimal projections require E(l)");
  const int n = ta.system().n(), d = ta.filter().d();
  ProjectionSet out;
  const std::vector<CVec>& E1 = el.E1_basis;

  if (!strong || opt.cross_check_tol > 0) {
    CorrelationOptions co = opt.correlation;
    if (strong) co.tol = opt.cross_check_tol;
    out.lattice = correlation_matrix(ta, P, E1, co);
    out.lattice_available = true;
  }

  const MatTrigPoly unit = ta.project(MatTrigPoly::identity(n, d));
  const std::vector<RVec> pts = unit_grid(n, 1 << opt.grid_level);
  for (std::size_t i = 0; i < E1.size(); ++i) {
    MinimalProjection mp;
    mp.v = E1[i];
    if (strong) {
      mp.h = ta.project(MatTrigPoly::constant(n, E1[i] * E1[i].adjoint()));
      mp.route = "fast";
      if (out.lattice_available) mp.route_diff = max_coeff_diff(mp.h, out.lattice.h[i][i]);
    } else {
      mp.h = out.lattice.h[i][i];
      mp.route = "lattice";
    }
    if (alg) {
      mp.idempotency = max_coeff_diff(alg->star(mp.h, mp.h), mp.h);
      CMat cut(alg->dim(), alg->dim());
      for (int j = 0; j < alg->dim(); ++j)
        cut.col(j) = alg->coords(alg->star(alg->star(mp.h, alg->basis()[static_cast<std::size_t>(j)]), mp.h));
      mp.cut_dim = numeric_rank(cut, 1e-6);
    }
    const std::vector<CMat> diff = evaluate_grid(unit - mp.h, pts);
    mp.dominance_min_eig = std::numeric_limits<double>::infinity();
    for (const CMat& D : diff) mp.dominance_min_eig = std::min(mp.dominance_min_eig, min_herm_eig(D));
    out.projections.push_back(std::move(mp));
  }
  return out;
}

CMat psi_x0(const ElReport& el, const MatTrigPoly& a) {
  const int l = static_cast<int>(el.E1_basis.size());
  if (l == 0) throw Error(ErrorCode::PreconditionFailed, "harmonic", "E1 is empty");
  CMat U(a.d(), l);
  for (int i = 0; i < l; ++i) U.col(i) = el.E1_basis[static_cast<std::size_t>(i)];
  return U.adjoint() * a.evaluate(RVec::Zero(a.n())) * U;
}

PsiReport psi_check(const HarmonicAlgebra& alg, const ElReport& el, int samples, std::uint64_t seed) {
  if (!el.holds) throw Error(ErrorCode::PreconditionFailed, "harmonic", "evaluation morphism requires E(l)");
  PsiReport rep;
  const int M = alg.dim(), l = el.l, d = alg.unit().d(), n = alg.unit().n();
  rep.value = psi_x0(el, alg.unit());
  const CMat P0 = projector(el.E1_basis, d);
  CMat images(static_cast<Eigen::Index>(l) * l, M);
  for (int j = 0; j < M; ++j) {
    const MatTrigPoly& b = alg.basis()[static_cast<std::size_t>(j)];
    const CMat b0 = b.evaluate(RVec::Zero(n));
    rep.commutation_residual = std::max(rep.commutation_residual, (b0 * P0 - P0 * b0).cwiseAbs().maxCoeff());
    const CMat img = psi_x0(el, b);
    images.col(j) = Eigen::Map<const CVec>(img.data(), img.size());
  }
  rep.image_rank = numeric_rank(images, 1e-8);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int s = 0; s < samples; ++s) {
    CVec ca(M), cb(M);
    for (int i = 0; i < M; ++i) {
      ca[i] = cplx(nd(rng), nd(rng));
      cb[i] = cplx(nd(rng), nd(rng));
    }
    const MatTrigPoly a = alg.element(ca), b = alg.element(cb);
    const CMat lhs = psi_x0(el, alg.star(a, b));
    const CMat rhs = psi_x0(el, a) * psi_x0(el, b);
    rep.morphism_residual = std::max(rep.morphism_residual, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return rep;
}

cplx tau(const InvariantFunctional& fnl, const MatTrigPoly& f) {
  return fnl.v2.dot(f.evaluate(RVec::Zero(f.n())) * fnl.v1);
}

CMat renormalize_filter(const MatTrigPoly& m, const DilationSystem& sys, const MatTrigPoly& h, const RVec& x) {
  CMat hs, his;
  hermitian_roots(h.evaluate(x), &hs, nullptr);
  RVec ax = sys.apply(x);
  for (Eigen::Index c = 0; c < ax.size(); ++c) ax[c] -= std::floor(ax[c]);
  hermitian_roots(h.evaluate(ax), nullptr, &his);
  return hs * m.evaluate(x) * his;
}

double renormalized_residual(const MatTrigPoly& m, const DilationSystem& sys, const MatTrigPoly& h, int grid_level) {
  const std::vector<RVec> pts = unit_grid(sys.n(), 1 << grid_level);
  const int d = m.d();
  return max_over(Exec::parallel, static_cast<std::int64_t>(pts.size()), [&](std::int64_t t) {
    const RVec& x = pts[static_cast<std::size_t>(t)];
    CMat S = -CMat::Identity(d, d);
    for (int i = 0; i < sys.q(); ++i) {
      const CMat mt = renormalize_filter(m, sys, h, sys.inverse_branch(i, x));
      S += mt.adjoint() * mt;
    }
    return op_norm(S);
  });
}

}  // namespace mwh
