#include "mwh/cascade.hpp"

#include <algorithm>
#include <cmath>

#include "mwh/error.hpp"

namespace mwh {

namespace {

double op_norm(const RMat& M) { return Eigen::JacobiSVD<RMat>(M).singularValues()(0); }
double op_norm(const CMat& M) { return M.size() ? Eigen::JacobiSVD<CMat>(M).singularValues()(0) : 0.0; }

CMat local_product(const FlatPoly& fp, FlatPoly::Workspace& ws, const RMat& Ainv, const RVec& x, int K, int d) {
  CMat P = CMat::Identity(d, d), mv(d, d);
  RVec y = x;
  for (int j = 0; j < K; ++j) {
    y = Ainv * y;
    fp.eval(y.data(), mv.data(), ws);
    P = mv * P;
  }
  return P;
}

IMat int_power(const IMat& A, int k) {
  IMat P = IMat::Identity(A.rows(), A.cols());
  for (int j = 0; j < k; ++j) P = P * A;
  return P;
}

// Odometer step over the box lo <= g <= hi; false once every point was visited.
template <class V>
bool next_in_box(V& g, const V& lo, const V& hi) {
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (g[c] < hi[c]) {
      ++g[c];
      return true;
    }
    g[c] = lo[c];
  }
  return false;
}

}  // namespace

ProductEvaluator::ProductEvaluator(const MatTrigPoly& m, const DilationSystem& sys, const ElReport& el,
                                   double qmf_exact, int max_depth)
    : m_(m), flat_(m), Ainv_(sys.A_inv()), n_(sys.n()), d_(m.d()), max_depth_(max_depth) {
  if (!(qmf_exact <= 1e-10))
    throw Error(ErrorCode::PreconditionFailed, "cascade", "infinite product requires R1 = 1");
  if (!el.holds) throw Error(ErrorCode::PreconditionFailed, "cascade", "infinite product requires E(l): " + el.reason);

  for (const auto& [k, M] : m.coeffs()) L_ += M.norm() * kTwoPi * to_rvec(k).norm();

  // C_A = sum_{j>=1} ||A^{-j}||: exact head plus a submultiplicative tail.
  std::vector<double> pw{1.0};
  RMat Pj = RMat::Identity(n_, n_);
  int J0a = 0;
  for (int j = 1; J0a == 0; ++j) {
    Pj = Pj * Ainv_;
    pw.push_back(op_norm(Pj));
    if (pw.back() <= 0.5) J0a = j;
    if (j > 100000) throw Error(ErrorCode::PreconditionFailed, "cascade", "A^{-j} does not contract");
  }
  double crude = 0.0;
  for (int r = 0; r < J0a; ++r) crude += pw[static_cast<std::size_t>(r)];
  crude = crude / (1.0 - pw[static_cast<std::size_t>(J0a)]) - 1.0;
  const int S = std::max(64, 8 * J0a);
  for (int j = static_cast<int>(pw.size()); j <= S; ++j) {
    Pj = Pj * Ainv_;
    pw.push_back(op_norm(Pj));
  }
  for (int j = 1; j <= S; ++j) CA_ += pw[static_cast<std::size_t>(j)];
  CA_ += pw[static_cast<std::size_t>(S)] * crude;

  // Power decay of m(0) towards the projection onto E1.
  P0_ = projector(el.E1_basis, d_);
  const CMat m0 = m.evaluate(RVec::Zero(n_));
  const CMat N = m0 - P0_;
  tail0_ = op_norm(CMat(CMat::Identity(d_, d_) - P0_));
  npow_.assign(1, 1.0);
  CMat Np = CMat::Identity(d_, d_);
  for (int r = 1;; ++r) {
    Np = Np * N;
    npow_.push_back(op_norm(Np));
    if (npow_.back() <= 0.5) {
      J0_ = r;
      break;
    }
    if (r > 100000) throw Error(ErrorCode::PreconditionFailed, "cascade", "powers of m(0) do not converge");
  }
  alpha_ = npow_.back();
  B_ = 0.0;
  for (int r = 1; r <= J0_; ++r) B_ = std::max(B_, npow_[static_cast<std::size_t>(r)]);
  tail_.resize(static_cast<std::size_t>(max_depth_) + 2);
  for (int p = 1; p <= max_depth_ + 1; ++p) {
    double t;
    if (p <= J0_) {
      t = alpha_ * B_;
      for (int r = p; r <= J0_; ++r) t = std::max(t, npow_[static_cast<std::size_t>(r)]);
    } else {
      t = std::pow(alpha_, (p - 1) / J0_) * B_;
    }
    tail_[static_cast<std::size_t>(p)] = t;
  }
  tail_[0] = std::max(tail0_, tail_[1]);
}

double ProductEvaluator::tail(int p) const {
  if (p <= max_depth_ + 1) return tail_[static_cast<std::size_t>(p)];
  return std::pow(alpha_, (p - 1) / J0_) * B_;
}

CMat ProductEvaluator::product(const RVec& x, int K) const {
  CMat P = CMat::Identity(d_, d_);
  RVec y = x;
  for (int j = 0; j < K; ++j) {
    y = Ainv_ * y;
    P = m_.evaluate(y) * P;
  }
  return P;
}

double ProductEvaluator::error_bound(const RVec& x, int K) const {
  double best = std::numeric_limits<double>::infinity();
  RVec y = x;
  for (int k = 0; k <= K; ++k) {
    best = std::min(best, 2.0 * L_ * CA_ * y.norm() + 2.0 * tail(K - k));
    y = Ainv_ * y;
  }
  return best;
}

ProductEvaluator::Workspace ProductEvaluator::workspace() const {
  const auto dd = static_cast<std::size_t>(d_ * d_);
  return Workspace{flat_.workspace(), std::vector<cplx>(dd), std::vector<cplx>(dd), std::vector<cplx>(dd),
                   RVec(n_), 0};
}

double ProductEvaluator::eval_into(const double* x, double tol, cplx* out, Workspace& ws) const {
  int pstar = 0;
  while (2.0 * tail(pstar) > 0.5 * tol) {
    if (++pstar > max_depth_)
      throw Error(ErrorCode::TolNotReached, "cascade", "power decay of m(0) too slow for the requested tolerance");
  }
  const double lip = 2.0 * L_ * CA_;
  for (int c = 0; c < n_; ++c) ws.y[c] = x[c];
  const int dd = d_ * d_;
  cplx* cur = ws.cur.data();
  for (int e = 0; e < dd; ++e) cur[e] = 0;
  for (int c = 0; c < d_; ++c) cur[c + c * d_] = 1.0;

  int kstar = -1;
  double split = 0.0;
  if (lip * ws.y.norm() <= 0.5 * tol) {
    kstar = 0;
    split = lip * ws.y.norm();
  }
  int j = 0;
  while (kstar < 0 || j < kstar + pstar) {
    if (j >= max_depth_) throw Error(ErrorCode::TolNotReached, "cascade", "depth budget exhausted before reaching tol");
    ws.y = Ainv_ * ws.y;
    ++j;
    flat_.eval(ws.y.data(), ws.mv.data(), ws.poly);
    if (d_ == 1) {
      cur[0] = ws.mv[0] * cur[0];
    } else {
      small_matmul(ws.mv.data(), cur, ws.tmp.data(), d_);
      std::swap(ws.cur, ws.tmp);
      cur = ws.cur.data();
    }
    if (kstar < 0) {
      const double b = lip * ws.y.norm();
      if (b <= 0.5 * tol) {
        kstar = j;
        split = b;
      }
    }
  }
  for (int e = 0; e < dd; ++e) out[e] = cur[e];
  ws.depth = j;
  return split + 2.0 * tail(pstar);
}

ProductEvaluation ProductEvaluator::evaluate(const RVec& x, double tol) const {
  ProductEvaluation pe;
  pe.x = x;
  pe.value = CMat(d_, d_);
  auto ws = workspace();
  eval_into(x.data(), tol, pe.value.data(), ws);
  pe.k = ws.depth;
  pe.err = error_bound(x, pe.k);
  return pe;
}

ProductEvaluation matrix_product_P(const MatTrigPoly& m, const DilationSystem& sys, const RVec& x, double tol) {
  const ElReport el = el_condition(m, sys, 1e-10);
  const ProductEvaluator P(m, sys, el, qmf_residual_exact(m, sys));
  return P.evaluate(x, tol);
}

double window_1d(double t) {
  const double a = std::abs(t);
  if (a >= 1.0) return 0.0;
  const double u = t - std::floor(t);
  return (1.0 - a) / std::sqrt((1.0 - u) * (1.0 - u) + u * u);
}

double window(const RVec& x) {
  double f = 1.0;
  for (Eigen::Index c = 0; c < x.size() && f != 0.0; ++c) f *= window_1d(x[c]);
  return f;
}

CascadeRun refinement_iterate(const ProductEvaluator& P, const MatTrigPoly& m, const DilationSystem& sys,
                              const MatTrigPoly& s0, int k, const std::vector<RVec>& grid, std::int64_t budget) {
  if (static_cast<std::int64_t>(grid.size()) * std::max(k, 1) > budget)
    throw Error(ErrorCode::BudgetExceeded, "cascade", "grid size times depth exceeds the cascade budget");
  const int d = m.d();
  if (s0.rows() != d || s0.cols() != 1)
    throw Error(ErrorCode::DimensionMismatch, "cascade", "starting section must be d x 1");
  CascadeRun run;
  run.k = k;
  run.grid = grid;
  run.samples.assign(grid.size(), CVec::Zero(d));
  run.limits.assign(grid.size(), CVec::Zero(d));
  const CVec v = s0.evaluate(RVec::Zero(sys.n()));
  std::vector<std::vector<double>> dist(grid.size()), incr(grid.size());

  parallel_for(Exec::parallel, static_cast<std::int64_t>(grid.size()), [&](std::int64_t t) {
    const auto ti = static_cast<std::size_t>(t);
    const RVec& x = grid[ti];
    const CVec limit = (v.adjoint() * P.evaluate(x, 1e-12).value).transpose();
    run.limits[ti] = limit;
    CMat Pk = CMat::Identity(d, d);
    RVec z = x;
    CVec prev = (s0.evaluate(z).adjoint() * Pk).transpose() * window(z);
    dist[ti].push_back((prev - limit).cwiseAbs().maxCoeff());
    incr[ti].push_back(0.0);
    for (int j = 1; j <= k; ++j) {
      z = sys.apply_inv(z);
      Pk = m.evaluate(z) * Pk;
      CVec cur = (s0.evaluate(z).adjoint() * Pk).transpose() * window(z);
      dist[ti].push_back((cur - limit).cwiseAbs().maxCoeff());
      incr[ti].push_back((cur - prev).cwiseAbs().maxCoeff());
      prev = std::move(cur);
    }
    run.samples[ti] = prev;
  });

  for (int j = 0; j <= k; ++j) {
    CascadeLevel lv;
    lv.k = j;
    for (std::size_t t = 0; t < grid.size(); ++t) {
      lv.sup_distance = std::max(lv.sup_distance, dist[t][static_cast<std::size_t>(j)]);
      lv.increment = std::max(lv.increment, incr[t][static_cast<std::size_t>(j)]);
    }
    run.levels.push_back(lv);
  }
  return run;
}

CMat correlation_at(const ProductEvaluator& P, const CVec& v1, const CVec& v2, const RVec& x, int radius,
                    double point_tol) {
  const int n = static_cast<int>(x.size()), d = P.d();
  CMat acc = CMat::Zero(d, d);
  std::vector<int> g(static_cast<std::size_t>(n), -radius);
  for (;;) {
    RVec y = x;
    for (int c = 0; c < n; ++c) y[c] += g[static_cast<std::size_t>(c)];
    const CMat Pv = P.evaluate(y, point_tol).value;
    acc += Pv.adjoint() * v2 * v1.adjoint() * Pv;
    int c = 0;
    while (c < n && g[static_cast<std::size_t>(c)] == radius) g[static_cast<std::size_t>(c++)] = -radius;
    if (c == n) break;
    ++g[static_cast<std::size_t>(c)];
  }
  return acc;
}

namespace {

struct ShellAcc {
  std::vector<cplx> h;
  double err = 0;
};

// Sum over {g : R_in < |g|_inf <= R} of u_j u_i^* for all pairs, at point x.
ShellAcc shell_sum(const ProductEvaluator& P, const std::vector<CVec>& vs, const RVec& x, int R_in, int R,
                   double point_tol, Exec ex) {
  const int n = static_cast<int>(x.size()), d = P.d(), L = static_cast<int>(vs.size());
  const std::size_t stride = static_cast<std::size_t>(d * d);
  const std::size_t hsize = static_cast<std::size_t>(L * L) * stride;
  const std::int64_t side = 2 * static_cast<std::int64_t>(R) + 1;
  std::int64_t total = 1;
  for (int c = 0; c < n; ++c) total *= side;
  const std::int64_t nb = (total + kReduceBlock - 1) / kReduceBlock;
  std::vector<ShellAcc> partial(static_cast<std::size_t>(nb));

  parallel_for(ex, nb, [&](std::int64_t b) {
    ShellAcc& acc = partial[static_cast<std::size_t>(b)];
    acc.h.assign(hsize, cplx(0));
    auto ws = P.workspace();
    CMat Pv(d, d);
    std::vector<CVec> u(static_cast<std::size_t>(L));
    RVec y(n);
    const std::int64_t hi = std::min(total, (b + 1) * kReduceBlock);
    for (std::int64_t idx = b * kReduceBlock; idx < hi; ++idx) {
      std::int64_t rem = idx;
      int gmax = 0;
      for (int c = 0; c < n; ++c) {
        const int gc = static_cast<int>(rem % side) - R;
        rem /= side;
        gmax = std::max(gmax, std::abs(gc));
        y[c] = x[c] + gc;
      }
      if (gmax <= R_in) continue;
      P.eval_into(y.data(), point_tol, Pv.data(), ws);
      const double eps = point_tol;
      acc.err += 2.0 * Pv.norm() * eps + eps * eps;
      for (int i = 0; i < L; ++i) u[static_cast<std::size_t>(i)] = Pv.adjoint() * vs[static_cast<std::size_t>(i)];
      for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
          cplx* H = acc.h.data() + static_cast<std::size_t>(i * L + j) * stride;
          const CVec& uj = u[static_cast<std::size_t>(j)];
          const CVec& ui = u[static_cast<std::size_t>(i)];
          for (int bcol = 0; bcol < d; ++bcol)
            for (int a = 0; a < d; ++a) H[a + bcol * d] += uj[a] * std::conj(ui[bcol]);
        }
    }
  });

  ShellAcc total_acc;
  total_acc.h.assign(hsize, cplx(0));
  for (const ShellAcc& p : partial) {
    for (std::size_t e = 0; e < hsize; ++e) total_acc.h[e] += p.h[e];
    total_acc.err += p.err;
  }
  return total_acc;
}

}  // namespace

CorrelationResult correlation_matrix(const TransferAnalysis& ta, const ProductEvaluator& P,
                                     const std::vector<CVec>& vs, const CorrelationOptions& opt) {
  if (ta.fixed_dim() == 0) throw Error(ErrorCode::PreconditionFailed, "cascade", "no harmonic maps to fit against");
  const int n = ta.system().n(), d = P.d(), L = static_cast<int>(vs.size());
  const std::size_t stride = static_cast<std::size_t>(d * d);
  CorrelationResult res;
  res.grid = 2 * ta.support().radius() + 2;
  res.point_tol = opt.tol * 1e-4;
  const std::vector<RVec> pts = unit_grid(n, res.grid);
  std::vector<std::vector<cplx>> acc(pts.size(), std::vector<cplx>(static_cast<std::size_t>(L * L) * stride, 0.0));
  std::vector<double> err(pts.size(), 0.0);

  int R_in = -1, R = opt.R0;
  for (int shell = 0;; ++shell) {
    std::int64_t count = 1;
    for (int c = 0; c < n; ++c) count *= 2 * static_cast<std::int64_t>(R) + 1;
    if (count > opt.point_budget)
      throw Error(ErrorCode::TailBoundNotMet, "cascade",
                  "lattice sum needs more than " + std::to_string(opt.point_budget) + " points per grid point (radius " +
                      std::to_string(R) + ")");
    double contrib = 0.0;
    for (std::size_t t = 0; t < pts.size(); ++t) {
      const ShellAcc s = shell_sum(P, vs, pts[t], R_in, R, res.point_tol, opt.exec);
      err[t] += s.err;
      for (int pr = 0; pr < L * L; ++pr) {
        double fro = 0.0;
        for (std::size_t e = 0; e < stride; ++e) {
          const cplx z = s.h[static_cast<std::size_t>(pr) * stride + e];
          acc[t][static_cast<std::size_t>(pr) * stride + e] += z;
          fro += std::norm(z);
        }
        contrib = std::max(contrib, std::sqrt(fro));
      }
    }
    res.shell_contrib.push_back(contrib);
    res.radius = R;
    if (shell > 0 && contrib < opt.tol / 10) break;
    R_in = R;
    R *= 2;
  }
  for (double e : err) res.sample_error_bound = std::max(res.sample_error_bound, e);

  // Least-squares fit in the fixed basis.
  const int M = ta.fixed_dim();
  const Eigen::Index rows = static_cast<Eigen::Index>(pts.size() * stride);
  CMat D(rows, M);
  for (int b = 0; b < M; ++b) {
    const std::vector<CMat> vals = evaluate_grid(ta.spectral().fixed_right[static_cast<std::size_t>(b)], pts);
    for (std::size_t t = 0; t < pts.size(); ++t)
      for (std::size_t e = 0; e < stride; ++e)
        D(static_cast<Eigen::Index>(t * stride + e), b) = vals[t].data()[e];
  }
  const auto qr = D.colPivHouseholderQr();
  res.h.assign(static_cast<std::size_t>(L), std::vector<MatTrigPoly>(static_cast<std::size_t>(L)));
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      CVec y(rows);
      for (std::size_t t = 0; t < pts.size(); ++t)
        for (std::size_t e = 0; e < stride; ++e)
          y[static_cast<Eigen::Index>(t * stride + e)] = acc[t][static_cast<std::size_t>(i * L + j) * stride + e];
      const CVec c = qr.solve(y);
      res.fit_residual = std::max(res.fit_residual, (D * c - y).cwiseAbs().maxCoeff());
      MatTrigPoly h = ta.from_coords(c);
      res.harmonic_residual = std::max(res.harmonic_residual, max_coeff_diff(ta.apply_R(h), h));
      res.h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::move(h);
    }
  return res;
}

MatTrigPoly correlation(const TransferAnalysis& ta, const ProductEvaluator& P, const CVec& v1, const CVec& v2,
                        const CorrelationOptions& opt) {
  return correlation_matrix(ta, P, {v1, v2}, opt).h[0][1];
}

StrongCertificate strong_convergence_certificate(const TransferAnalysis& ta, const ElReport& el,
                                                 const MatTrigPoly& unit, int kmax, double tol,
                                                 std::int64_t budget) {
  StrongCertificate sc;
  const SpectralData& sd = ta.spectral();
  sc.sole_peripheral = !sd.peripheral.empty();
  for (cplx lam : sd.peripheral)
    if (std::abs(lam - 1.0) > 1e-6) sc.sole_peripheral = false;
  sc.dim = ta.fixed_dim();
  sc.l = el.l;
  sc.dim_ok = el.holds && sc.dim == sc.l * sc.l;

  const MatTrigPoly& m = ta.filter();
  const DilationSystem& sys = ta.system();
  const int n = sys.n(), d = m.d(), q = sys.q();
  const FlatPoly fp(m);
  auto ws = fp.workspace();
  const RMat& Ainv = sys.A_inv();

  sc.decay_ok = el.holds;
  std::int64_t words = 1;
  for (int k = 1; k <= kmax && el.holds; ++k) {
    words *= q;
    if (words > budget) break;
    const IMat Ak = int_power(sys.A(), k);
    const RMat Akr = Ak.cast<double>();
    const RMat Akinv = Akr.inverse();
    std::vector<std::int64_t> box(static_cast<std::size_t>(n));
    std::int64_t count = 1;
    for (int r = 0; r < n; ++r) {
      box[static_cast<std::size_t>(r)] = Ak.row(r).cwiseAbs().sum();
      count *= 2 * box[static_cast<std::size_t>(r)] + 1;
    }
    if (count > budget * (std::int64_t{1} << n)) break;
    sc.kmax_used = k;
    double worst_direct = 0.0, worst_adj = 0.0;
    for (const CVec& v : el.E1_basis) {
      // Direct: sum_g |<v, P_k(g) v> f(A^{-k} g) - delta_g|^2.
      double direct = 0.0, norm2 = 0.0;
      std::vector<std::int64_t> blo(box.size());
      for (std::size_t r = 0; r < box.size(); ++r) blo[r] = -box[r];
      std::vector<std::int64_t> g = blo;
      for (;;) {
        RVec gv(n);
        for (int r = 0; r < n; ++r) gv[r] = static_cast<double>(g[static_cast<std::size_t>(r)]);
        const RVec y = Akinv * gv;
        if (y.cwiseAbs().maxCoeff() < 1.0) {
          const cplx val = v.dot(local_product(fp, ws, Ainv, gv, k, d) * v) * window(y);
          const bool origin = gv.isZero();
          direct += std::norm(val - (origin ? 1.0 : 0.0));
          norm2 += std::norm(val);
        }
        if (!next_in_box(g, blo, box)) break;
      }
      // Adjoint formula for the cross term <W v, M^k W v>'(0).
      CVec adj = CVec::Zero(d);
      std::vector<int> word(static_cast<std::size_t>(k), 0);
      for (;;) {
        IVec omega = IVec::Zero(n);
        IMat Apow = IMat::Identity(n, n);
        for (int t = 0; t < k; ++t) {
          omega += Apow * sys.digits()[static_cast<std::size_t>(word[static_cast<std::size_t>(t)])];
          Apow = Apow * sys.A();
        }
        const RVec om = omega.cast<double>();
        const RVec yw = Akinv * om;
        cplx inner = 0.0;
        std::vector<int> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
        for (int r = 0; r < n; ++r) {
          lo[static_cast<std::size_t>(r)] = static_cast<int>(std::floor(-1.0 - yw[r])) + 1;
          hi[static_cast<std::size_t>(r)] = static_cast<int>(std::ceil(1.0 - yw[r])) - 1;
        }
        std::vector<int> h = lo;
        bool nonempty = true;
        for (int r = 0; r < n; ++r)
          if (lo[static_cast<std::size_t>(r)] > hi[static_cast<std::size_t>(r)]) nonempty = false;
        while (nonempty) {
          RVec hv(n);
          for (int r = 0; r < n; ++r) hv[r] = h[static_cast<std::size_t>(r)];
          const RVec pt = yw + hv;
          const double fw = window(pt);
          if (fw != 0.0) {
            IVec hi_v(n);
            for (int r = 0; r < n; ++r) hi_v[r] = h[static_cast<std::size_t>(r)];
            const IVec img = omega + Ak * hi_v;
            const double F = window(img.cast<double>());
            inner += fw * F;
          }
          if (!next_in_box(h, lo, hi)) break;
        }
        if (inner != 0.0) adj += local_product(fp, ws, Ainv, om, k, d).adjoint() * v * inner;
        int t = 0;
        while (t < k && word[static_cast<std::size_t>(t)] == q - 1) word[static_cast<std::size_t>(t++)] = 0;
        if (t == k) break;
        ++word[static_cast<std::size_t>(t)];
      }
      const cplx cross = adj.dot(v);
      const double via_adj = norm2 - 2.0 * cross.real() + 1.0;
      worst_direct = std::max(worst_direct, direct);
      worst_adj = std::max(worst_adj, via_adj);
      if (direct > tol || std::abs(direct - via_adj) > tol) sc.decay_ok = false;
    }
    sc.tau_direct.push_back(worst_direct);
    sc.tau_adjoint.push_back(worst_adj);
  }
  if (sc.kmax_used == 0) sc.decay_ok = false;

  if (!sc.sole_peripheral) sc.failed_clauses.push_back("sole_peripheral");
  if (!sc.dim_ok) sc.failed_clauses.push_back("dim");
  if (!sc.decay_ok) sc.failed_clauses.push_back("decay");
  if (!sc.failed_clauses.empty()) sc.failed_clause = sc.failed_clauses.front();
  sc.pass = sc.failed_clauses.empty();
  if (sc.pass) {
    MatTrigPoly sum(n, d);
    for (const CVec& v : el.E1_basis) sum += ta.project(MatTrigPoly::constant(n, v * v.adjoint()));
    sc.unit_sum_residual = max_coeff_diff(sum, unit);
  }
  return sc;
}

double idempotency_defect(const MatTrigPoly& h, const RVec& x) {
  const CMat H = h.evaluate(x);
  return op_norm(CMat(H * H - H));
}

PmraCertificate pmra_certificate(const MatTrigPoly& h, int grid_per_dim, double tol) {
  PmraCertificate pc;
  const std::vector<RVec> pts = unit_grid(h.n(), grid_per_dim);
  const std::vector<CMat> vals = evaluate_grid(h, pts);
  pc.worst_point = pts.front();
  for (std::size_t t = 0; t < pts.size(); ++t) {
    const double def = op_norm(CMat(vals[t] * vals[t] - vals[t]));
    if (def > pc.idempotency_defect) {
      pc.idempotency_defect = def;
      pc.worst_point = pts[t];
    }
  }
  pc.origin_norm = op_norm(h.evaluate(RVec::Zero(h.n())));
  pc.idempotent = pc.idempotency_defect <= tol;
  pc.nonvanishing = pc.origin_norm > tol;
  pc.pass = pc.idempotent && pc.nonvanishing;
  return pc;
}

cplx apply_W(const RankOneW& W, const MatTrigPoly& s, const RVec& y) {
  return W.section.evaluate(y).col(0).dot(s.evaluate(y).col(0)) * window(y - W.shift);
}

cplx apply_MW(const MatTrigPoly& m, const DilationSystem& sys, const RankOneW& W, const MatTrigPoly& s,
              const RVec& y) {
  const RVec z = sys.apply_inv(y);
  const double f = window(z - W.shift);
  if (f == 0.0) return 0.0;
  const CVec ms = m.evaluate(z) * s.evaluate(y).col(0);
  return W.section.evaluate(z).col(0).dot(ms) * f;
}

CMat gram_bundle(const RankOneW& W1, const RankOneW& W2, const RVec& x) {
  const int n = static_cast<int>(x.size());
  // Both windows live in shift + (-1,1)^n, so a small box of g suffices.
  double phi = 0.0;
  std::vector<int> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    lo[static_cast<std::size_t>(c)] = static_cast<int>(std::floor(W1.shift[c] - 1.0 - x[c]));
    hi[static_cast<std::size_t>(c)] = static_cast<int>(std::ceil(W1.shift[c] + 1.0 - x[c]));
  }
  std::vector<int> g = lo;
  for (;;) {
    RVec y = x;
    for (int c = 0; c < n; ++c) y[c] += g[static_cast<std::size_t>(c)];
    phi += window(y - W1.shift) * window(y - W2.shift);
    if (!next_in_box(g, lo, hi)) break;
  }
  const CVec s1 = W1.section.evaluate(x).col(0), s2 = W2.section.evaluate(x).col(0);
  return phi * s1 * s2.adjoint();
}

cplx sampled_gram_MW(const MatTrigPoly& m, const DilationSystem& sys, const RankOneW& W1, const RankOneW& W2,
                     const MatTrigPoly& s, const MatTrigPoly& sp, const RVec& x) {
  const int n = sys.n();
  const RVec Ac = sys.apply(W1.shift);
  std::vector<int> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    const double S = sys.A_real().row(r).cwiseAbs().sum();
    lo[static_cast<std::size_t>(r)] = static_cast<int>(std::floor(Ac[r] - S - x[r])) - 1;
    hi[static_cast<std::size_t>(r)] = static_cast<int>(std::ceil(Ac[r] + S - x[r])) + 1;
  }
  cplx acc = 0.0;
  std::vector<int> g = lo;
  for (;;) {
    RVec y = x;
    for (int r = 0; r < n; ++r) y[r] += g[static_cast<std::size_t>(r)];
    const cplx a = apply_MW(m, sys, W1, s, y);
    if (a != 0.0) acc += std::conj(a) * apply_MW(m, sys, W2, sp, y);
    if (!next_in_box(g, lo, hi)) break;
  }
  return acc;
}

}  // namespace mwh
