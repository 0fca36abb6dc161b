#include "mwh/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mwh {

SupportSet::SupportSet(std::vector<Freq> freqs) : freqs_(std::move(freqs)) {
  std::sort(freqs_.begin(), freqs_.end());
  freqs_.erase(std::unique(freqs_.begin(), freqs_.end()), freqs_.end());
  for (std::size_t i = 0; i < freqs_.size(); ++i) index_.emplace(freqs_[i], static_cast<int>(i));
}

int SupportSet::index_of(const Freq& k) const {
  auto it = index_.find(k);
  return it == index_.end() ? -1 : it->second;
}

int SupportSet::radius() const {
  int r = 0;
  for (const Freq& k : freqs_)
    for (int v : k) r = std::max(r, std::abs(v));
  return r;
}

MatTrigPoly transfer_apply(const MatTrigPoly& m, const DilationSystem& sys, const MatTrigPoly& h) {
  if (m.d() != h.rows() || h.rows() != h.cols() || m.n() != h.n() || m.n() != sys.n())
    throw Error(ErrorCode::DimensionMismatch, "transfer", "filter and argument shapes differ");
  const MatTrigPoly F = poly_product(poly_product(m.adjoint(), h), m);
  MatTrigPoly out(h.n(), h.d());
  const double q = sys.q();
  for (const auto& [t, M] : F.coeffs()) {
    if (auto s = sys.transpose_preimage(to_ivec(t))) out.add(to_freq(*s), q * M);
  }
  return out.prune();
}

std::vector<Freq> difference_set(const MatTrigPoly& m) {
  std::set<Freq> D;
  for (const auto& a : m.coeffs())
    for (const auto& b : m.coeffs()) {
      Freq k = a.first;
      for (std::size_t c = 0; c < k.size(); ++c) k[c] -= b.first[c];
      D.insert(k);
    }
  if (D.empty()) D.insert(Freq(static_cast<std::size_t>(m.n()), 0));
  return {D.begin(), D.end()};
}

SupportSet close_support(const MatTrigPoly& m, const DilationSystem& sys, std::vector<Freq> seed) {
  const std::vector<Freq> D = difference_set(m);
  std::set<Freq> K(seed.begin(), seed.end());
  K.insert(Freq(static_cast<std::size_t>(sys.n()), 0));
  std::vector<Freq> work(K.begin(), K.end());
  while (!work.empty()) {
    const Freq s = work.back();
    work.pop_back();
    for (const Freq& d : D) {
      Freq t = s;
      for (std::size_t c = 0; c < t.size(); ++c) t[c] += d[c];
      if (auto u = sys.transpose_preimage(to_ivec(t))) {
        Freq uf = to_freq(*u);
        if (K.insert(uf).second) work.push_back(std::move(uf));
      }
    }
  }
  return SupportSet({K.begin(), K.end()});
}

bool is_closed(const MatTrigPoly& m, const DilationSystem& sys, const SupportSet& K) {
  if (!K.contains(Freq(static_cast<std::size_t>(sys.n()), 0))) return false;
  const std::vector<Freq> D = difference_set(m);
  for (const Freq& s : K.freqs())
    for (const Freq& d : D) {
      Freq t = s;
      for (std::size_t c = 0; c < t.size(); ++c) t[c] += d[c];
      if (auto u = sys.transpose_preimage(to_ivec(t)))
        if (!K.contains(to_freq(*u))) return false;
    }
  return true;
}

SupportSet invariant_support(const MatTrigPoly& m, const DilationSystem& sys) {
  const std::vector<Freq> D = difference_set(m);
  double dmax = 0.0;
  for (const Freq& d : D) dmax = std::max(dmax, sys.freq_norm(to_rvec(d)));
  const double theta = sys.theta();
  const double r = theta * dmax / (1.0 - theta) + 1e-9;
  // Both candidate frequency norms dominate the max-norm.
  const int R = static_cast<int>(std::floor(r));
  const int n = sys.n();
  std::vector<Freq> ball;
  Freq s(static_cast<std::size_t>(n), -R);
  for (;;) {
    if (sys.freq_norm(to_rvec(s)) <= r) ball.push_back(s);
    int c = 0;
    while (c < n && s[static_cast<std::size_t>(c)] == R) s[static_cast<std::size_t>(c++)] = -R;
    if (c == n) break;
    ++s[static_cast<std::size_t>(c)];
  }
  return close_support(m, sys, std::move(ball));
}

TransitionOperator::TransitionOperator(SupportSet K, int n, int d, CMat matrix)
    : K_(std::move(K)), n_(n), d_(d), matrix_(std::move(matrix)) {}

BasisTriple TransitionOperator::basis(Eigen::Index idx) const {
  const auto dd = static_cast<Eigen::Index>(d_);
  return {static_cast<int>(idx / (dd * dd)), static_cast<int>((idx / dd) % dd), static_cast<int>(idx % dd)};
}

CVec TransitionOperator::to_vector(const MatTrigPoly& h) const {
  if (h.rows() != d_ || h.cols() != d_) throw Error(ErrorCode::DimensionMismatch, "transfer", "matrix size differs");
  CVec v = CVec::Zero(static_cast<Eigen::Index>(K_.size()) * d_ * d_);
  for (const auto& [k, M] : h.coeffs()) {
    const int s = K_.index_of(k);
    if (s < 0) throw Error(ErrorCode::SupportNotClosed, "transfer", "coefficient outside the invariant support");
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) v[index(s, a, b)] = M(a, b);
  }
  return v;
}

MatTrigPoly TransitionOperator::from_vector(const CVec& v) const {
  MatTrigPoly h(n_, d_);
  for (std::size_t s = 0; s < K_.size(); ++s) {
    CMat M(d_, d_);
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) M(a, b) = v[index(static_cast<int>(s), a, b)];
    h.add(K_.freqs()[s], M);
  }
  return h.prune();
}

TransitionOperator transition_operator(const MatTrigPoly& m, const DilationSystem& sys, const SupportSet& K) {
  const int d = m.d();
  const Eigen::Index N = static_cast<Eigen::Index>(K.size()) * d * d;
  if (N > kMaxTransitionSize)
    throw Error(ErrorCode::BudgetExceeded, "transfer",
                "transition matrix of size " + std::to_string(N) + " exceeds " + std::to_string(kMaxTransitionSize));
  if (!is_closed(m, sys, K)) throw Error(ErrorCode::SupportNotClosed, "transfer", "support set is not R-invariant");
  TransitionOperator T(K, m.n(), d, CMat::Zero(N, N));
  CMat mat = CMat::Zero(N, N);
  for (std::size_t s = 0; s < K.size(); ++s)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        CMat E = CMat::Zero(d, d);
        E(a, b) = 1.0;
        const MatTrigPoly Rh = transfer_apply(m, sys, MatTrigPoly::monomial(K.freqs()[s], E));
        mat.col(T.index(static_cast<int>(s), a, b)) = T.to_vector(Rh);
      }
  return TransitionOperator(K, m.n(), d, std::move(mat));
}

CMat cesaro_matrix(const CMat& T, int log2k) {
  CMat S = T, P = T;
  for (int j = 0; j < log2k; ++j) {
    S += P * S;
    P = P * P;
  }
  return S / std::ldexp(1.0, log2k);
}

double ess_radius_bound(const DilationSystem& sys) {
  Eigen::EigenSolver<RMat> es(sys.A_inv(), false);
  double sr = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) sr = std::max(sr, std::abs(es.eigenvalues()[i]));
  return std::max(sys.theta(), sr) + 1e-9;
}

namespace {

constexpr double kClusterTol = 1e-6;
constexpr int kCesaroLog2 = 24;
constexpr Eigen::Index kCesaroMaxSize = 256;

int nullity(const CMat& M, double thr) {
  Eigen::BDCSVD<CMat> svd(M);
  const auto& sv = svd.singularValues();
  int k = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] < thr) ++k;
  return k;
}

}  // namespace

SpectralData spectral_data(const TransitionOperator& T, const DilationSystem& sys, double tol) {
  const CMat& M = T.matrix();
  const Eigen::Index N = M.rows();
  SpectralData sd;
  sd.theta = sys.theta();
  sd.ess_radius = ess_radius_bound(sys);

  Eigen::ComplexEigenSolver<CMat> es(M, false);
  for (Eigen::Index i = 0; i < N; ++i) sd.eigenvalues.push_back(es.eigenvalues()[i]);
  std::sort(sd.eigenvalues.begin(), sd.eigenvalues.end(), [](cplx a, cplx b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });

  const double thr = 1e-7 * std::max(1.0, M.cwiseAbs().maxCoeff());
  std::vector<std::vector<cplx>> clusters;
  for (cplx lam : sd.eigenvalues) {
    if (std::abs(lam) < 1.0 - kClusterTol) continue;
    sd.peripheral.push_back(lam);
    bool placed = false;
    for (auto& c : clusters)
      if (std::abs(c.front() - lam) < kClusterTol) {
        c.push_back(lam);
        placed = true;
        break;
      }
    if (!placed) clusters.push_back({lam});
  }
  int unit_mult = 0;
  for (const auto& c : clusters) {
    cplx mean = 0;
    for (cplx v : c) mean += v;
    mean /= static_cast<double>(c.size());
    const int geo = nullity(M - mean * CMat::Identity(N, N), thr);
    if (geo < static_cast<int>(c.size())) sd.semisimple_peripheral = false;
    if (std::abs(mean - 1.0) < kClusterTol) unit_mult = static_cast<int>(c.size());
  }
  if (!sd.semisimple_peripheral)
    throw DefectivePeripheralError("a peripheral eigenvalue of the transition matrix is defective", sd.eigenvalues);

  const Eigen::Index Mdim = unit_mult;
  sd.T1 = CMat::Zero(N, N);
  sd.fixed_basis = CMat::Zero(N, Mdim);
  sd.fixed_left = CMat::Zero(Mdim, N);
  if (Mdim > 0) {
    Eigen::BDCSVD<CMat> svd(M - CMat::Identity(N, N), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const CMat Vr = svd.matrixV().rightCols(Mdim);
    const CMat Wl = svd.matrixU().rightCols(Mdim);

    Eigen::ColPivHouseholderQR<CMat> qr(Vr.adjoint());
    CMat sub(Mdim, Mdim);
    for (Eigen::Index j = 0; j < Mdim; ++j) {
      sd.pivots.push_back(qr.colsPermutation().indices()[j]);
    }
    std::sort(sd.pivots.begin(), sd.pivots.end());
    for (Eigen::Index j = 0; j < Mdim; ++j) sub.row(j) = Vr.row(sd.pivots[static_cast<std::size_t>(j)]);
    CMat B = Vr * sub.inverse();
    for (Eigen::Index i = 0; i < B.size(); ++i) {
      cplx& z = B.data()[i];
      if (std::abs(z.real()) < 1e-15) z.real(0.0);
      if (std::abs(z.imag()) < 1e-15) z.imag(0.0);
    }
    sd.fixed_basis = B;
    sd.fixed_left = (Wl.adjoint() * B).inverse() * Wl.adjoint();
    sd.T1 = B * sd.fixed_left;
    for (Eigen::Index j = 0; j < Mdim; ++j) sd.fixed_right.push_back(T.from_vector(B.col(j)));
  }
  (void)tol;

  if (N <= kCesaroMaxSize) sd.cesaro_defect = (sd.T1 - cesaro_matrix(M, kCesaroLog2)).cwiseAbs().maxCoeff();
  return sd;
}

TransferAnalysis::TransferAnalysis(MatTrigPoly m, DilationSystem sys, double tol)
    : m_(std::move(m)),
      sys_(std::move(sys)),
      T_(transition_operator(m_, sys_, invariant_support(m_, sys_))),
      spec_(spectral_data(T_, sys_, tol)) {}

TransferAnalysis::TransferAnalysis(MatTrigPoly m, DilationSystem sys, TransitionOperator T, SpectralData spec)
    : m_(std::move(m)), sys_(std::move(sys)), T_(std::move(T)), spec_(std::move(spec)) {}

MatTrigPoly TransferAnalysis::project(const MatTrigPoly& p) const {
  MatTrigPoly h = p;
  for (int it = 0;; ++it) {
    bool inside = true;
    for (const auto& kv : h.coeffs())
      if (!support().contains(kv.first)) {
        inside = false;
        break;
      }
    if (inside) break;
    if (it == 64) throw Error(ErrorCode::SupportNotClosed, "transfer", "R iterates did not enter the invariant support");
    h = apply_R(h);
  }
  return T_.from_vector(spec_.T1 * T_.to_vector(h));
}

CVec TransferAnalysis::coords(const MatTrigPoly& h, double* resid) const {
  const CVec v = T_.to_vector(h);
  if (fixed_dim() == 0) {
    if (resid) *resid = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    return CVec();
  }
  const CVec c = spec_.fixed_basis.colPivHouseholderQr().solve(v);
  if (resid) *resid = (spec_.fixed_basis * c - v).cwiseAbs().maxCoeff();
  return c;
}

MatTrigPoly TransferAnalysis::from_coords(const CVec& c) const { return T_.from_vector(spec_.fixed_basis * c); }

CMat transfer_pointwise(const MatTrigPoly& m, const DilationSystem& sys, const MatFunction& f, const RVec& x) {
  CMat acc = CMat::Zero(m.d(), m.d());
  for (int i = 0; i < sys.q(); ++i) {
    const RVec y = sys.inverse_branch(i, x);
    const CMat my = m.evaluate(y);
    acc += my.adjoint() * f(y) * my;
  }
  return acc;
}

CMat cesaro_apply(const MatTrigPoly& m, const DilationSystem& sys, const MatFunction& f, const RVec& x, int k,
                  std::int64_t budget) {
  struct Node {
    RVec y;
    CMat W;
  };
  const int d = m.d();
  std::vector<Node> level{{x, CMat::Identity(d, d)}};
  CMat acc = CMat::Zero(d, d);
  for (int j = 1; j <= k && !level.empty(); ++j) {
    std::vector<Node> next;
    for (const Node& nd : level)
      for (int i = 0; i < sys.q(); ++i) {
        RVec z = sys.inverse_branch(i, nd.y);
        CMat W = m.evaluate(z) * nd.W;
        if (W.norm() <= 1e-13) continue;
        if (static_cast<std::int64_t>(next.size()) >= budget)
          throw Error(ErrorCode::BudgetExceeded, "transfer",
                      "Cesaro preimage tree exceeds " + std::to_string(budget) + " live branches at depth " +
                          std::to_string(j));
        acc += W.adjoint() * f(z) * W;
        next.push_back({std::move(z), std::move(W)});
      }
    level = std::move(next);
  }
  return acc / static_cast<double>(k);
}

double qmf_residual_exact(const MatTrigPoly& m, const DilationSystem& sys) {
  const MatTrigPoly one = MatTrigPoly::identity(m.n(), m.d());
  return max_coeff_diff(transfer_apply(m, sys, one), one);
}

}  // namespace mwh
