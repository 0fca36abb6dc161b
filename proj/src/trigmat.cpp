#include "mwh/trigmat.hpp"

#include <algorithm>
#include <cmath>

#include "mwh/error.hpp"
#include "mwh/kernels.hpp"

namespace mwh {

MatTrigPoly MatTrigPoly::constant(int n, const CMat& M) {
  MatTrigPoly p(n, static_cast<int>(M.rows()), static_cast<int>(M.cols()));
  p.set(Freq(static_cast<std::size_t>(n), 0), M);
  return p;
}

MatTrigPoly MatTrigPoly::monomial(const Freq& k, const CMat& M) {
  MatTrigPoly p(static_cast<int>(k.size()), static_cast<int>(M.rows()), static_cast<int>(M.cols()));
  p.set(k, M);
  return p;
}

CMat MatTrigPoly::coeff(const Freq& k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? CMat::Zero(rows_, cols_) : it->second;
}

void MatTrigPoly::add(const Freq& k, const CMat& M) {
  if (static_cast<int>(k.size()) != n_ || M.rows() != rows_ || M.cols() != cols_)
    throw Error(ErrorCode::DimensionMismatch, "trigmat", "coefficient shape does not match polynomial");
  auto [it, inserted] = coeffs_.try_emplace(k, M);
  if (!inserted) it->second += M;
}

void MatTrigPoly::set(const Freq& k, const CMat& M) {
  if (static_cast<int>(k.size()) != n_ || M.rows() != rows_ || M.cols() != cols_)
    throw Error(ErrorCode::DimensionMismatch, "trigmat", "coefficient shape does not match polynomial");
  coeffs_[k] = M;
}

MatTrigPoly& MatTrigPoly::prune(double tol) {
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (it->second.cwiseAbs().maxCoeff() <= tol)
      it = coeffs_.erase(it);
    else
      ++it;
  }
  return *this;
}

std::vector<Freq> MatTrigPoly::support() const {
  std::vector<Freq> s;
  s.reserve(coeffs_.size());
  for (const auto& kv : coeffs_) s.push_back(kv.first);
  return s;
}

int MatTrigPoly::degree() const {
  int d = 0;
  for (const auto& kv : coeffs_)
    for (int v : kv.first) d = std::max(d, std::abs(v));
  return d;
}

CMat MatTrigPoly::evaluate(const RVec& x) const {
  if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "trigmat", "point dimension mismatch");
  CMat out = CMat::Zero(rows_, cols_);
  for (const auto& [k, M] : coeffs_) {
    double ph = 0.0;
    for (int c = 0; c < n_; ++c) ph += k[static_cast<std::size_t>(c)] * (x[c] - std::floor(x[c]));
    out += std::polar(1.0, kTwoPi * ph) * M;
  }
  return out;
}

MatTrigPoly MatTrigPoly::adjoint() const {
  MatTrigPoly r(n_, cols_, rows_);
  for (const auto& [k, M] : coeffs_) {
    Freq nk = k;
    for (int& v : nk) v = -v;
    r.coeffs_.emplace(std::move(nk), M.adjoint());
  }
  return r;
}

void MatTrigPoly::check_same_shape(const MatTrigPoly& o) const {
  if (o.n_ != n_ || o.rows_ != rows_ || o.cols_ != cols_)
    throw Error(ErrorCode::DimensionMismatch, "trigmat", "polynomial shapes differ");
}

MatTrigPoly& MatTrigPoly::operator+=(const MatTrigPoly& o) {
  check_same_shape(o);
  for (const auto& [k, M] : o.coeffs_) add(k, M);
  return prune();
}

MatTrigPoly& MatTrigPoly::operator-=(const MatTrigPoly& o) {
  check_same_shape(o);
  for (const auto& [k, M] : o.coeffs_) add(k, -M);
  return prune();
}

MatTrigPoly& MatTrigPoly::operator*=(cplx s) {
  for (auto& kv : coeffs_) kv.second *= s;
  return prune();
}

double MatTrigPoly::max_abs() const {
  double m = 0.0;
  for (const auto& kv : coeffs_) m = std::max(m, kv.second.cwiseAbs().maxCoeff());
  return m;
}

MatTrigPoly MatTrigPoly::interpolate(int n, int N, const std::vector<CMat>& samples) {
  if (samples.empty()) throw Error(ErrorCode::DimensionMismatch, "trigmat", "no samples to interpolate");
  const int rows = static_cast<int>(samples.front().rows()), cols = static_cast<int>(samples.front().cols());
  const int F = (N % 2 == 0) ? N + 1 : N;
  const int kmin = (N % 2 == 0) ? -N / 2 : -(N - 1) / 2;

  std::vector<int> shape(static_cast<std::size_t>(n), N);
  std::vector<CMat> cur = samples;
  for (int c = 0; c < n; ++c) {
    std::vector<int> nshape = shape;
    nshape[static_cast<std::size_t>(c)] = F;
    std::size_t stride = 1;
    for (int e = 0; e < c; ++e) stride *= static_cast<std::size_t>(shape[static_cast<std::size_t>(e)]);
    std::size_t outer = 1;
    for (int e = c + 1; e < n; ++e) outer *= static_cast<std::size_t>(shape[static_cast<std::size_t>(e)]);
    std::vector<CMat> next(stride * static_cast<std::size_t>(F) * outer, CMat::Zero(rows, cols));
    std::vector<cplx> tw(static_cast<std::size_t>(F) * static_cast<std::size_t>(N));
    for (int t = 0; t < F; ++t) {
      const int k = kmin + t;
      const double w = (N % 2 == 0 && std::abs(k) * 2 == N) ? 0.5 : 1.0;
      for (int j = 0; j < N; ++j)
        tw[static_cast<std::size_t>(t * N + j)] =
            w / N * std::polar(1.0, -kTwoPi * static_cast<double>((static_cast<long long>(k) * j) % N) / N);
    }
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t s = 0; s < stride; ++s)
        for (int t = 0; t < F; ++t) {
          CMat acc = CMat::Zero(rows, cols);
          for (int j = 0; j < N; ++j)
            acc += tw[static_cast<std::size_t>(t * N + j)] *
                   cur[s + stride * (static_cast<std::size_t>(j) + static_cast<std::size_t>(N) * o)];
          next[s + stride * (static_cast<std::size_t>(t) + static_cast<std::size_t>(F) * o)] = std::move(acc);
        }
    cur = std::move(next);
    shape = nshape;
  }

  MatTrigPoly p(n, rows, cols);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (const CMat& M : cur) {
    Freq k(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) k[static_cast<std::size_t>(c)] = kmin + idx[static_cast<std::size_t>(c)];
    p.add(k, M);
    for (int c = 0; c < n; ++c) {
      if (++idx[static_cast<std::size_t>(c)] < F) break;
      idx[static_cast<std::size_t>(c)] = 0;
    }
  }
  return p.prune();
}

MatTrigPoly operator+(MatTrigPoly a, const MatTrigPoly& b) { return a += b; }
MatTrigPoly operator-(MatTrigPoly a, const MatTrigPoly& b) { return a -= b; }
MatTrigPoly operator*(cplx s, MatTrigPoly a) { return a *= s; }

MatTrigPoly poly_product(const MatTrigPoly& p, const MatTrigPoly& r) {
  if (p.n() != r.n() || p.cols() != r.rows())
    throw Error(ErrorCode::DimensionMismatch, "trigmat", "incompatible shapes in poly_product");
  MatTrigPoly out(p.n(), p.rows(), r.cols());
  for (const auto& [j, P] : p.coeffs())
    for (const auto& [k, R] : r.coeffs()) {
      Freq s = j;
      for (std::size_t c = 0; c < s.size(); ++c) s[c] += k[c];
      out.add(s, P * R);
    }
  return out.prune();
}

double max_coeff_diff(const MatTrigPoly& a, const MatTrigPoly& b) {
  double m = 0.0;
  for (const auto& [k, M] : a.coeffs()) m = std::max(m, (M - b.coeff(k)).cwiseAbs().maxCoeff());
  for (const auto& [k, M] : b.coeffs())
    if (!a.coeffs().count(k)) m = std::max(m, M.cwiseAbs().maxCoeff());
  return m;
}

double qmf_residual(const MatTrigPoly& m, const DilationSystem& sys, int grid_level) {
  if (m.n() != sys.n()) throw Error(ErrorCode::DimensionMismatch, "trigmat", "filter and dilation dimensions differ");
  return qmf_sweep(m, sys, unit_grid(sys.n(), 1 << grid_level));
}

CMat projector(const std::vector<CVec>& basis, int d) {
  CMat P = CMat::Zero(d, d);
  for (const CVec& v : basis) P += v * v.adjoint();
  return P;
}

ElReport el_condition(const MatTrigPoly& m, const DilationSystem& sys, double tol) {
  const int d = m.d();
  ElReport rep;
  const CMat a = m.evaluate(RVec::Zero(sys.n()));
  rep.norm_m0 = Eigen::JacobiSVD<CMat>(a).singularValues()(0);

  Eigen::ComplexEigenSolver<CMat> es(a, false);
  int alg = 0;
  double other_max = 0.0;
  bool other_peripheral = false;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const cplx lam = es.eigenvalues()[i];
    if (std::abs(lam - 1.0) < 1e-6) {
      ++alg;
    } else {
      other_max = std::max(other_max, std::abs(lam));
      if (std::abs(lam) >= 1.0 - 1e-9) other_peripheral = true;
    }
  }
  rep.spectral_margin = 1.0 - other_max;

  Eigen::JacobiSVD<CMat> svd(a - CMat::Identity(d, d), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int geo = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] < 1e-8) ++geo;

  if (alg > 0 && geo < alg)
    rep.reason = "DefectiveEigenvalue";
  else if (other_peripheral)
    rep.reason = "PeripheralExtra";
  else if (std::abs(rep.norm_m0 - 1.0) > tol)
    rep.reason = "NormNotOne";
  else if (alg == 0)
    rep.reason = "NoUnitEigenvalue";
  rep.holds = rep.reason.empty();
  rep.l = geo;

  // Canonical orthonormal basis: Gram-Schmidt on the projected unit vectors.
  std::vector<CVec> null;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] < 1e-8) null.push_back(svd.matrixV().col(i));
  const CMat P = projector(null, d);
  for (int i = 0; i < d && static_cast<int>(rep.E1_basis.size()) < geo; ++i) {
    CVec v = P.col(i);
    for (const CVec& u : rep.E1_basis) v -= u * u.dot(v);
    if (v.norm() > 1e-6) rep.E1_basis.push_back(v / v.norm());
  }

  const RVec zero = RVec::Zero(sys.n());
  for (const CVec& v : rep.E1_basis) {
    rep.adjoint_residual = std::max(rep.adjoint_residual, (a.adjoint() * v - v).norm());
    for (int j = 1; j < sys.q(); ++j)
      rep.annihilation_residual =
          std::max(rep.annihilation_residual, (m.evaluate(sys.inverse_branch(j, zero)) * v).norm());
  }
  return rep;
}

}  // namespace mwh
