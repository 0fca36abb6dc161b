#include "mwh/kernels.hpp"

#include <cmath>

namespace mwh {

FlatPoly::FlatPoly(const MatTrigPoly& p) : n_(p.n()), rows_(p.rows()), cols_(p.cols()) {
  terms_ = static_cast<int>(p.coeffs().size());
  lo_.assign(static_cast<std::size_t>(n_), 0);
  std::vector<int> hi(static_cast<std::size_t>(n_), 0);
  bool first = true;
  for (const auto& [k, M] : p.coeffs()) {
    for (int c = 0; c < n_; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      if (first || k[cc] < lo_[cc]) lo_[cc] = k[cc];
      if (first || k[cc] > hi[cc]) hi[cc] = k[cc];
    }
    first = false;
  }
  span_.resize(static_cast<std::size_t>(n_));
  offset_.resize(static_cast<std::size_t>(n_));
  for (int c = 0; c < n_; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    span_[cc] = hi[cc] - lo_[cc] + 1;
    offset_[cc] = pow_size_;
    pow_size_ += span_[cc];
  }
  const int rc = rows_ * cols_;
  freq_.reserve(static_cast<std::size_t>(terms_ * n_));
  coeff_.reserve(static_cast<std::size_t>(terms_ * rc));
  for (const auto& [k, M] : p.coeffs()) {
    for (int c = 0; c < n_; ++c)
      freq_.push_back(offset_[static_cast<std::size_t>(c)] + k[static_cast<std::size_t>(c)] - lo_[static_cast<std::size_t>(c)]);
    for (int e = 0; e < rc; ++e) coeff_.push_back(M.data()[e]);
  }
}

void FlatPoly::eval(const double* x, cplx* out, Workspace& ws) const {
  const int rc = rows_ * cols_;
  for (int e = 0; e < rc; ++e) out[e] = 0;
  if (terms_ == 0) return;
  cplx* pw = ws.powers.data();
  for (int c = 0; c < n_; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    const double frac = x[c] - std::floor(x[c]);
    const double ang = kTwoPi * frac;
    const cplx z(std::cos(ang), std::sin(ang));
    cplx* row = pw + offset_[cc];
    const double a0 = ang * lo_[cc];
    row[0] = cplx(std::cos(a0), std::sin(a0));
    for (int t = 1; t < span_[cc]; ++t) row[t] = row[t - 1] * z;
  }
  if (rc == 1) {
    cplx acc = 0;
    for (int t = 0; t < terms_; ++t) {
      cplx ph = pw[freq_[static_cast<std::size_t>(t * n_)]];
      for (int c = 1; c < n_; ++c) ph *= pw[freq_[static_cast<std::size_t>(t * n_ + c)]];
      acc += coeff_[static_cast<std::size_t>(t)] * ph;
    }
    out[0] = acc;
    return;
  }
  for (int t = 0; t < terms_; ++t) {
    cplx ph = pw[freq_[static_cast<std::size_t>(t * n_)]];
    for (int c = 1; c < n_; ++c) ph *= pw[freq_[static_cast<std::size_t>(t * n_ + c)]];
    const cplx* M = coeff_.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(rc);
    for (int e = 0; e < rc; ++e) out[e] += M[e] * ph;
  }
}

std::vector<CMat> evaluate_grid(const MatTrigPoly& p, const std::vector<RVec>& pts, Exec ex) {
  std::vector<CMat> out(pts.size(), CMat::Zero(p.rows(), p.cols()));
  const FlatPoly fp(p);
  if (ex == Exec::serial) {
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = p.evaluate(pts[i]);
    return out;
  }
#pragma omp parallel
  {
    auto ws = fp.workspace();
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(pts.size()); ++i) {
      const auto ii = static_cast<std::size_t>(i);
      fp.eval(pts[ii].data(), out[ii].data(), ws);
    }
  }
  return out;
}

double qmf_sweep(const MatTrigPoly& m, const DilationSystem& sys, const std::vector<RVec>& pts, Exec ex) {
  const int d = m.d();
  if (ex == Exec::serial) {
    double worst = 0.0;
    for (const RVec& x : pts) {
      CMat S = -CMat::Identity(d, d);
      for (int i = 0; i < sys.q(); ++i) {
        const CMat v = m.evaluate(sys.inverse_branch(i, x));
        S += v.adjoint() * v;
      }
      worst = std::max(worst, d == 1 ? std::abs(S(0, 0)) : Eigen::JacobiSVD<CMat>(S).singularValues()(0));
    }
    return worst;
  }
  const FlatPoly fp(m);
  double worst = 0.0;
#pragma omp parallel reduction(max : worst)
  {
    auto ws = fp.workspace();
    CMat v(d, d), S(d, d);
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(pts.size()); ++t) {
      const RVec& x = pts[static_cast<std::size_t>(t)];
      S = -CMat::Identity(d, d);
      for (int i = 0; i < sys.q(); ++i) {
        const RVec y = sys.inverse_branch(i, x);
        fp.eval(y.data(), v.data(), ws);
        S.noalias() += v.adjoint() * v;
      }
      worst = std::max(worst, d == 1 ? std::abs(S(0, 0)) : Eigen::JacobiSVD<CMat>(S).singularValues()(0));
    }
  }
  return worst;
}

}  // namespace mwh
