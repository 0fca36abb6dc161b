#include <doctest.h>

#include "mwh/error.hpp"
#include "mwh/filter_io.hpp"
#include "mwh/transfer.hpp"
#include "oracles.hpp"

using namespace mwh;

namespace {

DilationSystem random_digits(std::mt19937_64& rng, const IMat& A) {
  const auto base = DilationSystem::build(A);
  std::uniform_int_distribution<int> shift(-2, 2);
  std::vector<IVec> digits{base.digits()[0]};
  for (std::size_t i = 1; i < base.digits().size(); ++i) {
    IVec r(A.rows());
    for (Eigen::Index c = 0; c < r.size(); ++c) r[c] = shift(rng);
    digits.push_back(base.digits()[i] + A * r);
  }
  return DilationSystem::with_digits(A, digits);
}

std::vector<IMat> sample_dilations() {
  IMat a(1, 1), b(1, 1), c(2, 2), e(2, 2);
  a << 2;
  b << -3;
  c << 1, 1, 1, -1;
  e << 2, 1, 0, 2;
  return {a, b, c, e};
}

}  // namespace

TEST_CASE("haar transition matrix equals the hand-built one") {
  const auto lf = load_builtin("haar");
  const SupportSet K = invariant_support(lf.m, lf.sys);
  REQUIRE(K.freqs() == std::vector<Freq>{{-1}, {0}, {1}});
  const auto T = transition_operator(lf.m, lf.sys, K);
  const Eigen::Matrix3d ref = oracle::haar_transition();
  CHECK((T.matrix() - ref.cast<cplx>()).norm() < 1e-14);

  const auto sd = spectral_data(T, lf.sys, 1e-10);
  Eigen::EigenSolver<Eigen::Matrix3d> es(ref);
  std::vector<double> ev;
  for (int i = 0; i < 3; ++i) ev.push_back(es.eigenvalues()[i].real());
  std::sort(ev.rbegin(), ev.rend());
  REQUIRE(sd.eigenvalues.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(sd.eigenvalues[static_cast<std::size_t>(i)] - ev[static_cast<std::size_t>(i)]) < 1e-10);
  CHECK(sd.fixed_right.size() == 1);
  CHECK(sd.cesaro_defect >= 0);
  CHECK(sd.cesaro_defect < 1e-6);
}

TEST_CASE("coefficient route equals the preimage-sum oracle") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const IMat A = sample_dilations()[static_cast<std::size_t>(rep % 4)];
    const auto sys = random_digits(rng, A);
    const int n = sys.n();
    const int d = 1 + rep % 2;
    const auto m = oracle::random_poly(rng, n, d, 2, 3);
    const auto h = oracle::random_poly(rng, n, d, 3, 4);
    const auto Rh = transfer_apply(m, sys, h);
    for (int t = 0; t < 3; ++t) {
      const RVec x = oracle::random_point(rng, n);
      const CMat ref = oracle::preimage_sum(m, sys, [&](const RVec& y) { return oracle::eval(h, y); }, x);
      CHECK((Rh(x) - ref).norm() <= 1e-11 * std::max(1.0, ref.norm()));
      ++checked;
    }
  }
  CHECK(checked == 300);
}

TEST_CASE("invariant support is closed and contains R-images") {
  std::mt19937_64 rng(9);
  for (const IMat& A : sample_dilations()) {
    const auto sys = DilationSystem::build(A);
    const auto m = oracle::random_poly(rng, sys.n(), 1, 2, 3);
    const SupportSet K = invariant_support(m, sys);
    CHECK(is_closed(m, sys, K));
    MatTrigPoly h(sys.n(), 1);
    for (const Freq& k : K.freqs()) h.add(k, CMat::Constant(1, 1, cplx(1.0, 0.5)));
    for (const Freq& k : transfer_apply(m, sys, h).support()) CHECK(K.contains(k));
  }
}

TEST_CASE("transition operator round trips and rejects") {
  const auto lf = load_builtin("haar2-shift");
  const auto K = invariant_support(lf.m, lf.sys);
  const auto T = transition_operator(lf.m, lf.sys, K);
  std::mt19937_64 rng(1);
  const auto h = oracle::random_poly(rng, 1, 2, 1, 3);
  CHECK(max_coeff_diff(T.from_vector(T.to_vector(h)), h) == 0.0);
  CHECK(max_coeff_diff(T.from_vector(T.matrix() * T.to_vector(h)), transfer_apply(lf.m, lf.sys, h)) < 1e-14);
  const auto far = MatTrigPoly::monomial({40}, CMat::Identity(2, 2));
  CHECK_THROWS_AS(T.to_vector(far), Error);
  CHECK_THROWS_AS(transition_operator(lf.m, lf.sys, SupportSet(std::vector<Freq>{Freq{0}})), Error);

  const auto big = oracle::random_poly(rng, 2, 5, 3, 6);
  IMat A(2, 2);
  A << 1, 1, 1, -1;
  try {
    const auto sys = DilationSystem::build(A);
    transition_operator(big, sys, invariant_support(big, sys));
    FAIL("expected budget error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
  }
}

TEST_CASE("spectral data") {
  SUBCASE("haar3 fixed space") {
    const auto lf = load_builtin("haar3");
    const TransferAnalysis ta(lf.m, lf.sys);
    REQUIRE(ta.fixed_dim() == 2);
    // 2cos(2 pi x) + cos(4 pi x) lies in the fixed space
    MatTrigPoly g(1, 1);
    g.add({1}, CMat::Constant(1, 1, 1.0));
    g.add({-1}, CMat::Constant(1, 1, 1.0));
    g.add({2}, CMat::Constant(1, 1, 0.5));
    g.add({-2}, CMat::Constant(1, 1, 0.5));
    double resid = 1;
    ta.coords(g, &resid);
    CHECK(resid < 1e-10);
    CHECK(max_coeff_diff(ta.apply_R(g), g) < 1e-12);
  }
  SUBCASE("projection laws") {
    for (const char* name : {"haar", "haar3", "haar2-shift", "d4"}) {
      const auto lf = load_builtin(name);
      const TransferAnalysis ta(lf.m, lf.sys);
      const CMat& T = ta.transition().matrix();
      const CMat& T1 = ta.spectral().T1;
      CHECK((T1 * T1 - T1).norm() < 1e-10);
      CHECK((T1 * T - T1).norm() < 1e-10);
      CHECK((T * T1 - T1).norm() < 1e-10);
      if (ta.spectral().cesaro_defect >= 0) CHECK(ta.spectral().cesaro_defect < 1e-6);
    }
  }
  SUBCASE("defective peripheral eigenvalue") {
    // constant filter with 2 m^* c m = J^* c J, J a Jordan block
    CMat M(2, 2);
    M << 1, 1, 0, 1;
    M /= std::sqrt(2.0);
    const auto m = MatTrigPoly::constant(1, M);
    const auto sys = DilationSystem::build(IMat::Constant(1, 1, 2));
    const auto T = transition_operator(m, sys, invariant_support(m, sys));
    try {
      spectral_data(T, sys, 1e-10);
      FAIL("expected DefectivePeripheral");
    } catch (const DefectivePeripheralError& e) {
      CHECK(e.code() == ErrorCode::DefectivePeripheral);
      CHECK_FALSE(e.eigenvalues().empty());
    }
  }
}

TEST_CASE("Cesaro tree matches coefficient iteration") {
  const auto lf = load_builtin("haar2-shift");
  std::mt19937_64 rng(77);
  const auto h = oracle::random_poly(rng, 1, 2, 2, 3);
  const int k = 8;
  MatTrigPoly acc(1, 2), cur = h;
  for (int j = 0; j < k; ++j) {
    cur = transfer_apply(lf.m, lf.sys, cur);
    acc += cur;
  }
  acc *= cplx(1.0 / k);
  for (int t = 0; t < 5; ++t) {
    const RVec x = oracle::random_point(rng, 1);
    const CMat c = cesaro_apply(lf.m, lf.sys, [&](const RVec& y) { return h(y); }, x, k);
    CHECK((c - acc(x)).norm() < 1e-11);
  }
}
