#include <doctest.h>

#include "mwh/error.hpp"
#include "mwh/filter_io.hpp"
#include "mwh/trigmat.hpp"
#include "oracles.hpp"

using namespace mwh;

namespace {

MatTrigPoly scalar_filter(std::vector<std::pair<int, double>> taps) {
  MatTrigPoly m(1, 1);
  for (auto [k, c] : taps) m.add({k}, CMat::Constant(1, 1, c));
  return m;
}

DilationSystem dyadic() { return DilationSystem::build(IMat::Constant(1, 1, 2)); }

}  // namespace

TEST_CASE("evaluation, products and adjoints agree with dense oracles") {
  std::mt19937_64 rng(42);
  for (int n = 1; n <= 2; ++n)
    for (int rep = 0; rep < 10; ++rep) {
      const auto p = oracle::random_poly(rng, n, 2, 3, 5);
      const auto r = oracle::random_poly(rng, n, 2, 2, 4);
      const auto pr = poly_product(p, r);
      const auto pa = p.adjoint();
      for (int t = 0; t < 5; ++t) {
        const RVec x = oracle::random_point(rng, n, -2, 2);
        CHECK((p(x) - oracle::eval(p, x)).norm() < 1e-12);
        CHECK((pr(x) - oracle::eval(p, x) * oracle::eval(r, x)).norm() < 1e-11);
        CHECK((pa(x) - oracle::eval(p, x).adjoint()).norm() < 1e-12);
        CHECK(((p + r)(x) - oracle::eval(p, x) - oracle::eval(r, x)).norm() < 1e-12);
      }
    }
}

TEST_CASE("evaluation is 1-periodic") {
  std::mt19937_64 rng(5);
  const auto p = oracle::random_poly(rng, 2, 3, 4, 6);
  RVec x(2), g(2);
  x << 0.17, 0.62;
  g << 3, -2;
  CHECK((p(x) - p(x + g)).norm() < 1e-11);
}

TEST_CASE("shape mismatch is reported") {
  CHECK_THROWS_AS(poly_product(MatTrigPoly(1, 2), MatTrigPoly(1, 3)), Error);
  MatTrigPoly a(1, 2);
  CHECK_THROWS_AS(a += MatTrigPoly(1, 3), Error);
}

TEST_CASE("interpolation recovers low-degree polynomials") {
  std::mt19937_64 rng(8);
  for (int n = 1; n <= 2; ++n) {
    const auto p = oracle::random_poly(rng, n, 2, 3, 6);
    const int N = 16;
    std::vector<CMat> samples;
    for (const RVec& x : unit_grid(n, N)) samples.push_back(oracle::eval(p, x));
    const auto q = MatTrigPoly::interpolate(n, N, samples);
    CHECK(max_coeff_diff(p, q) < 1e-12);
  }
}

TEST_CASE("QMF residual") {
  CHECK(qmf_residual(scalar_filter({{0, 0.5}, {1, 0.5}}), dyadic(), 8) <= 1e-12);
  CHECK(qmf_residual(load_builtin("d4").m, dyadic(), 8) <= 1e-12);
  CHECK(qmf_residual(load_builtin("haar2-shift").m, dyadic(), 8) <= 1e-12);
  // |m|^2 summed over preimages is 1 + cos(2 pi x) for the stretched filter
  CHECK(qmf_residual(scalar_filter({{0, 0.5}, {2, 0.5}}), dyadic(), 8) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("E(l) condition") {
  const auto sys = dyadic();
  auto e = el_condition(scalar_filter({{0, 0.5}, {1, 0.5}}), sys, 1e-10);
  CHECK(e.holds);
  CHECK(e.l == 1);
  CHECK(e.norm_m0 == doctest::Approx(1.0));

  e = el_condition(load_builtin("haar2-shift").m, sys, 1e-10);
  CHECK(e.holds);
  CHECK(e.l == 2);
  CHECK((projector(e.E1_basis, 2) - CMat::Identity(2, 2)).norm() < 1e-12);

  MatTrigPoly m(1, 2);
  CMat M0(2, 2);
  M0 << 1, 0, 0, 0.25;
  m.add({0}, M0);
  e = el_condition(m, sys, 1e-10);
  CHECK(e.holds);
  CHECK(e.l == 1);
  CHECK(e.spectral_margin == doctest::Approx(0.75));
  CHECK(std::abs(e.E1_basis[0][0]) == doctest::Approx(1.0));

  M0 << 1, 0, 0, -1;
  m = MatTrigPoly::constant(1, M0);
  e = el_condition(m, sys, 1e-10);
  CHECK_FALSE(e.holds);
  CHECK(e.reason == "PeripheralExtra");

  M0 << 1, 1, 0, 1;
  e = el_condition(MatTrigPoly::constant(1, M0), sys, 1e-10);
  CHECK_FALSE(e.holds);
  CHECK(e.reason == "DefectiveEigenvalue");

  e = el_condition(scalar_filter({{0, 0.25}, {1, 0.25}}), sys, 1e-10);
  CHECK_FALSE(e.holds);
  CHECK(e.reason == "NormNotOne");

  M0 << 0, 1, 0, 0;
  e = el_condition(MatTrigPoly::constant(1, M0), sys, 1e-10);
  CHECK_FALSE(e.holds);
  CHECK(e.reason == "NoUnitEigenvalue");

  M0 << 1, 0.5, 0, 0.2;
  e = el_condition(MatTrigPoly::constant(1, M0), sys, 1e-10);
  CHECK_FALSE(e.holds);
  CHECK(e.reason == "NormNotOne");
}
