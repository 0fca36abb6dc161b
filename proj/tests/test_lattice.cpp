#include <doctest.h>

#include "mwh/error.hpp"
#include "mwh/lattice.hpp"
#include "oracles.hpp"

using namespace mwh;

namespace {

IMat mat2(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  IMat A(2, 2);
  A << a, b, c, d;
  return A;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("dyadic system") {
  const auto s = DilationSystem::build(IMat::Constant(1, 1, 2));
  CHECK(s.q() == 2);
  REQUIRE(s.digits().size() == 2);
  CHECK(s.digits()[0][0] == 0);
  CHECK(std::abs(s.digits()[1][0]) == 1);
  CHECK(s.theta() == doctest::Approx(0.5));
  CHECK(s.freq_norm_euclidean());
  RVec x(1);
  x << 0.3;
  CHECK(s.inverse_branch(0, x)[0] == doctest::Approx(0.15));
  CHECK(s.inverse_branch(1, x)[0] == doctest::Approx((0.3 + s.digits()[1][0]) / 2));
  CHECK(code_of([&] { s.inverse_branch(2, x); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("digits form a complete residue system") {
  for (const IMat& A : {mat2(1, 1, 1, -1), mat2(2, 0, 0, 2), mat2(2, 1, 0, 2), mat2(1, -2, 2, 1), mat2(3, 5, 0, 2),
                        mat2(0, 2, 1, 0)}) {
    const auto s = DilationSystem::build(A);
    const Eigen::MatrixXd Ad = A.cast<double>();
    CHECK(s.q() == std::abs(integer_det(A)));
    CHECK(oracle::count_classes(Ad, 4) == s.q());
    REQUIRE(static_cast<int>(s.digits().size()) == s.q());
    CHECK(s.digits()[0].isZero());
    for (std::size_t i = 0; i < s.digits().size(); ++i)
      for (std::size_t j = i + 1; j < s.digits().size(); ++j)
        CHECK_FALSE(oracle::congruent(Ad, s.digits()[i], s.digits()[j]));
    // residue keys agree with the brute-force congruence test
    for (int a = -3; a <= 3; ++a)
      for (int b = -3; b <= 3; ++b) {
        IVec g(2);
        g << a, b;
        CHECK(s.in_lattice_image(g) == oracle::congruent(Ad, g, IVec::Zero(2)));
        for (const auto& dg : s.digits())
          CHECK((s.residue_key(g) == s.residue_key(dg)) == oracle::congruent(Ad, g, dg));
      }
  }
}

TEST_CASE("quincunx") {
  const auto s = DilationSystem::build(mat2(1, 1, 1, -1));
  CHECK(s.q() == 2);
  CHECK(s.theta() == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("transpose preimage and inverse branches") {
  const auto s = DilationSystem::build(mat2(2, 1, 0, 2));
  IVec t(2);
  t << 4, 6;
  auto u = s.transpose_preimage(t);
  REQUIRE(u);
  CHECK((s.A().transpose() * *u) == t);
  t << 1, 0;
  CHECK_FALSE(s.transpose_preimage(t));
  std::mt19937_64 rng(3);
  for (int r = 0; r < 20; ++r) {
    const RVec x = oracle::random_point(rng, 2);
    for (int i = 0; i < s.q(); ++i) {
      const RVec y = s.inverse_branch(i, x);
      CHECK((s.A_real() * y - x - s.digits()[static_cast<std::size_t>(i)].cast<double>()).norm() < 1e-12);
    }
  }
}

TEST_CASE("adapted frequency norm contracts under A^{-T}") {
  const auto s = DilationSystem::build(mat2(2, 5, 0, 2));
  CHECK_FALSE(s.freq_norm_euclidean());
  CHECK(s.theta() < 1.0);
  std::mt19937_64 rng(11);
  for (int r = 0; r < 200; ++r) {
    const RVec v = oracle::random_point(rng, 2, -10, 10);
    const RVec w = s.A_inv().transpose() * v;
    CHECK(s.freq_norm(w) <= s.theta() * s.freq_norm(v) + 1e-12);
  }
}

TEST_CASE("integer determinant and adjugate") {
  IMat A(3, 3);
  A << 2, 1, 0, -1, 3, 4, 5, 0, 2;
  const std::int64_t det = integer_det(A);
  CHECK(det == static_cast<std::int64_t>(std::llround(A.cast<double>().determinant())));
  CHECK((A * integer_adjugate(A)) == IMat::Identity(3, 3) * det);
}

TEST_CASE("rejections") {
  CHECK(code_of([] { DilationSystem::build(IMat::Constant(1, 1, 1)); }) == ErrorCode::NotExpansive);
  CHECK(code_of([] { DilationSystem::build(mat2(1, 1, 0, 1)); }) == ErrorCode::NotExpansive);
  CHECK(code_of([] { DilationSystem::build(mat2(2, 0, 0, 1)); }) == ErrorCode::NotExpansive);
  RMat Ar(1, 1);
  Ar << 2.5;
  CHECK(code_of([&] { DilationSystem::from_real(Ar); }) == ErrorCode::NotInteger);
  const IMat two = IMat::Constant(1, 1, 2);
  IVec z = IVec::Zero(1), two_v = IVec::Constant(1, 2), three = IVec::Constant(1, 3);
  CHECK(code_of([&] { DilationSystem::with_digits(two, {z, two_v}); }) == ErrorCode::InvalidDigits);
  CHECK(code_of([&] { DilationSystem::with_digits(two, {z}); }) == ErrorCode::InvalidDigits);
  CHECK(code_of([&] { DilationSystem::with_digits(two, {three, z}); }) == ErrorCode::InvalidDigits);
  const auto s = DilationSystem::with_digits(two, {z, three});
  CHECK(s.digits()[1][0] == 3);
}
