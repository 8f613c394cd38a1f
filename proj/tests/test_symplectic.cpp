#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "conezeta/symplectic.hpp"

using namespace conezeta;
using Catch::Approx;

namespace {

MatrixXcd mat1(cplx v) {
  MatrixXcd m(1, 1);
  m << v;
  return m;
}

}  // namespace

TEST_CASE("spec sanity checks") {
  CHECK_THROWS(SpectralSpec{-1, {}, 1.0}.check());
  CHECK_THROWS(SpectralSpec{1, {}, 0.0}.check());
  CHECK_THROWS(SpectralSpec{0, {1.2}, 1.0}.check());
  CHECK_THROWS(SpectralSpec{0, {}, 1.0}.check());
  CHECK_NOTHROW(SpectralSpec{1, {0.3, 0.7}, 2.0}.check());
}

TEST_CASE("a_prime negates exactly the first q0 columns") {
  SpectralSpec spec{2, {0.3}, 1.0};
  MatrixXcd A = MatrixXcd::Random(3, 3);
  MatrixXcd Ap = a_prime(A, spec);
  CHECK((Ap.col(0) + A.col(0)).norm() == Approx(0.0).margin(1e-15));
  CHECK((Ap.col(1) + A.col(1)).norm() == Approx(0.0).margin(1e-15));
  CHECK((Ap.col(2) - A.col(2)).norm() == Approx(0.0).margin(1e-15));
}

TEST_CASE("validate_lagrangian verdicts") {
  SECTION("scalar Robin conditions are valid") {
    SpectralSpec spec{0, {0.5}, 1.0};
    for (double th : {0.0, 0.4, std::numbers::pi / 2}) {
      auto v = validate_lagrangian(mat1(std::cos(th)), mat1(std::sin(th)), spec);
      CHECK(v.verdict == LagrangianVerdict::ok);
      CHECK(!v.conditioning_warning);
    }
  }
  SECTION("rank deficiency is detected") {
    SpectralSpec spec{0, {0.3, 0.6}, 1.0};
    MatrixXcd A = MatrixXcd::Zero(2, 2), B = MatrixXcd::Zero(2, 2);
    A(0, 0) = 1.0;
    B(0, 1) = 1.0;  // second row of (A B) vanishes
    auto v = validate_lagrangian(A, B, spec);
    CHECK(v.verdict == LagrangianVerdict::rank_deficient);
  }
  SECTION("non-hermitian A'B* is rejected") {
    SpectralSpec spec{0, {0.5}, 1.0};
    auto v = validate_lagrangian(mat1(1.0), mat1(cplx(0.0, 1.0)), spec);
    CHECK(v.verdict == LagrangianVerdict::not_self_adjoint);
    CHECK(v.hermiticity_defect > 1e-2);
  }
  SECTION("the q0 sign convention matters") {
    // q = 2, q0 = 1: A'B* hermitian requires the first column of A negated.
    SpectralSpec spec{1, {0.3}, 1.0};
    MatrixXcd A(2, 2), B(2, 2);
    A << 0, 1, -1, 0;
    B = MatrixXcd::Identity(2, 2);
    CHECK(validate_lagrangian(A, B, spec).verdict == LagrangianVerdict::ok);
    // without the sign flip the same pair fails
    A << 0, 1, 1, 0;
    CHECK(validate_lagrangian(A, B, spec).verdict ==
          LagrangianVerdict::not_self_adjoint);
  }
  SECTION("conditioning warning fires near the rank tolerance") {
    SpectralSpec spec{0, {0.3, 0.6}, 1.0};
    MatrixXcd A = MatrixXcd::Identity(2, 2);
    A(1, 1) = 1e-8;  // inside [tol, 1e3 tol) for sigma_max = 1
    auto v = validate_lagrangian(A, MatrixXcd::Zero(2, 2), spec);
    CHECK(v.verdict == LagrangianVerdict::ok);
    CHECK(v.conditioning_warning);
  }
  SECTION("dimension mismatch throws") {
    SpectralSpec spec{0, {0.5}, 1.0};
    CHECK_THROWS(validate_lagrangian(MatrixXcd::Identity(2, 2),
                                     MatrixXcd::Identity(2, 2), spec));
  }
}

TEST_CASE("split angles") {
  SECTION("diagonal conditions recover their angles, including 0 and pi/2") {
    std::vector<double> ths{0.0, 0.4, std::numbers::pi / 2, 2.9};
    int q0 = static_cast<int>(ths.size());
    MatrixXcd A0 = MatrixXcd::Zero(q0, q0), B0 = MatrixXcd::Zero(q0, q0);
    for (int l = 0; l < q0; ++l) {
      A0(l, l) = std::cos(ths[l]);
      B0(l, l) = std::sin(ths[l]);
    }
    auto ang = split_angles(A0, B0);
    REQUIRE(ang);
    REQUIRE(ang->size() == ths.size());
    for (int l = 0; l < q0; ++l) CHECK((*ang)[l] == Approx(ths[l]).margin(1e-12));
  }
  SECTION("row scaling by complex units does not change the angles") {
    MatrixXcd A0 = MatrixXcd::Zero(2, 2), B0 = MatrixXcd::Zero(2, 2);
    double t0 = 0.7, t1 = 1.9;
    cplx u0 = std::polar(2.0, 0.3), u1 = std::polar(0.5, -1.1);
    A0(0, 0) = u0 * std::cos(t0);
    B0(0, 0) = u0 * std::sin(t0);
    A0(1, 1) = u1 * std::cos(t1);
    B0(1, 1) = u1 * std::sin(t1);
    auto ang = split_angles(A0, B0);
    REQUIRE(ang);
    CHECK((*ang)[0] == Approx(t0).margin(1e-12));
    CHECK((*ang)[1] == Approx(t1).margin(1e-12));
  }
  SECTION("a genuinely coupled q0 block does not split") {
    MatrixXcd A0 = MatrixXcd::Identity(2, 2), B0(2, 2);
    B0 << 0, 1, 1, 0;
    CHECK(!split_angles(A0, B0));
  }
}

TEST_CASE("decompose") {
  SECTION("block-diagonal input is recovered") {
    SpectralSpec spec{1, {0.3, 0.7}, 1.0};
    double th = 0.9;
    MatrixXcd A = MatrixXcd::Zero(3, 3), B = MatrixXcd::Zero(3, 3);
    A(0, 0) = std::cos(th);
    B(0, 0) = std::sin(th);
    // coupled Robin-type condition on the q1 coordinates
    A(1, 1) = 1.0;
    A(2, 2) = 1.0;
    MatrixXcd S(2, 2);
    S << 0.2, cplx(0.1, 0.4), cplx(0.1, -0.4), -1.3;  // hermitian
    B.bottomRightCorner(2, 2) = S;
    REQUIRE(validate_lagrangian(A, B, spec).verdict == LagrangianVerdict::ok);
    auto d = decompose(A, B, spec);
    REQUIRE(d.decomposable);
    REQUIRE(d.split_angles);
    REQUIRE(d.split_angles->size() == 1);
    CHECK((*d.split_angles)[0] == Approx(th).margin(1e-10));
    // recovered (A1,B1) must define the same subspace: stacking the two
    // descriptions cannot raise the rank above q1
    MatrixXcd stacked(4, 4);
    stacked << d.A1, d.B1, A.bottomRightCorner(2, 2), B.bottomRightCorner(2, 2);
    CHECK(numerical_rank(stacked) == 2);
  }
  SECTION("a coupling between the q0 and q1 sectors blocks decomposition") {
    SpectralSpec spec{1, {0.3}, 1.0};
    MatrixXcd A(2, 2), B(2, 2);
    A << 0, 1, -1, 0;
    B = MatrixXcd::Identity(2, 2);
    auto d = decompose(A, B, spec);
    CHECK(!d.decomposable);
  }
  SECTION("pure q0 and pure q1 problems are trivially decomposable") {
    SpectralSpec s0{1, {}, 1.0};
    auto d0 = decompose(mat1(std::cos(0.4)), mat1(std::sin(0.4)), s0);
    REQUIRE(d0.decomposable);
    REQUIRE(d0.split_angles);
    CHECK((*d0.split_angles)[0] == Approx(0.4).margin(1e-12));
    SpectralSpec s1{0, {0.5}, 1.0};
    auto d1 = decompose(mat1(1.0), mat1(0.0), s1);
    CHECK(d1.decomposable);
    CHECK(d1.A1.rows() == 1);
  }
  SECTION("invalid input throws") {
    SpectralSpec spec{0, {0.5}, 1.0};
    CHECK_THROWS(decompose(mat1(1.0), mat1(cplx(0.0, 1.0)), spec));
  }
}

TEST_CASE("random boundary conditions always validate") {
  std::mt19937 rng(20240817);
  std::vector<SpectralSpec> specs{
      {0, {0.5}, 1.0}, {1, {0.3}, 1.0}, {2, {0.25, 0.7}, 1.5}, {1, {0.4, 0.6, 0.9}, 0.7}};
  for (const auto& spec : specs) {
    for (int rep = 0; rep < 25; ++rep) {
      auto L = random_lagrangian(spec, rng, rep % 2 == 0);
      auto v = validate_lagrangian(L.A, L.B, spec);
      CHECK(v.verdict == LagrangianVerdict::ok);
    }
  }
}
