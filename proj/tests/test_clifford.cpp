#include "spindeg/clifford.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

using namespace spindeg;
using spindeg::testing::max_abs;
using spindeg::testing::random_unit;
using spindeg::testing::random_vec;

namespace {

void check_module(const CliffordModule& mod) {
  const int d = mod.dim_base;
  const Mat id = Mat::Identity(mod.spinor_dim, mod.spinor_dim);
  REQUIRE(mod.spinor_dim == (1 << (d / 2)));
  REQUIRE(static_cast<int>(mod.gammas.size()) == d);
  for (int i = 0; i < d; ++i) {
    CHECK(max_abs(mod.gammas[i].adjoint() + mod.gammas[i]) < 1e-12);
    CHECK(max_abs(mod.tau * mod.gammas[i] + mod.gammas[i] * mod.tau) < 1e-12);
    for (int j = 0; j < d; ++j) {
      const Mat ac = mod.gammas[i] * mod.gammas[j] + mod.gammas[j] * mod.gammas[i];
      CHECK(max_abs(ac + 2.0 * (i == j ? 1.0 : 0.0) * id) < 1e-12);
    }
  }
  CHECK(max_abs(mod.tau * mod.tau - id) < 1e-12);
  CHECK(max_abs(mod.tau - mod.tau.adjoint()) < 1e-12);
  CHECK(static_cast<int>(mod.plus_indices.size()) == mod.spinor_dim / 2);
  CHECK(static_cast<int>(mod.minus_indices.size()) == mod.spinor_dim / 2);
  for (int i : mod.plus_indices) CHECK(std::abs(mod.tau(i, i) - 1.0) < 1e-12);
  for (int i : mod.minus_indices) CHECK(std::abs(mod.tau(i, i) + 1.0) < 1e-12);
}

}  // namespace

TEST_CASE("module relations hold in dimensions 2, 4, 6") {
  for (int d : {2, 4, 6}) check_module(build_clifford_module(d));
  check_module(build_clifford_module(2, Realization::conjugate));
  check_module(build_clifford_module(4, Realization::conjugate));
}

TEST_CASE("construction is deterministic") {
  const auto a = build_clifford_module(6), b = build_clifford_module(6);
  for (int i = 0; i < 6; ++i) CHECK(a.gammas[i] == b.gammas[i]);
  CHECK(a.tau == b.tau);
}

TEST_CASE("grading has trace zero in dimension 4") {
  CHECK(std::abs(build_clifford_module(4).tau.trace()) < 1e-12);
}

TEST_CASE("odd or nonpositive dimensions are rejected") {
  for (int d : {3, 1, 0, -2}) CHECK_THROWS_AS(build_clifford_module(d), DimensionError);
}

TEST_CASE("clifford action") {
  const auto mod = build_clifford_module(4);
  CHECK(max_abs(clifford_action(mod, Vec::Zero(4)).matrix) == 0.0);
  const Mat id = Mat::Identity(4, 4);
  for (int k = 0; k < 50; ++k) {
    const Vec x = random_unit(4);
    const Mat c = clifford_action(mod, x).matrix;
    CHECK(max_abs(c * c + id) < 1e-12);
    CHECK(max_abs(c.adjoint() * c - id) < 1e-12);
    const Vec y = random_vec(4);
    const double a = spindeg::testing::uniform();
    CHECK(max_abs(clifford_action(mod, a * x + y).matrix - a * c - clifford_action(mod, y).matrix) < 1e-12);
  }
  const auto mod2 = build_clifford_module(2);
  const Mat c = clifford_action(mod2, Vec::Ones(2)).matrix;
  CHECK(max_abs(c * c + 2.0 * Mat::Identity(2, 2)) < 1e-12);
  CHECK_THROWS_AS(clifford_action(mod2, Vec::Ones(3)), DimensionError);
  CHECK(clifford_action(mod2, Vec::Ones(2)).parity == Parity::odd);
}

TEST_CASE("V_K vanishes for zero input and is odd and self-adjoint") {
  for (int d : {2, 4, 6}) {
    const auto mod = build_clifford_module(d);
    CHECK(max_abs(build_vk(mod, Vec::Zero(d), Vec::Zero(d)).matrix) == 0.0);
    for (int k = 0; k < 1000; ++k) {
      const Vec xi = random_vec(d, 2.0), eta = random_vec(d, 2.0);
      const Mat v = build_vk(mod, xi, eta).matrix;
      REQUIRE(max_abs(v - v.adjoint()) < 1e-12);
      REQUIRE(detect_parity(mod, v) == Parity::odd);
    }
  }
}

TEST_CASE("V_K squared matches the closed form") {
  for (int d : {2, 4, 6}) {
    const auto mod = build_clifford_module(d);
    for (int k = 0; k < 1000; ++k) {
      const Vec xi = random_vec(d, 2.0), eta = random_vec(d, 2.0);
      REQUIRE(max_abs(vk_square(mod, xi, eta) - vk_square_closed_form(mod, xi, eta)) < 1e-12);
    }
    const Vec xi = random_vec(d);
    CHECK(max_abs(vk_square(mod, xi, Vec::Zero(d)) - xi.squaredNorm() * Mat::Identity(mod.spinor_dim, mod.spinor_dim)) <
          1e-12);
  }
}

TEST_CASE("unequal lengths give a positive definite square") {
  for (int d : {2, 4, 6}) {
    const auto mod = build_clifford_module(d);
    for (int k = 0; k < 1000; ++k) {
      const Vec xi = random_vec(d, 2.0), eta = random_vec(d, 2.0);
      if (std::abs(xi.norm() - eta.norm()) < 1e-3) continue;
      Eigen::SelfAdjointEigenSolver<Mat> es(vk_square(mod, xi, eta));
      const double bound = std::pow(xi.norm() - eta.norm(), 2);
      REQUIRE(es.eigenvalues().minCoeff() > 0.0);
      REQUIRE(es.eigenvalues().minCoeff() >= bound - 1e-10);
    }
  }
}

TEST_CASE("equal lengths that are not orthogonal still give a positive definite square") {
  const auto mod = build_clifford_module(4);
  for (int k = 0; k < 200; ++k) {
    const Vec xi = random_unit(4);
    Vec eta = random_unit(4);
    if (std::abs(xi.dot(eta)) < 1e-2) continue;
    Eigen::SelfAdjointEigenSolver<Mat> es(vk_square(mod, xi, eta));
    REQUIRE(es.eigenvalues().minCoeff() > 1e-8);
  }
}

TEST_CASE("orthonormal pairs: oriented frames invertible on surfaces, always singular above") {
  const auto mod2 = build_clifford_module(2);
  Vec e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  CHECK(min_singular_value(build_vk(mod2, e1, e2).matrix) > 0.5);
  CHECK(min_singular_value(build_vk(mod2, e1, -e2).matrix) < 1e-12);
  for (int d : {4, 6}) {
    const auto mod = build_clifford_module(d);
    for (int k = 0; k < 1000; ++k) {
      const Vec a = random_unit(d);
      Vec b = random_unit(d);
      b -= b.dot(a) * a;
      b.normalize();
      const double s = spindeg::testing::uniform(0.2, 3.0);
      Eigen::SelfAdjointEigenSolver<Mat> es(vk_square(mod, s * a, s * b));
      REQUIRE(es.eigenvalues().minCoeff() < 1e-9 * es.eigenvalues().maxCoeff());
    }
  }
}

TEST_CASE("parity detection") {
  const auto mod = build_clifford_module(4);
  CHECK(detect_parity(mod, mod.tau) == Parity::even);
  CHECK(detect_parity(mod, mod.gammas[0]) == Parity::odd);
  CHECK_THROWS_AS(detect_parity(mod, mod.tau + mod.gammas[0]), DimensionError);
}

TEST_CASE("graded tensor product") {
  const auto a = build_clifford_module(2), b = build_clifford_module(2);
  const auto ab = graded_tensor(a, b);
  CHECK(ab.dim_base == 4);
  check_module(ab);
  check_module(graded_tensor(ab, a));
}

TEST_CASE("lifted sum of nonsingular factor maps is invertible") {
  // V = V1 x Id + tau1 x V2 squares to V1^2 x Id + Id x V2^2, so the spectrum
  // of V^2 is the set of sums of factor eigenvalues.
  const auto a = build_clifford_module(2), b = build_clifford_module(2);
  const auto ab = graded_tensor(a, b);
  for (int k = 0; k < 200; ++k) {
    const Mat v1 = build_vk(a, random_vec(2), random_vec(2)).matrix;
    const Mat v2 = build_vk(b, random_vec(2), random_vec(2)).matrix;
    const Mat v = lift_left(a, b, v1) + lift_right(a, b, v2);
    Eigen::SelfAdjointEigenSolver<Mat> e1(v1 * v1), e2(v2 * v2), e(v * v);
    CHECK(std::abs(e.eigenvalues().minCoeff() - e1.eigenvalues().minCoeff() - e2.eigenvalues().minCoeff()) < 1e-10);
    CHECK(detect_parity(ab, v) == Parity::odd);
    if (e1.eigenvalues().minCoeff() > 1e-6 && e2.eigenvalues().minCoeff() > 1e-6) CHECK(min_singular_value(v) > 1e-4);
  }
}

TEST_CASE("lifted map at a pair of non-oriented degeneracy points is singular") {
  // At p = (1, 0, 0) the frame components are xi = (1, 0), eta = (0, -1).
  const auto a = build_clifford_module(2);
  const auto ab = graded_tensor(a, a);
  Vec xi(2), eta(2);
  xi << 1, 0;
  eta << 0, -1;
  const Mat v1 = build_vk(a, xi, eta).matrix;
  const Mat v = lift_left(a, a, v1) + lift_right(a, a, v1);
  CHECK(min_singular_value(plus_to_minus(ab, v)) < 1e-12);
  // One oriented factor makes it invertible.
  const Mat w = build_vk(a, xi, -eta).matrix;
  CHECK(min_singular_value(plus_to_minus(ab, lift_left(a, a, v1) + lift_right(a, a, w))) > 0.5);
}

TEST_CASE("chiral blocks") {
  const auto mod = build_clifford_module(4);
  const Mat v = build_vk(mod, random_vec(4), random_vec(4)).matrix;
  const Mat pm = plus_to_minus(mod, v);
  const Mat mp = chiral_block(mod, v, false, true);
  CHECK(max_abs(pm.adjoint() - mp) < 1e-12);
  CHECK(max_abs(chiral_block(mod, v, true, true)) < 1e-12);
}
