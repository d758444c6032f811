#include "spindeg/matforms.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <catch_amalgamated.hpp>

using namespace spindeg;
using spindeg::testing::max_abs;
using spindeg::testing::random_mat;
using spindeg::testing::uniform;

namespace {

MatrixForm random_form(int base, Eigen::Index size, int degree) {
  MatrixForm f(base, size);
  for (MultiIndex idx = 0; idx < (MultiIndex{1} << base); ++idx)
    if (degree < 0 || form_degree(idx) == degree) f.set(idx, random_mat(size, size));
  return f;
}

ScalarForm random_scalar_form(int base, int degree) {
  ScalarForm f(base, 1);
  for (MultiIndex idx = 0; idx < (MultiIndex{1} << base); ++idx)
    if (form_degree(idx) == degree) f.set(idx, cplx(uniform(), uniform()));
  return f;
}

double distance(const MatrixForm& a, const MatrixForm& b) {
  double d = 0.0;
  for (MultiIndex idx = 0; idx < (MultiIndex{1} << a.base_dim()); ++idx)
    d = std::max(d, max_abs(a.coeff(idx) - b.coeff(idx)));
  return d;
}

double distance(const ScalarForm& a, const ScalarForm& b) {
  double d = 0.0;
  for (MultiIndex idx = 0; idx < (MultiIndex{1} << a.base_dim()); ++idx)
    d = std::max(d, std::abs(a.coeff(idx) - b.coeff(idx)));
  return d;
}

// Even matrices for a grading diag(1, 1, -1, -1): block diagonal.
Mat random_even(const Mat& tau) {
  const Mat m = random_mat(tau.rows(), tau.cols());
  return 0.5 * (m + tau * m * tau);
}

Mat random_odd(const Mat& tau) {
  const Mat m = random_mat(tau.rows(), tau.cols());
  return 0.5 * (m - tau * m * tau);
}

Mat grading4() {
  Mat tau = Mat::Identity(4, 4);
  tau(2, 2) = tau(3, 3) = -1.0;
  return tau;
}

}  // namespace

TEST_CASE("wedge of repeated index vanishes") {
  const Mat A = random_mat(2, 2), B = random_mat(2, 2);
  MatrixForm a(2, 2), b(2, 2);
  a.set(0b01, A);
  b.set(0b01, B);
  CHECK(wedge(a, b).is_zero());
}

TEST_CASE("wedge of distinct one-forms multiplies in order") {
  const Mat A = random_mat(2, 2), B = random_mat(2, 2);
  MatrixForm a(2, 2), b(2, 2);
  a.set(0b01, A);
  b.set(0b10, B);
  CHECK(max_abs(wedge(a, b).coeff(0b11) - A * B) < 1e-14);
  CHECK(max_abs(wedge(b, a).coeff(0b11) + B * A) < 1e-14);
}

TEST_CASE("shuffle signs") {
  CHECK(shuffle_sign(0b001, 0b010) == 1);
  CHECK(shuffle_sign(0b010, 0b001) == -1);
  CHECK(shuffle_sign(0b110, 0b001) == 1);
  CHECK(shuffle_sign(0b100, 0b011) == 1);
  CHECK(shuffle_sign(0b010, 0b101) == -1);
}

TEST_CASE("scalar forms commute up to the graded sign") {
  for (int trial = 0; trial < 1000; ++trial) {
    const int base = 4;
    const int p = static_cast<int>(uniform(0.0, 3.0)), q = static_cast<int>(uniform(0.0, 2.0));
    const ScalarForm a = random_scalar_form(base, p), b = random_scalar_form(base, q);
    const double sign = (p * q) % 2 == 0 ? 1.0 : -1.0;
    REQUIRE(distance(wedge(a, b), wedge(b, a).scaled(sign)) < 1e-12);
  }
}

TEST_CASE("wedge is associative") {
  for (int trial = 0; trial < 1000; ++trial) {
    const int base = 1 + trial % 4;
    const MatrixForm a = random_form(base, 2, -1), b = random_form(base, 2, -1), c = random_form(base, 2, -1);
    REQUIRE(distance(wedge(wedge(a, b), c), wedge(a, wedge(b, c))) < 1e-11);
  }
}

TEST_CASE("form powers") {
  const MatrixForm w = random_form(3, 2, 1);
  const MatrixForm zero = form_power(w, 0);
  CHECK(max_abs(zero.coeff(0) - Mat::Identity(2, 2)) == 0.0);
  CHECK(zero.homogeneous_degree() == 0);
  CHECK(form_power(w, 4).is_zero());
  CHECK_THROWS_AS(form_power(random_form(3, 2, 2), 2), DimensionError);
  CHECK_THROWS_AS(form_power(w, -1), DimensionError);
}

TEST_CASE("third power of a matrix one-form is the signed permutation sum") {
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Mat> A{random_mat(3, 3), random_mat(3, 3), random_mat(3, 3)};
    const MatrixForm w = MatrixForm::one_form(A);
    const Mat expected = A[0] * A[1] * A[2] - A[0] * A[2] * A[1] - A[1] * A[0] * A[2] + A[1] * A[2] * A[0] +
                         A[2] * A[0] * A[1] - A[2] * A[1] * A[0];
    REQUIRE(max_abs(form_power(w, 3).top() - expected) < 1e-12);
  }
}

TEST_CASE("supertrace examples") {
  const Mat tau = grading4();
  const MatrixForm id = MatrixForm::identity(3, 4);
  CHECK(supertrace_form(id, tau).is_zero());
  const MatrixForm t = MatrixForm::scalar(3, tau);
  CHECK(std::abs(supertrace_form(t, tau).coeff(0) - 4.0) < 1e-14);
  CHECK_THROWS_AS(supertrace_form(id), DimensionError);
  CHECK_THROWS_AS(supertrace_form(id, Mat::Identity(2, 2)), DimensionError);
}

TEST_CASE("supertrace of supercommutators vanishes") {
  const Mat tau = grading4();
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat e = random_even(tau), f = random_even(tau), o = random_odd(tau), p = random_odd(tau);
    REQUIRE(std::abs((tau * (e * f - f * e)).trace()) < 1e-12);
    REQUIRE(std::abs((tau * (e * o - o * e)).trace()) < 1e-12);
    REQUIRE(std::abs((tau * (o * p + p * o)).trace()) < 1e-12);
  }
}

TEST_CASE("supertrace of wedge products: graded cyclicity") {
  // The product places matrix coefficients in order with no parity sign, so
  // str(a ^ b) = (-1)^{|a||b| + p(a)p(b)} str(b ^ a) for homogeneous a, b of
  // matrix parities p(a), p(b).
  const Mat tau = grading4();
  for (int trial = 0; trial < 1000; ++trial) {
    const int base = 4;
    const int p = 1 + trial % 3, q = 1 + (trial / 3) % 2;
    const bool odd_a = trial % 2 == 0, odd_b = (trial / 2) % 2 == 0;
    MatrixForm a(base, 4), b(base, 4);
    for (MultiIndex idx = 0; idx < 16; ++idx) {
      if (form_degree(idx) == p) a.set(idx, odd_a ? random_odd(tau) : random_even(tau));
      if (form_degree(idx) == q) b.set(idx, odd_b ? random_odd(tau) : random_even(tau));
    }
    const int exponent = p * q + (odd_a && odd_b ? 1 : 0);
    const double sign = exponent % 2 == 0 ? 1.0 : -1.0;
    REQUIRE(distance(supertrace_form(wedge(a, b), tau), supertrace_form(wedge(b, a), tau).scaled(sign)) < 1e-11);
  }
}

TEST_CASE("superexponential special cases") {
  const Mat tau = grading4();
  const GradedEndo v{random_odd(tau), Parity::odd};
  const MatrixForm zero(3, 4);
  for (double t : {0.0, 0.5, 2.0}) {
    const MatrixForm e = nilpotent_superexp(t, v, zero);
    CHECK(max_abs(e.coeff(0) - std::exp(-t * t) * Mat::Identity(4, 4)) < 1e-15);
    CHECK(e.homogeneous_degree() == 0);
  }
  const MatrixForm dv = random_form(3, 4, 1);
  const MatrixForm at0 = nilpotent_superexp(0.0, v, dv);
  CHECK(max_abs(at0.coeff(0) - Mat::Identity(4, 4)) < 1e-15);
  for (MultiIndex idx = 1; idx < 8; ++idx) CHECK(max_abs(at0.coeff(idx)) < 1e-15);

  const MatrixForm dv1 = random_form(1, 4, 1);
  const double t = 0.7;
  CHECK(max_abs(nilpotent_superexp(t, v, dv1).coeff(1) + t * std::exp(-t * t) * dv1.coeff(1)) < 1e-14);

  CHECK_THROWS_AS(nilpotent_superexp(1.0, GradedEndo{tau, Parity::even}, dv), DimensionError);
  CHECK_THROWS_AS(nilpotent_superexp(1.0, GradedEndo{Mat::Zero(2, 2), Parity::odd}, dv), DimensionError);
}

TEST_CASE("superexponential agrees with a 60-term series") {
  const Mat tau = grading4();
  for (int trial = 0; trial < 1000; ++trial) {
    const int base = 1 + trial % 3;
    const double t = uniform(0.0, 2.0);
    const MatrixForm dv = random_form(base, 4, 1);
    const GradedEndo v{random_odd(tau), Parity::odd};
    // X = -t^2 Id - t dV; exp(X) = sum_k X^k / k!.
    const MatrixForm x = MatrixForm::scalar(base, Mat(-t * t * Mat::Identity(4, 4))) + dv.scaled(-t);
    MatrixForm term = MatrixForm::identity(base, 4);
    MatrixForm series = term;
    for (int k = 1; k < 60; ++k) {
      term = wedge(term, x).scaled(1.0 / k);
      series += term;
    }
    REQUIRE(distance(nilpotent_superexp(t, v, dv), series) < 1e-10);
    REQUIRE(max_abs(SuperExpCache(dv).top_at(t) - series.top()) < 1e-10);
  }
}

TEST_CASE("form bookkeeping") {
  MatrixForm f(2, 2);
  CHECK_THROWS_AS(f.set(0b100, Mat::Identity(2, 2)), DimensionError);
  CHECK_THROWS_AS(f.set(0b01, Mat::Identity(3, 3)), DimensionError);
  CHECK_THROWS_AS(wedge(MatrixForm(2, 2), MatrixForm(3, 2)), DimensionError);
  CHECK_THROWS_AS(MatrixForm(2, 2) + MatrixForm(2, 3), DimensionError);
  CHECK(MatrixForm(2, 2).homogeneous_degree() == 0);
  const MatrixForm mixed = MatrixForm::identity(2, 2) + random_form(2, 2, 1);
  CHECK(mixed.homogeneous_degree() == -1);
  CHECK(mixed.degree_part(1).homogeneous_degree() == 1);
}
