#include "spindeg/degree.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

using namespace spindeg;
using spindeg::testing::random_mat;
using spindeg::testing::random_unitary;
using spindeg::testing::uniform;

namespace {

double angle(const Vec& x) { return std::atan2(x[1], x[0]); }

BundleMapField scalar_map(std::function<cplx(double)> f) {
  BundleMapField v;
  v.rank = 1;
  v.evaluate = [f](const Vec& x) {
    Mat m(1, 1);
    m(0, 0) = f(angle(x));
    return m;
  };
  return v;
}

BundleMapField power_map(int k) {
  return scalar_map([k](double th) { return std::exp(cplx(0.0, k * th)); });
}

// Smooth 2x2 loop: diag(e^{ia th}, e^{ib th}) plus a small trigonometric perturbation.
struct RandomLoop {
  int a, b;
  std::vector<Mat> cos_terms, sin_terms;

  Mat at(double th) const {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = std::exp(cplx(0.0, a * th));
    m(1, 1) = std::exp(cplx(0.0, b * th));
    for (std::size_t j = 0; j < cos_terms.size(); ++j)
      m += cos_terms[j] * std::cos((j + 1) * th) + sin_terms[j] * std::sin((j + 1) * th);
    return m;
  }
};

RandomLoop random_loop() {
  for (;;) {
    RandomLoop loop;
    loop.a = static_cast<int>(std::floor(uniform(-3.0, 4.0)));
    loop.b = static_cast<int>(std::floor(uniform(-3.0, 4.0)));
    const double amp = uniform(0.05, 0.6);
    for (int j = 0; j < 3; ++j) {
      loop.cos_terms.push_back(amp * random_mat(2, 2) / (j + 1));
      loop.sin_terms.push_back(amp * random_mat(2, 2) / (j + 1));
    }
    double smin = 1e9;
    for (int k = 0; k < 2000; ++k) smin = std::min(smin, min_singular_value(loop.at(2 * kPi * k / 2000.0)));
    if (smin > 0.05) return loop;
  }
}

}  // namespace

TEST_CASE("constant maps have degree zero") {
  const Mat c = random_unitary(3);
  BundleMapField v;
  v.rank = 3;
  v.evaluate = [c](const Vec&) { return c; };
  for (int d : {2, 4, 6}) {
    const auto r = local_degree(v, sphere_rule(d, 0.5, Vec::Zero(d), d == 6 ? 1 : 2));
    CHECK(r.degree == 0);
    CHECK(r.residual < 1e-12);
  }
}

TEST_CASE("powers of the angle on the circle") {
  for (int k = -3; k <= 3; ++k) {
    const auto r = local_degree(power_map(k), sphere_rule(2, 1.0, Vec::Zero(2), 3));
    CHECK(r.degree == k);
    CHECK(r.residual < 1e-8);
    CHECK(r.rule_level == 3);
  }
}

TEST_CASE("antisymmetrised trace of one and two factors") {
  const Mat a = random_mat(3, 3), b = random_mat(3, 3);
  CHECK(std::abs(antisymmetrized_trace({a}) - a.trace()) < 1e-13);
  CHECK(std::abs(antisymmetrized_trace({a, b}) - (a * b - b * a).trace()) < 1e-13);
  const Mat c = random_mat(3, 3);
  const cplx expected =
      (a * b * c - a * c * b - b * a * c + b * c * a + c * a * b - c * b * a).trace();
  CHECK(std::abs(antisymmetrized_trace({a, b, c}) - expected) < 1e-12);
}

TEST_CASE("winding numbers") {
  CHECK(winding_number([](double) { return cplx(2.0, 1.0); }) == 0);
  for (int k = -4; k <= 4; ++k) CHECK(winding_number([k](double t) { return std::exp(cplx(0.0, k * t)); }) == k);
  CHECK_THROWS_AS(winding_number([](double t) { return cplx(std::cos(t), 0.0); }, 4096, 1e-3), SingularOnSphere);
}

TEST_CASE("degree of 2x2 loops equals the winding number of the determinant") {
  const auto rule = sphere_rule(2, 1.0, Vec::Zero(2), 4);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomLoop loop = random_loop();
    BundleMapField v;
    v.rank = 2;
    v.evaluate = [loop](const Vec& x) { return loop.at(angle(x)); };
    const long w = winding_number([&](double th) { return loop.at(th).determinant(); });
    const auto r = local_degree(v, rule);
    CHECK(r.degree == w);
    CHECK(r.residual < 1e-6);
  }
}

TEST_CASE("degree is invariant under fixed unitary conjugation") {
  const auto rule = sphere_rule(2, 1.0, Vec::Zero(2), 4);
  for (int trial = 0; trial < 5; ++trial) {
    const RandomLoop loop = random_loop();
    const Mat U = random_unitary(2), W = random_unitary(2);
    BundleMapField v, uvw;
    v.rank = uvw.rank = 2;
    v.evaluate = [loop](const Vec& x) { return loop.at(angle(x)); };
    uvw.evaluate = [loop, U, W](const Vec& x) { return Mat(U * loop.at(angle(x)) * W); };
    CHECK(local_degree(v, rule).degree == local_degree(uvw, rule).degree);
  }
}

TEST_CASE("degree of a polar unitary factor matches the map") {
  const auto rule = sphere_rule(2, 1.0, Vec::Zero(2), 4);
  for (int trial = 0; trial < 5; ++trial) {
    const RandomLoop loop = random_loop();
    BundleMapField v, u;
    v.rank = u.rank = 2;
    v.evaluate = [loop](const Vec& x) { return loop.at(angle(x)); };
    u.evaluate = [loop](const Vec& x) { return polar_unitary(loop.at(angle(x))); };
    CHECK(local_degree(v, rule).degree == local_degree(u, rule).degree);
  }
}

TEST_CASE("singular values on the sphere are reported") {
  BundleMapField v;
  v.rank = 1;
  v.evaluate = [](const Vec& x) {
    Mat m(1, 1);
    m(0, 0) = cplx(x[0], 0.0);  // vanishes at theta = pi/2
    return m;
  };
  SphereRule rule = sphere_rule(2, 1.0, Vec::Zero(2), 1);
  // Put a node exactly on the zero.
  rule.positions[0] << 0.0, 1.0;
  CHECK_THROWS_AS(local_degree(v, rule), SingularOnSphere);
}

TEST_CASE("under-resolved integrals are rejected") {
  // z - a with |a| close to 1: sharply peaked integrand.
  auto v = scalar_map([](double th) { return std::exp(cplx(0.0, th)) - 0.97; });
  CHECK_THROWS_AS(local_degree(v, sphere_rule(2, 1.0, Vec::Zero(2), 1)), NonConvergence);
  CHECK(local_degree(v, sphere_rule(2, 1.0, Vec::Zero(2), 6)).degree == 1);
}

TEST_CASE("degree is invariant under radius halving and rule refinement") {
  // v(x) = x1 + i x2 (linear, an isolated zero at the origin) in rank 1 and a 2x2 lift.
  BundleMapField v;
  v.rank = 2;
  v.evaluate = [](const Vec& x) {
    Mat m(2, 2);
    m << cplx(x[0], x[1]), 0.3 * x[0], 0.2, cplx(1.0, x[1]);
    return m;
  };
  double prev = 1.0;
  for (double eps : {0.4, 0.2, 0.1}) {
    for (int level = 2; level <= 4; ++level) {
      const auto r = local_degree(v, sphere_rule(2, eps, Vec::Zero(2), level));
      CHECK(r.degree == 1);
      if (eps == 0.1) {
        CHECK(r.residual <= prev + 1e-9);
        prev = r.residual;
      }
    }
  }
}

TEST_CASE("Brouwer degree of simple maps") {
  const auto circle = sphere_rule(2, 1.0, Vec::Zero(2), 2);
  CHECK(brouwer_degree([](const Vec& x) { return x; }, circle) == 1);
  const auto small = sphere_rule(2, 0.3, Vec::Zero(2), 2);
  CHECK(brouwer_degree([](const Vec& x) { return Vec(x / x.norm()); }, small) == 1);
  CHECK(brouwer_degree(
            [](const Vec& x) {
              Vec y(2);
              y << x[0], -x[1];
              return Vec(y / y.norm());
            },
            small) == -1);
  CHECK_THROWS_AS(brouwer_degree([](const Vec& x) { return Vec(2.0 * x); }, circle), DimensionError);
  double raw = 0.0;
  CHECK(brouwer_degree([](const Vec& x) { return x; }, circle, 1e-5, &raw) == 1);
  CHECK(std::abs(raw - 1.0) < 1e-9);
}

TEST_CASE("Brouwer degree of linear simple zeros is the Jacobian sign") {
  for (int trial = 0; trial < 10; ++trial) {
    const int d = trial < 6 ? 2 : 4;
    RMat a(d, d);
    do {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = uniform();
    } while (Eigen::JacobiSVD<RMat>(a).singularValues().minCoeff() < 0.25 * a.norm() / std::sqrt(d));
    const long expected = a.determinant() > 0 ? 1 : -1;
    const auto rule = sphere_rule(d, 0.2, Vec::Zero(d), d == 2 ? 4 : 3);
    double raw = 0.0;
    const long deg = brouwer_degree([a](const Vec& x) { return Vec((a * x) / (a * x).norm()); }, rule, 1e-5, &raw);
    CHECK(deg == expected);
    CHECK(std::abs(raw - expected) < 1e-3);
  }
}

TEST_CASE("trace identity constants") {
  CHECK(std::abs(clifford_trace_constant(1) - cplx(0.0, 1.0)) < 1e-12);
  CHECK(std::abs(clifford_trace_constant(2) - 12.0) < 1e-12);
  CHECK(std::abs(clifford_trace_constant(3) - cplx(0.0, -480.0)) < 1e-9);
  CHECK(std::abs(degree_constant(1) - 1.0 / cplx(0.0, 2.0 * kPi)) < 1e-15);
}

TEST_CASE("trace identity for constant and rotated fields") {
  const auto mod = build_clifford_module(2);
  const auto rule = sphere_rule(2, 0.5, Vec::Zero(2), 2);
  Vec e(2);
  e << 0.6, 0.8;
  CHECK(clifford_trace_identity_residual([e](const Vec&) { return e; }, mod, rule) < 1e-12);
  const double alpha = 0.7;
  auto eta = [alpha](const Vec& x) {
    const double th = std::atan2(x[1], x[0]) + alpha;
    Vec y(2);
    y << std::cos(th), std::sin(th);
    return y;
  };
  auto deta = [alpha](const Vec& x, const Vec& dir) {
    const double th = std::atan2(x[1], x[0]) + alpha;
    const double dth = (x[0] * dir[1] - x[1] * dir[0]) / x.squaredNorm();
    Vec y(2);
    y << -std::sin(th) * dth, std::cos(th) * dth;
    return y;
  };
  CHECK(clifford_trace_identity_residual(eta, mod, rule, deta) < 1e-8);
  CHECK(clifford_trace_identity_residual(eta, mod, rule) < 1e-8);
  CHECK_THROWS_AS(clifford_trace_identity_residual([](const Vec& x) { return Vec(3.0 * x); }, mod, rule),
                  DimensionError);
}

TEST_CASE("trace identity for random linear fields in dimensions 4 and 6") {
  for (int d : {4, 6}) {
    const auto mod = build_clifford_module(d);
    const auto rule = sphere_rule(d, 0.3, Vec::Zero(d), 1);
    for (int trial = 0; trial < 3; ++trial) {
      RMat a(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = uniform() + (i == j ? 2.0 : 0.0);
      auto eta = [a](const Vec& x) { return Vec((a * x) / (a * x).norm()); };
      // Scale by the size of the left side, which grows like (2n-1)!/eps^{2n-1}.
      const double scale = std::abs(clifford_trace_constant(d / 2)) / std::pow(0.3, d - 1);
      CHECK(clifford_trace_identity_residual(eta, mod, rule) < 1e-6 * scale);
    }
  }
}
