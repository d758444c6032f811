#pragma once

// Quadrature rules on round spheres S^{d-1}(r) in hyperspherical charts.
//
// Chart u = (a_1, ..., a_{d-2}, phi): polar angles a_i in (0, pi) carry
// Gauss-Legendre nodes; the periodic angle phi uses the trapezoid rule. For
// d = 2 the chart is the single angle theta. The chart orientation relative to
// the outward-normal-first boundary orientation is stored in `orientation` and
// applied by integrate_top_form, so weights stay positive.

#include "spindeg/core.hpp"

#include <functional>

namespace spindeg {

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw DimensionError("gauss_legendre needs n >= 1");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / pp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

struct SphereRule {
  int sphere_dim = 0;  // d - 1
  double radius = 1.0;
  Vec center;
  int level = 0;
  int orientation = 1;
  std::vector<Vec> params;     // chart coordinates u
  std::vector<Vec> positions;  // x(u), |x - center| = radius
  std::vector<RMat> jacobians; // dx/du, d x (d-1)
  std::vector<double> weights; // parameter-space weights, positive

  std::size_t size() const { return positions.size(); }
  int ambient_dim() const { return sphere_dim + 1; }

  /// Outward unit normal at node k.
  Vec normal(std::size_t k) const { return (positions[k] - center) / radius; }

  /// sqrt(det(J^T J)) at node k.
  double volume_factor(std::size_t k) const {
    const RMat g = jacobians[k].transpose() * jacobians[k];
    return std::sqrt(std::abs(g.determinant()));
  }
};

namespace detail {

// Unit-sphere point and its derivatives for hyperspherical angles.
inline void hyperspherical(const Vec& u, Vec& x, RMat& jac) {
  const int m = static_cast<int>(u.size());  // sphere dimension
  const int d = m + 1;
  x.resize(d);
  jac.setZero(d, m);
  // x_0 = cos a_0, x_k = prod_{j<k} sin a_j * cos a_k, x_{d-1} = prod_{j<m} sin a_j
  // where the last angle is treated with (cos, sin).
  std::vector<double> s(m), c(m);
  for (int j = 0; j < m; ++j) { s[j] = std::sin(u[j]); c[j] = std::cos(u[j]); }
  for (int k = 0; k < d; ++k) {
    double val = 1.0;
    for (int j = 0; j < std::min(k, m); ++j) val *= s[j];
    if (k < m) val *= c[k];
    x[k] = val;
    for (int a = 0; a < m; ++a) {
      double der = 1.0;
      bool used = false;
      for (int j = 0; j < std::min(k, m); ++j) {
        if (j == a) { der *= c[j]; used = true; }
        else der *= s[j];
      }
      if (k < m) {
        if (k == a) { der *= -s[k]; used = true; }
        else der *= c[k];
      }
      jac(k, a) = used ? der : 0.0;
    }
  }
}

}  // namespace detail

/// Quadrature rule on S^{d-1}(radius) centred at `center`.
///   d = 2: 16 * 2^level equispaced nodes.
///   d = 4: 4 * 2^level nodes per angle (level 4 gives 64^3 nodes).
///   d = 6: 2 * 2^level nodes per angle.
inline SphereRule sphere_rule(int d, double radius, const Vec& center, int level) {
  if (d != 2 && d != 4 && d != 6)
    throw DimensionError("sphere_rule supports S^1, S^3 and S^5 only, got S^" + std::to_string(d - 1));
  if (level < 1) throw DimensionError("sphere_rule needs level >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DimensionError("sphere radius must be positive");
  if (center.size() != d) throw DimensionError("sphere center has the wrong dimension");

  SphereRule rule;
  rule.sphere_dim = d - 1;
  rule.radius = radius;
  rule.center = center;
  rule.level = level;
  const int m = d - 1;

  int per_axis = 0;
  if (d == 2) per_axis = 16 << level;
  if (d == 4) per_axis = 4 << level;
  if (d == 6) per_axis = 2 << level;

  const GaussLegendre gl = gauss_legendre(per_axis);
  std::vector<double> polar(per_axis), polar_w(per_axis);
  for (int i = 0; i < per_axis; ++i) {
    polar[i] = 0.5 * kPi * (gl.nodes[i] + 1.0);
    polar_w[i] = 0.5 * kPi * gl.weights[i];
  }
  const int n_periodic = per_axis;
  const double dphi = 2.0 * kPi / n_periodic;

  std::size_t total = n_periodic;
  for (int j = 0; j + 1 < m; ++j) total *= per_axis;
  rule.params.reserve(total);
  rule.positions.reserve(total);
  rule.jacobians.reserve(total);
  rule.weights.reserve(total);

  std::vector<int> idx(m, 0);
  for (std::size_t count = 0; count < total; ++count) {
    Vec u(m);
    double w = 1.0;
    for (int j = 0; j + 1 < m; ++j) {
      u[j] = polar[idx[j]];
      w *= polar_w[idx[j]];
    }
    u[m - 1] = dphi * idx[m - 1];
    w *= dphi;
    Vec x;
    RMat jac;
    detail::hyperspherical(u, x, jac);
    rule.params.push_back(u);
    rule.positions.push_back(center + radius * x);
    rule.jacobians.push_back(radius * jac);
    rule.weights.push_back(w);
    // odometer, periodic angle fastest
    for (int j = m - 1; j >= 0; --j) {
      const int lim = (j == m - 1) ? n_periodic : per_axis;
      if (++idx[j] < lim) break;
      idx[j] = 0;
    }
  }
  // Orientation of the chart relative to the outward-normal-first convention.
  RMat frame(d, d);
  frame.col(0) = rule.normal(0);
  frame.rightCols(m) = rule.jacobians[0];
  rule.orientation = frame.determinant() > 0 ? 1 : -1;
  return rule;
}

/// Integral of a top-degree form given by its du^1 ^ ... ^ du^{d-1}
/// coefficient at each node.
inline cplx integrate_top_form(const SphereRule& rule, const std::vector<cplx>& coefficients) {
  if (coefficients.size() != rule.size())
    throw DimensionError("integrand has " + std::to_string(coefficients.size()) + " values for a rule with " +
                         std::to_string(rule.size()) + " nodes");
  cplx sum = 0.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k) sum += rule.weights[k] * coefficients[k];
  return static_cast<double>(rule.orientation) * sum;
}

/// Evaluates coefficient(k) at every node (possibly concurrently) and
/// integrates the result.
template <class F>
cplx integrate_nodes(const SphereRule& rule, F&& coefficient) {
  std::vector<cplx> values(rule.size());
  parallel_for(rule.size(), [&](std::size_t k) { values[k] = coefficient(k); });
  return integrate_top_form(rule, values);
}

/// Standard volume form coefficient at node k: det[n, dx/du_1, ..., dx/du_m].
inline double volume_form_coefficient(const SphereRule& rule, std::size_t k) {
  const int d = rule.ambient_dim();
  RMat frame(d, d);
  frame.col(0) = rule.normal(k);
  frame.rightCols(d - 1) = rule.jacobians[k];
  return frame.determinant();
}

/// Central difference (f(x + h dir) - f(x - h dir)) / (2h).
template <class F>
auto directional_derivative(F&& f, const Vec& x, const Vec& dir, double h) {
  if (!(h > 0.0)) throw DimensionError("finite-difference step must be positive");
  auto fp = f(Vec(x + h * dir));
  auto fm = f(Vec(x - h * dir));
  auto out = ((fp - fm) / (2.0 * h)).eval();
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const auto v = out.data()[i];
    if (!std::isfinite(std::abs(v))) throw DimensionError("non-finite value in finite difference");
  }
  return out;
}

}  // namespace spindeg
