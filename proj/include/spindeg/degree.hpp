#pragma once

// Local degrees of bundle maps on small spheres.
//
//   deg(v) = (n-1)! / ((2n-1)! (2 pi i)^n) * \int_{S^{2n-1}} tr[(v^{-1} dv)^{2n-1}]
//
// evaluated by exact antisymmetrisation of the 2n-1 one-form coefficients at
// every quadrature node, plus the independent oracles used to cross-check it.

#include "spindeg/clifford.hpp"
#include "spindeg/quadrature.hpp"

#include <bit>
#include <cmath>
#include <functional>
#include <sstream>

namespace spindeg {

/// A point-indexed linear map v(x) in a fixed trivialisation.
struct BundleMapField {
  std::function<Mat(const Vec&)> evaluate;
  // Optional analytic derivative (x, direction) -> dv(x)[direction].
  std::function<Mat(const Vec&, const Vec&)> derivative;
  int rank = 0;
  double singular_floor = 1e-8;
  double fd_step = 1e-5;

  Mat operator()(const Vec& x) const { return evaluate(x); }

  Mat differentiate(const Vec& x, const Vec& dir) const {
    if (derivative) return derivative(x, dir);
    return directional_derivative([this](const Vec& y) { return evaluate(y); }, x, dir, fd_step);
  }
};

struct DegreeResult {
  cplx raw{0.0, 0.0};
  long degree = 0;
  double residual = 0.0;
  int rule_level = 0;

  bool operator==(const DegreeResult&) const = default;
};

inline constexpr double kDegreeResidualLimit = 0.05;

inline std::string format_point(const Vec& x) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

/// sum over permutations sigma of sgn(sigma) tr[w_sigma(1) ... w_sigma(k)],
/// enumerated depth-first so prefix products are shared.
inline cplx antisymmetrized_trace(const std::vector<Mat>& omegas) {
  const int k = static_cast<int>(omegas.size());
  if (k == 0) return 0.0;
  const Eigen::Index size = omegas.front().rows();
  std::vector<Mat> prefix(k + 1);
  prefix[0] = Mat::Identity(size, size);
  cplx total = 0.0;
  std::vector<int> order(k);
  auto recurse = [&](auto&& self, int depth, unsigned used, int inversions) -> void {
    if (depth == k) {
      total += (inversions % 2 == 0 ? 1.0 : -1.0) * prefix[k].trace();
      return;
    }
    for (int j = 0; j < k; ++j) {
      if (used & (1u << j)) continue;
      const int added = std::popcount(used >> (j + 1));
      prefix[depth + 1].noalias() = prefix[depth] * omegas[j];
      self(self, depth + 1, used | (1u << j), inversions + added);
    }
  };
  recurse(recurse, 0, 0u, 0);
  return total;
}

/// Normalising constant (n-1)! / ((2n-1)! (2 pi i)^n).
inline cplx degree_constant(int n) {
  return static_cast<double>(factorial(n - 1)) / static_cast<double>(factorial(2 * n - 1)) /
         std::pow(cplx(0.0, 2.0 * kPi), n);
}

/// Coefficient of du^1 ^ ... ^ du^m of tr[(v^{-1} dv)^m] at node k.
inline cplx chern_simons_coefficient(const BundleMapField& v, const SphereRule& rule, std::size_t k) {
  const Vec& x = rule.positions[k];
  const Mat value = v(x);
  if (!all_finite(value)) throw SingularOnSphere("bundle map is not finite at " + format_point(x));
  const double smin = min_singular_value(value);
  if (!(smin > v.singular_floor)) {
    std::ostringstream os;
    os << "bundle map is singular on the sphere at " << format_point(x) << " (min singular value " << smin
       << "); use a smaller radius";
    throw SingularOnSphere(os.str());
  }
  Eigen::PartialPivLU<Mat> lu(value);
  std::vector<Mat> omegas;
  omegas.reserve(rule.sphere_dim);
  for (int j = 0; j < rule.sphere_dim; ++j) {
    const Vec dir = rule.jacobians[k].col(j);
    omegas.push_back(lu.solve(v.differentiate(x, dir)));
  }
  return antisymmetrized_trace(omegas);
}

/// Raw degree integral without rounding or acceptance checks.
inline cplx degree_integral(const BundleMapField& v, const SphereRule& rule) {
  if (rule.sphere_dim % 2 == 0) throw DimensionError("local degree needs an odd-dimensional sphere");
  const int n = (rule.sphere_dim + 1) / 2;
  const cplx integral = integrate_nodes(rule, [&](std::size_t k) { return chern_simons_coefficient(v, rule, k); });
  return degree_constant(n) * integral;
}

inline DegreeResult round_degree(cplx raw, int level) {
  DegreeResult r;
  r.raw = raw;
  r.degree = std::lround(raw.real());
  r.residual = std::abs(raw - static_cast<double>(r.degree));
  r.rule_level = level;
  return r;
}

/// Local degree of v on the sphere of `rule`; throws NonConvergence when the
/// integral is not within 0.05 of an integer.
inline DegreeResult local_degree(const BundleMapField& v, const SphereRule& rule) {
  DegreeResult r = round_degree(degree_integral(v, rule), rule.level);
  if (!(r.residual < kDegreeResidualLimit)) {
    std::ostringstream os;
    os << "degree integral " << r.raw << " is not within " << kDegreeResidualLimit
       << " of an integer at rule level " << rule.level << "; raise the rule level";
    throw NonConvergence(os.str());
  }
  return r;
}

/// Winding number of a nonvanishing loop f: [0, 2pi) -> C by summing phase
/// increments between consecutive samples (argument principle).
inline long winding_number(const std::function<cplx(double)>& f, int samples = 4096, double floor = 1e-12) {
  for (int attempt = 0; attempt < 6; ++attempt, samples *= 2) {
    double total = 0.0;
    bool fine = true;
    cplx prev = f(0.0);
    if (!(std::abs(prev) > floor)) throw SingularOnSphere("winding_number: loop vanishes at theta = 0");
    const cplx first = prev;
    for (int k = 1; k <= samples; ++k) {
      const double theta = 2.0 * kPi * k / samples;
      const cplx cur = (k == samples) ? first : f(theta);
      if (!(std::abs(cur) > floor))
        throw SingularOnSphere("winding_number: zero crossing detected near theta = " + std::to_string(theta));
      const double step = std::arg(cur / prev);
      if (std::abs(step) > kPi / 2) fine = false;
      total += step;
      prev = cur;
    }
    if (fine) return std::lround(total / (2.0 * kPi));
  }
  throw NonConvergence("winding_number: loop oscillates faster than the sampling resolves");
}

/// Brouwer degree of g: S^{2n-1}(r) -> S^{2n-1}(1) from the normalised pullback
/// of the unit-sphere volume form, ((n-1)!/(2 pi^n)) \int g^* omega.
inline long brouwer_degree(const std::function<Vec(const Vec&)>& g, const SphereRule& rule, double fd_step = 1e-5,
                           double* raw_out = nullptr) {
  if (rule.sphere_dim % 2 == 0) throw DimensionError("brouwer_degree expects an odd-dimensional sphere");
  const int n = (rule.sphere_dim + 1) / 2;
  const int d = rule.ambient_dim();
  const cplx integral = integrate_nodes(rule, [&](std::size_t k) -> cplx {
    const Vec& x = rule.positions[k];
    const Vec gx = g(x);
    if (gx.size() != d) throw DimensionError("brouwer_degree: map has the wrong target dimension");
    if (std::abs(gx.norm() - 1.0) > 1e-8)
      throw DimensionError("brouwer_degree: image is not on the unit sphere at " + format_point(x));
    RMat frame(d, d);
    frame.col(0) = gx;
    for (int j = 0; j < d - 1; ++j)
      frame.col(j + 1) = directional_derivative(g, x, Vec(rule.jacobians[k].col(j)), fd_step);
    return frame.determinant();
  });
  const double raw = integral.real() * static_cast<double>(factorial(n - 1)) / (2.0 * std::pow(kPi, n));
  if (raw_out) *raw_out = raw;
  const long deg = std::lround(raw);
  if (!(std::abs(raw - deg) < kDegreeResidualLimit)) {
    std::ostringstream os;
    os << "brouwer_degree: integral " << raw << " is not within " << kDegreeResidualLimit << " of an integer";
    throw NonConvergence(os.str());
  }
  return deg;
}

/// Constant k_n in tr[(v^{-1}dv)^{2n-1}] = k_n * eta_p^* omega for v = i c(eta),
/// |eta| = 1, with the grading tau = i^n c(e_1)...c(e_{2n}):
/// k_n = -2^{n-1} (2n-1)! (-i)^n.
inline cplx clifford_trace_constant(int n) {
  return -std::pow(2.0, n - 1) * static_cast<double>(factorial(2 * n - 1)) * std::pow(cplx(0.0, -1.0), n);
}

/// Largest nodewise gap between tr[(v^{-1}dv)^{2n-1}] for v = i c(eta)|S+ and
/// k_n det[eta, d_1 eta, ..., d_{2n-1} eta], both as chart coefficients.
inline double clifford_trace_identity_residual(
    const std::function<Vec(const Vec&)>& eta, const CliffordModule& mod, const SphereRule& rule,
    const std::function<Vec(const Vec&, const Vec&)>& eta_derivative = {}, double fd_step = 1e-5) {
  const int d = rule.ambient_dim();
  if (mod.dim_base != d) throw DimensionError("clifford_trace_identity_residual: module/sphere mismatch");
  const int n = d / 2;
  const cplx kappa = clifford_trace_constant(n);
  std::vector<double> gaps(rule.size());
  parallel_for(rule.size(), [&](std::size_t k) {
    const Vec& x = rule.positions[k];
    const Vec e = eta(x);
    if (std::abs(e.norm() - 1.0) > 1e-8)
      throw DimensionError("clifford_trace_identity_residual: eta is not a unit field at " + format_point(x));
    std::vector<Vec> de;
    for (int j = 0; j < d - 1; ++j) {
      const Vec dir = rule.jacobians[k].col(j);
      de.push_back(eta_derivative ? eta_derivative(x, dir) : directional_derivative(eta, x, dir, fd_step));
    }
    const Mat v = plus_to_minus(mod, kI * clifford_action(mod, e).matrix);
    Eigen::PartialPivLU<Mat> lu(v);
    std::vector<Mat> omegas;
    for (const auto& q : de) omegas.push_back(lu.solve(plus_to_minus(mod, kI * clifford_action(mod, q).matrix)));
    const cplx lhs = antisymmetrized_trace(omegas);
    RMat frame(d, d);
    frame.col(0) = e;
    for (int j = 0; j < d - 1; ++j) frame.col(j + 1) = de[j];
    gaps[k] = std::abs(lhs - kappa * frame.determinant());
  });
  return gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end());
}

}  // namespace spindeg
