#pragma once

// Quillen superconnection A_t = d + tV on a flat Z2-graded bundle
// E = E+ (+) E-, restricted to a sphere where V^2 = Id. There
// A_t^2 = t^2 Id + t dV, so every heat form is a finite sum in dV.

#include "spindeg/degree.hpp"
#include "spindeg/matforms.hpp"

namespace spindeg {

struct FlatSuperModel {
  std::shared_ptr<const Mat> grading;  // tau = diag(Id_{E+}, -Id_{E-})
  std::function<Mat(const Vec&)> odd_map;  // V(x) = v + v^*
  double fd_step = 1e-5;
  double unitary_tol = 1e-8;

  Mat V(const Vec& x) const { return odd_map(x); }

  /// dV as a matrix-valued one-form in the given chart directions.
  MatrixForm dV(const Vec& x, const RMat& chart_dirs) const {
    std::vector<Mat> coeffs;
    coeffs.reserve(chart_dirs.cols());
    for (Eigen::Index j = 0; j < chart_dirs.cols(); ++j)
      coeffs.push_back(directional_derivative(odd_map, x, Vec(chart_dirs.col(j)), fd_step));
    MatrixForm f = MatrixForm::one_form(coeffs);
    f.grading = grading;
    return f;
  }

  /// Checks parity, self-adjointness and (optionally) the unitary locus at x.
  void check_at(const Vec& x, bool require_unitary) const {
    const Mat v = V(x);
    const Mat& tau = *grading;
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    if ((tau * v + v * tau).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw DimensionError("superconnection endomorphism is not odd at " + format_point(x));
    if ((v - v.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw DimensionError("superconnection endomorphism is not self-adjoint at " + format_point(x));
    if (require_unitary) {
      const Mat sq = v * v - Mat::Identity(v.rows(), v.cols());
      if (sq.cwiseAbs().maxCoeff() > unitary_tol)
        throw DimensionError("V^2 != Id at " + format_point(x) + "; the flat model needs the unitary locus");
    }
  }
};

/// Odd self-adjoint V = [[0, v^*], [v, 0]] in the basis (E+, E-).
inline Mat odd_extension(const Mat& v) {
  const Eigen::Index r = v.cols();
  const Eigen::Index s = v.rows();
  Mat out = Mat::Zero(r + s, r + s);
  out.block(r, 0, s, r) = v;
  out.block(0, r, r, s) = v.adjoint();
  return out;
}

inline std::shared_ptr<const Mat> split_grading(Eigen::Index plus, Eigen::Index minus) {
  Mat tau = Mat::Zero(plus + minus, plus + minus);
  tau.topLeftCorner(plus, plus).setIdentity();
  tau.bottomRightCorner(minus, minus) = -Mat::Identity(minus, minus);
  return std::make_shared<const Mat>(std::move(tau));
}

/// Flat model built from the unitary polar factor of v, so V^2 = Id wherever v
/// is invertible.
inline FlatSuperModel unitary_model(const BundleMapField& v) {
  FlatSuperModel model;
  model.grading = split_grading(v.rank, v.rank);
  auto eval = v.evaluate;
  model.odd_map = [eval](const Vec& x) { return odd_extension(polar_unitary(eval(x))); };
  model.fd_step = v.fd_step;
  return model;
}

/// phi on a degree-k form: multiply by (2 pi i)^{-k/2} with the principal
/// branch sqrt(2 pi i) = sqrt(2 pi) e^{i pi/4}.
inline cplx phi_factor(int k) {
  const cplx root = std::sqrt(2.0 * kPi) * std::exp(cplx(0.0, kPi / 4.0));
  return std::pow(root, -k);
}

inline ScalarForm apply_phi(const ScalarForm& f) {
  ScalarForm out(f.base_dim(), 1);
  for (const auto& [idx, c] : f.terms()) out.set(idx, phi_factor(form_degree(idx)) * c);
  return out;
}

/// ch(E, A_t) = phi tr_s[exp(-A_t^2)] at a point, in the given chart directions.
inline ScalarForm chern_character_form(const FlatSuperModel& model, double t, const Vec& x, const RMat& chart_dirs) {
  model.check_at(x, t != 0.0);
  const MatrixForm dv = model.dV(x, chart_dirs);
  const MatrixForm heat = nilpotent_superexp(t, GradedEndo{model.V(x), Parity::odd}, dv);
  return apply_phi(supertrace_form(heat, *model.grading));
}

/// Top-degree coefficient of tr_s[V exp(-A_t^2)] at a node, for every t in `ts`.
inline std::vector<cplx> transgression_density(const FlatSuperModel& model, const Vec& x, const RMat& chart_dirs,
                                               const std::vector<double>& ts) {
  model.check_at(x, true);
  const Mat v = model.V(x);
  const MatrixForm dv = model.dV(x, chart_dirs);
  const SuperExpCache cache(dv);
  // V has form degree 0, so the top part of V exp(-A_t^2) is V times the top part.
  const Mat tv = *model.grading * v;
  std::vector<cplx> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back((tv * cache.top_at(t)).trace());
  return out;
}

/// \int_{sphere} gamma(T) with the t-integral done by t_steps-point
/// Gauss-Legendre on [0, T].
inline cplx gamma_T_integral(const FlatSuperModel& model, const SphereRule& rule, double T, int t_steps = 64) {
  if (T < 0.0) throw DimensionError("gamma_T_integral needs T >= 0");
  if (T == 0.0) return 0.0;
  const GaussLegendre gl = gauss_legendre(t_steps);
  std::vector<double> ts(t_steps), tw(t_steps);
  for (int i = 0; i < t_steps; ++i) {
    ts[i] = 0.5 * T * (gl.nodes[i] + 1.0);
    tw[i] = 0.5 * T * gl.weights[i];
  }
  const int m = rule.sphere_dim;
  const cplx integral = integrate_nodes(rule, [&](std::size_t k) {
    const auto dens = transgression_density(model, rule.positions[k], rule.jacobians[k], ts);
    cplx acc = 0.0;
    for (int i = 0; i < t_steps; ++i) acc += tw[i] * dens[i];
    return acc;
  });
  // (1/sqrt(2 pi i)) * phi on a degree-m form: (2 pi i)^{-(m+1)/2}.
  return phi_factor(1) * phi_factor(m) * integral;
}

/// T -> infinity limit using \int_0^inf t^{2n-1} e^{-t^2} dt = (n-1)!/2:
///   (2 pi i)^{-n} * (-1/(2n-1)!) * ((n-1)!/2) * \int tr_s[V (dV)^{2n-1}].
inline cplx transgression_limit(const FlatSuperModel& model, const SphereRule& rule) {
  const int m = rule.sphere_dim;
  if (m % 2 == 0) throw DimensionError("transgression_limit needs an odd-dimensional sphere");
  const int n = (m + 1) / 2;
  const cplx integral = integrate_nodes(rule, [&](std::size_t k) {
    const Vec& x = rule.positions[k];
    model.check_at(x, true);
    const MatrixForm dv = model.dV(x, rule.jacobians[k]);
    const Mat top = form_power(dv, m).top();
    return (*model.grading * model.V(x) * top).trace();
  });
  const double t_moment = 0.5 * static_cast<double>(factorial(n - 1));
  return std::pow(cplx(0.0, 2.0 * kPi), -n) * (-1.0 / static_cast<double>(factorial(m))) * t_moment * integral;
}

}  // namespace spindeg
