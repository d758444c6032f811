#pragma once

// Complex spinor modules of R^d (d even) and the odd endomorphisms built from
// a pair of real vectors (xi, eta).

#include "spindeg/core.hpp"

namespace spindeg {

enum class Realization {
  standard,   // c(e_1) = i sigma_x, c(e_2) = i sigma_y, recursively tensored
  conjugate,  // entrywise complex conjugate of the standard gammas
};

struct CliffordModule {
  int dim_base = 0;
  int spinor_dim = 0;
  std::vector<Mat> gammas;  // c(e_1) ... c(e_d), skew-adjoint, c(e_i)^2 = -1
  Mat tau;                  // chirality i^n c(e_1)...c(e_d)
  std::vector<int> plus_indices;
  std::vector<int> minus_indices;

  int half_dim() const { return spinor_dim / 2; }
};

namespace detail {

inline Mat pauli(char which) {
  Mat m = Mat::Zero(2, 2);
  switch (which) {
    case 'x': m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case 'y': m(0, 1) = -kI; m(1, 0) = kI; break;
    case 'z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: m = Mat::Identity(2, 2);
  }
  return m;
}

// Completes a module from its gammas: chirality, and the index split.
inline CliffordModule finish_module(std::vector<Mat> gammas) {
  CliffordModule mod;
  mod.dim_base = static_cast<int>(gammas.size());
  mod.spinor_dim = static_cast<int>(gammas.front().rows());
  const int n = mod.dim_base / 2;
  Mat prod = Mat::Identity(mod.spinor_dim, mod.spinor_dim);
  for (const auto& g : gammas) prod = prod * g;
  cplx phase = 1.0;
  for (int k = 0; k < n; ++k) phase *= kI;
  mod.tau = phase * prod;
  mod.gammas = std::move(gammas);
  for (int i = 0; i < mod.spinor_dim; ++i) {
    for (int j = 0; j < mod.spinor_dim; ++j)
      if (i != j && std::abs(mod.tau(i, j)) > 1e-12)
        throw DimensionError("chirality operator is not diagonal in the construction basis");
    if (mod.tau(i, i).real() > 0) mod.plus_indices.push_back(i);
    else mod.minus_indices.push_back(i);
  }
  return mod;
}

}  // namespace detail

/// Spinor module of R^d by the recursive tensor construction. Deterministic:
/// the same d and realization always give identical matrices.
inline CliffordModule build_clifford_module(int d, Realization realization = Realization::standard) {
  if (d < 2 || d % 2 != 0)
    throw DimensionError("Clifford module requires an even dimension >= 2, got " + std::to_string(d));
  using detail::pauli;
  std::vector<Mat> herm{pauli('x'), pauli('y')};
  for (int k = 2; k < d; k += 2) {
    const Eigen::Index m = herm.front().rows();
    std::vector<Mat> next;
    next.reserve(herm.size() + 2);
    for (const auto& g : herm) next.push_back(kron(g, pauli('z')));
    next.push_back(kron(Mat::Identity(m, m), pauli('x')));
    next.push_back(kron(Mat::Identity(m, m), pauli('y')));
    herm = std::move(next);
  }
  std::vector<Mat> gammas;
  gammas.reserve(herm.size());
  for (auto& g : herm) {
    Mat c = kI * g;
    if (realization == Realization::conjugate) c = c.conjugate().eval();
    gammas.push_back(std::move(c));
  }
  return detail::finish_module(std::move(gammas));
}

inline void check_dim(const CliffordModule& mod, const Vec& x, const char* what) {
  if (x.size() != mod.dim_base)
    throw DimensionError(std::string(what) + ": vector of length " + std::to_string(x.size()) +
                         " for a module over R^" + std::to_string(mod.dim_base));
}

/// c(x) = sum_i x_i c(e_i).
inline GradedEndo clifford_action(const CliffordModule& mod, const Vec& x) {
  check_dim(mod, x, "clifford_action");
  Mat out = Mat::Zero(mod.spinor_dim, mod.spinor_dim);
  for (int i = 0; i < mod.dim_base; ++i)
    if (x[i] != 0.0) out += x[i] * mod.gammas[i];
  return {std::move(out), Parity::odd};
}

/// V_K = tau c(xi) + i c(eta), self-adjoint and odd.
inline GradedEndo build_vk(const CliffordModule& mod, const Vec& xi, const Vec& eta) {
  check_dim(mod, xi, "build_vk(xi)");
  check_dim(mod, eta, "build_vk(eta)");
  Mat m = mod.tau * clifford_action(mod, xi).matrix + kI * clifford_action(mod, eta).matrix;
  return {std::move(m), Parity::odd};
}

inline Mat vk_square(const CliffordModule& mod, const Vec& xi, const Vec& eta) {
  const Mat v = build_vk(mod, xi, eta).matrix;
  return v * v;
}

/// Closed form |xi|^2 + |eta|^2 + i tau (c(xi)c(eta) - c(eta)c(xi)).
inline Mat vk_square_closed_form(const CliffordModule& mod, const Vec& xi, const Vec& eta) {
  const Mat cx = clifford_action(mod, xi).matrix;
  const Mat ce = clifford_action(mod, eta).matrix;
  return (xi.squaredNorm() + eta.squaredNorm()) * Mat::Identity(mod.spinor_dim, mod.spinor_dim) +
         kI * mod.tau * (cx * ce - ce * cx);
}

/// Block of an operator mapping S_from into S_to (rows: target, columns: source).
inline Mat chiral_block(const CliffordModule& mod, const Mat& op, bool from_plus, bool to_plus) {
  const auto& src = from_plus ? mod.plus_indices : mod.minus_indices;
  const auto& dst = to_plus ? mod.plus_indices : mod.minus_indices;
  Mat out(dst.size(), src.size());
  for (std::size_t r = 0; r < dst.size(); ++r)
    for (std::size_t c = 0; c < src.size(); ++c) out(r, c) = op(dst[r], src[c]);
  return out;
}

/// The S+ -> S- block of an odd operator.
inline Mat plus_to_minus(const CliffordModule& mod, const Mat& op) {
  return chiral_block(mod, op, true, false);
}

inline Parity detect_parity(const CliffordModule& mod, const Mat& op, double tol = 1e-12) {
  const Mat tt = mod.tau * op;
  const Mat ot = op * mod.tau;
  const double scale = std::max(1.0, op.cwiseAbs().maxCoeff());
  if ((tt - ot).cwiseAbs().maxCoeff() <= tol * scale) return Parity::even;
  if ((tt + ot).cwiseAbs().maxCoeff() <= tol * scale) return Parity::odd;
  throw DimensionError("operator has mixed parity with respect to the grading");
}

/// Graded tensor product of modules over R^{d_a} and R^{d_b}. Operators of the
/// left factor lift as op (x) Id, those of the right factor as tau_a (x) op.
inline CliffordModule graded_tensor(const CliffordModule& a, const CliffordModule& b) {
  std::vector<Mat> gammas;
  gammas.reserve(a.gammas.size() + b.gammas.size());
  const Mat ib = Mat::Identity(b.spinor_dim, b.spinor_dim);
  for (const auto& g : a.gammas) gammas.push_back(kron(g, ib));
  for (const auto& g : b.gammas) gammas.push_back(kron(a.tau, g));
  CliffordModule out = detail::finish_module(std::move(gammas));
  // The chirality of the product equals tau_a (x) tau_b.
  if ((out.tau - kron(a.tau, b.tau)).cwiseAbs().maxCoeff() > 1e-12)
    throw DimensionError("graded tensor chirality mismatch");
  return out;
}

inline Mat lift_left(const CliffordModule& /*a*/, const CliffordModule& b, const Mat& op) {
  return kron(op, Mat::Identity(b.spinor_dim, b.spinor_dim));
}

inline Mat lift_right(const CliffordModule& a, const CliffordModule& /*b*/, const Mat& op) {
  return kron(a.tau, op);
}

}  // namespace spindeg
