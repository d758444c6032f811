#pragma once

// Exterior algebra at a point with scalar or matrix coefficients.
//
// A form over a D-dimensional cotangent space is stored sparsely as a map from
// strictly increasing multi-indices (bit masks over {0..D-1}) to coefficients.
// Products place the form part on the left and multiply the coefficients in
// order, with the shuffle sign of the two multi-indices and no additional
// parity sign for odd matrix coefficients.

#include "spindeg/core.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <memory>

namespace spindeg {

using MultiIndex = std::uint32_t;

inline int form_degree(MultiIndex mask) { return std::popcount(mask); }

/// Sign of the permutation sorting the concatenation (I, J) of two disjoint
/// increasing index lists.
inline int shuffle_sign(MultiIndex left, MultiIndex right) {
  int inversions = 0;
  for (MultiIndex r = right; r != 0; r &= r - 1) {
    const int j = std::countr_zero(r);
    const MultiIndex above = left & ~((MultiIndex{2} << j) - 1);
    inversions += std::popcount(above);
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

namespace detail {
template <class C>
struct CoeffTraits;

template <>
struct CoeffTraits<cplx> {
  static cplx zero(Eigen::Index) { return 0.0; }
  static cplx identity(Eigen::Index) { return 1.0; }
  static bool is_zero(const cplx& c) { return c == 0.0; }
  static Eigen::Index size(const cplx&) { return 1; }
};

template <>
struct CoeffTraits<Mat> {
  static Mat zero(Eigen::Index n) { return Mat::Zero(n, n); }
  static Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }
  static bool is_zero(const Mat& m) { return m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0; }
  static Eigen::Index size(const Mat& m) { return m.rows(); }
};
}  // namespace detail

template <class Coeff>
class Form {
 public:
  using Traits = detail::CoeffTraits<Coeff>;

  Form() = default;
  Form(int base_dim, Eigen::Index coeff_size) : base_dim_(base_dim), coeff_size_(coeff_size) {
    if (base_dim < 0 || base_dim > 24) throw DimensionError("form base dimension out of range");
  }

  static Form scalar(int base_dim, Coeff c) {
    Form f(base_dim, Traits::size(c));
    f.set(0, std::move(c));
    return f;
  }
  static Form identity(int base_dim, Eigen::Index coeff_size) {
    return scalar(base_dim, Traits::identity(coeff_size));
  }
  /// Degree-one form sum_j dx^j * coeffs[j].
  static Form one_form(const std::vector<Coeff>& coeffs) {
    if (coeffs.empty()) throw DimensionError("one_form needs at least one coefficient");
    Form f(static_cast<int>(coeffs.size()), Traits::size(coeffs.front()));
    for (std::size_t j = 0; j < coeffs.size(); ++j) f.set(MultiIndex{1} << j, coeffs[j]);
    return f;
  }

  int base_dim() const { return base_dim_; }
  Eigen::Index coeff_size() const { return coeff_size_; }
  const std::map<MultiIndex, Coeff>& terms() const { return terms_; }
  MultiIndex top_index() const { return (MultiIndex{1} << base_dim_) - 1; }

  void set(MultiIndex idx, Coeff c) {
    if ((idx >> base_dim_) != 0) throw DimensionError("multi-index exceeds the base dimension");
    if (Traits::size(c) != coeff_size_) throw DimensionError("coefficient size mismatch");
    terms_[idx] = std::move(c);
  }

  Coeff coeff(MultiIndex idx) const {
    auto it = terms_.find(idx);
    return it == terms_.end() ? Traits::zero(coeff_size_) : it->second;
  }
  Coeff top() const { return coeff(top_index()); }

  /// Pure degree of the form, or -1 when mixed (0 for the zero form).
  int homogeneous_degree() const {
    int deg = -2;
    for (const auto& [idx, c] : terms_) {
      const int d = form_degree(idx);
      if (deg == -2) deg = d;
      else if (deg != d) return -1;
    }
    return deg == -2 ? 0 : deg;
  }

  bool is_zero() const {
    for (const auto& [idx, c] : terms_)
      if (!Traits::is_zero(c)) return false;
    return true;
  }

  Form degree_part(int k) const {
    Form out(base_dim_, coeff_size_);
    for (const auto& [idx, c] : terms_)
      if (form_degree(idx) == k) out.terms_.emplace(idx, c);
    out.grading = grading;
    return out;
  }

  Form& operator+=(const Form& o) {
    check_compatible(o);
    for (const auto& [idx, c] : o.terms_) {
      auto it = terms_.find(idx);
      if (it == terms_.end()) terms_.emplace(idx, c);
      else it->second = it->second + c;
    }
    if (!grading) grading = o.grading;
    return *this;
  }
  friend Form operator+(Form a, const Form& b) { return a += b; }

  template <class S>
  Form scaled(const S& s) const {
    Form out = *this;
    for (auto& [idx, c] : out.terms_) c = s * c;
    return out;
  }

  void check_compatible(const Form& o) const {
    if (base_dim_ != o.base_dim_) throw DimensionError("forms over different base dimensions");
    if (coeff_size_ != o.coeff_size_) throw DimensionError("forms with different coefficient sizes");
  }

  // Optional grading operator used by supertrace_form.
  std::shared_ptr<const Mat> grading;

 private:
  int base_dim_ = 0;
  Eigen::Index coeff_size_ = 1;
  std::map<MultiIndex, Coeff> terms_;
};

using MatrixForm = Form<Mat>;
using ScalarForm = Form<cplx>;

template <class Coeff>
Form<Coeff> wedge(const Form<Coeff>& a, const Form<Coeff>& b) {
  a.check_compatible(b);
  Form<Coeff> out(a.base_dim(), a.coeff_size());
  std::map<MultiIndex, Coeff> acc;
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      if ((ia & ib) != 0) continue;
      const MultiIndex idx = ia | ib;
      const double sign = shuffle_sign(ia, ib);
      Coeff prod = ca * cb;
      auto it = acc.find(idx);
      if (it == acc.end()) acc.emplace(idx, sign * prod);
      else it->second = it->second + sign * prod;
    }
  }
  for (auto& [idx, c] : acc) out.set(idx, std::move(c));
  out.grading = a.grading ? a.grading : b.grading;
  return out;
}

/// k-fold wedge power of a pure degree-1 form; the identity for k = 0.
template <class Coeff>
Form<Coeff> form_power(const Form<Coeff>& omega, int k) {
  if (k < 0) throw DimensionError("form_power needs k >= 0");
  const int deg = omega.homogeneous_degree();
  if (deg != 1 && !omega.is_zero()) throw DimensionError("form_power needs a pure degree-1 form");
  Form<Coeff> out = Form<Coeff>::identity(omega.base_dim(), omega.coeff_size());
  out.grading = omega.grading;
  if (k > omega.base_dim()) return Form<Coeff>(omega.base_dim(), omega.coeff_size());
  for (int i = 0; i < k; ++i) out = wedge(out, omega);
  return out;
}

/// Coefficientwise tr(tau M).
inline ScalarForm supertrace_form(const MatrixForm& a, const Mat& tau) {
  if (tau.rows() != a.coeff_size() || tau.cols() != a.coeff_size())
    throw DimensionError("grading size does not match the coefficient size");
  ScalarForm out(a.base_dim(), 1);
  for (const auto& [idx, c] : a.terms()) out.set(idx, (tau * c).trace());
  return out;
}

inline ScalarForm supertrace_form(const MatrixForm& a) {
  if (!a.grading) throw DimensionError("supertrace_form: form carries no grading");
  return supertrace_form(a, *a.grading);
}

/// Wedge powers (dV)^k for k = 0..D, reused across many values of t.
class SuperExpCache {
 public:
  explicit SuperExpCache(const MatrixForm& dv) {
    if (dv.homogeneous_degree() != 1 && !dv.is_zero())
      throw DimensionError("nilpotent_superexp needs a degree-1 dV");
    powers_.push_back(MatrixForm::identity(dv.base_dim(), dv.coeff_size()));
    for (int k = 1; k <= dv.base_dim(); ++k) powers_.push_back(wedge(powers_.back(), dv));
    grading_ = dv.grading;
  }

  /// e^{-t^2} sum_{k=0}^{D} (-t)^k (dV)^k / k!.
  MatrixForm at(double t) const {
    MatrixForm out(powers_.front().base_dim(), powers_.front().coeff_size());
    const double gauss = std::exp(-t * t);
    double coef = gauss;
    for (std::size_t k = 0; k < powers_.size(); ++k) {
      if (k > 0) coef *= -t / static_cast<double>(k);
      out += powers_[k].scaled(coef);
    }
    out.grading = grading_;
    return out;
  }

  /// Top-degree coefficient of at(t), without assembling the other degrees.
  Mat top_at(double t) const {
    const MatrixForm& first = powers_.front();
    Mat out = Mat::Zero(first.coeff_size(), first.coeff_size());
    double coef = std::exp(-t * t);
    for (std::size_t k = 0; k < powers_.size(); ++k) {
      if (k > 0) coef *= -t / static_cast<double>(k);
      out += coef * powers_[k].top();
    }
    return out;
  }

  const MatrixForm& power(int k) const { return powers_.at(static_cast<std::size_t>(k)); }

 private:
  std::vector<MatrixForm> powers_;
  std::shared_ptr<const Mat> grading_;
};

/// exp(-(t^2 Id + t dV)) as an exact finite sum, valid where V^2 = Id.
inline MatrixForm nilpotent_superexp(double t, const GradedEndo& v, const MatrixForm& dv) {
  if (v.parity != Parity::odd) throw DimensionError("nilpotent_superexp needs an odd V");
  if (v.matrix.rows() != dv.coeff_size()) throw DimensionError("V and dV sizes differ");
  return SuperExpCache(dv).at(t);
}

}  // namespace spindeg
