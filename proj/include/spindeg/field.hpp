#pragma once

// Complex vector fields K = xi + i eta on the built-in manifold models, their
// degeneracy set {h(K, K) = 0} and the spinor bundle maps v_K on small spheres
// around degeneracy points.

#include "spindeg/clifford.hpp"
#include "spindeg/degree.hpp"
#include "spindeg/expr.hpp"

#include <algorithm>
#include <optional>

namespace spindeg {

enum class ManifoldKind {
  sphere2,          // unit sphere in R^3, fields given by ambient components
  torus2,           // flat torus R^2 / (2 pi Z)^2
  flat_chart,       // a box in R^d with the Euclidean metric
  product_sphere2,  // (S^2)^m, handled factorwise by the harness
};

inline const char* manifold_name(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::sphere2: return "sphere2";
    case ManifoldKind::torus2: return "torus2";
    case ManifoldKind::flat_chart: return "flat_chart";
    case ManifoldKind::product_sphere2: return "product_sphere2";
  }
  return "?";
}

inline ManifoldKind parse_manifold(const std::string& s) {
  if (s == "sphere2") return ManifoldKind::sphere2;
  if (s == "torus2") return ManifoldKind::torus2;
  if (s == "flat_chart") return ManifoldKind::flat_chart;
  if (s == "product_sphere2") return ManifoldKind::product_sphere2;
  throw ConfigError("unknown manifold '" + s + "' (expected sphere2, torus2, flat_chart or product_sphere2)");
}

struct ComplexField {
  ManifoldKind manifold = ManifoldKind::sphere2;
  int dim = 2;  // real dimension of M
  std::function<Vec(const Vec&)> xi;
  std::function<Vec(const Vec&)> eta;
  std::vector<std::string> xi_text, eta_text;
  Vec lower, upper;  // flat_chart box

  int ambient_dim() const { return manifold == ManifoldKind::sphere2 ? 3 : dim; }

  /// xi and eta at x; on the sphere they are projected to the tangent plane.
  std::pair<Vec, Vec> evaluate(const Vec& x) const {
    if (x.size() != ambient_dim())
      throw DimensionError("field point has " + std::to_string(x.size()) + " coordinates, expected " +
                           std::to_string(ambient_dim()));
    Vec a = xi(x), b = eta(x);
    if (a.size() != ambient_dim() || b.size() != ambient_dim())
      throw DimensionError("field components do not match the manifold dimension");
    if (manifold == ManifoldKind::sphere2) {
      const Vec n = x / x.norm();
      a -= a.dot(n) * n;
      b -= b.dot(n) * n;
    }
    if (!a.allFinite() || !b.allFinite()) throw Error("field evaluation is not finite at " + format_point(x));
    return {a, b};
  }
};

/// Field whose xi and eta components are expression strings.
inline ComplexField field_from_expressions(ManifoldKind manifold, int dim, const std::vector<std::string>& xi,
                                           const std::vector<std::string>& eta) {
  ComplexField f;
  f.manifold = manifold;
  f.dim = dim;
  const int comps = f.ambient_dim();
  if (static_cast<int>(xi.size()) != comps || static_cast<int>(eta.size()) != comps)
    throw ConfigError("field needs " + std::to_string(comps) + " xi and eta components");
  auto compile = [comps](const std::vector<std::string>& text) {
    std::vector<Expr> exprs;
    for (const auto& s : text) {
      Expr e = parse_expression(s);
      if (expression_arity(e) > comps)
        throw ConfigError("expression '" + s + "' uses a coordinate beyond dimension " + std::to_string(comps));
      exprs.push_back(std::move(e));
    }
    return [exprs](const Vec& x) {
      Vec out(static_cast<Eigen::Index>(exprs.size()));
      for (std::size_t i = 0; i < exprs.size(); ++i) out[static_cast<Eigen::Index>(i)] = evaluate(exprs[i], x);
      return out;
    };
  };
  f.xi = compile(xi);
  f.eta = compile(eta);
  f.xi_text = xi;
  f.eta_text = eta;
  return f;
}

/// h(K, K) = |xi|^2 - |eta|^2 + i <xi, eta>.
inline cplx h_ck(const ComplexField& f, const Vec& x) {
  const auto [a, b] = f.evaluate(x);
  return {a.squaredNorm() - b.squaredNorm(), a.dot(b)};
}

enum class PointKind { z_k, z_k_plus };

inline const char* point_kind_name(PointKind k) { return k == PointKind::z_k_plus ? "Z_K_plus" : "Z_K"; }

struct SingularPoint {
  Vec location;
  PointKind kind = PointKind::z_k;
  double h_abs = 0.0;
  std::optional<DegreeResult> degree;
};

struct ZeroSearchOptions {
  int grid = 64;
  double tol = 1e-10;
  double seed_fraction = 0.05;     // seeds must lie below this fraction of max |h|
  double plateau_level = 1e-3;     // relative level counted as near-zero
  double plateau_fraction = 0.01;  // near-zero share of cells that signals a non-isolated set
  double dedup_radius = 1e-6;
  int max_iterations = 50;
  double damping = 0.5;
  double jacobian_step = 1e-6;
  long max_cells = 1L << 20;
};

struct ZeroSet {
  std::vector<SingularPoint> points;
  std::vector<std::string> diagnostics;  // seeds that failed to converge
  std::size_t seeds = 0;
};

namespace detail {

inline Vec sphere_from_cube(int face, double s, double t) {
  Vec p(3);
  const int axis = face / 2;
  const double sign = face % 2 == 0 ? 1.0 : -1.0;
  p[axis] = sign;
  p[(axis + 1) % 3] = s;
  p[(axis + 2) % 3] = t;
  return p / p.norm();
}

/// Orthonormal oriented tangent basis (a, b) at unit x with det[x, a, b] = 1.
inline std::pair<Vec, Vec> tangent_basis(const Vec& x) {
  Eigen::Index least = 0;
  x.cwiseAbs().minCoeff(&least);
  Vec e = Vec::Zero(3);
  e[least] = 1.0;
  Eigen::Vector3d xv = x, ev = e;
  Eigen::Vector3d a = (ev - ev.dot(xv) * xv).normalized();
  Eigen::Vector3d b = xv.cross(a);
  return {Vec(a), Vec(b)};
}

inline Vec wrap_torus(Vec x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = std::fmod(x[i], 2.0 * kPi);
    if (x[i] < 0) x[i] += 2.0 * kPi;
  }
  return x;
}

inline double torus_distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double d = std::fmod(std::abs(a[i] - b[i]), 2.0 * kPi);
    d = std::min(d, 2.0 * kPi - d);
    s += d * d;
  }
  return std::sqrt(s);
}

// One grid over a k-dimensional parameter block.
struct ScanGrid {
  int axes = 2;
  int per_axis = 0;
  bool periodic = false;
  std::function<Vec(const std::vector<int>&)> point;
};

inline std::vector<int> unflatten(std::size_t flat, int axes, int per_axis) {
  std::vector<int> idx(axes);
  for (int a = axes - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % per_axis);
    flat /= per_axis;
  }
  return idx;
}

inline std::size_t flatten(const std::vector<int>& idx, int per_axis) {
  std::size_t flat = 0;
  for (int v : idx) flat = flat * per_axis + v;
  return flat;
}

/// Gauss-Newton on F = (Re h, Im h) with a pseudo-inverse step and halving
/// backtracking. `retract(x, du)` moves along the local chart.
inline bool refine_zero(const ComplexField& f, Vec& x, int params,
                        const std::function<Vec(const Vec&, const Vec&)>& retract, const ZeroSearchOptions& opt,
                        double& h_abs) {
  auto residual = [&](const Vec& y) {
    const cplx h = h_ck(f, y);
    Vec r(2);
    r << h.real(), h.imag();
    return r;
  };
  Vec r = residual(x);
  for (int it = 0; it < opt.max_iterations && r.norm() > 0.0; ++it) {
    RMat jac(2, params);
    for (int j = 0; j < params; ++j) {
      Vec e = Vec::Zero(params);
      e[j] = opt.jacobian_step;
      jac.col(j) = (residual(retract(x, e)) - residual(retract(x, -e))) / (2.0 * opt.jacobian_step);
    }
    Eigen::JacobiSVD<RMat> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Vec step = -svd.solve(r);
    if (!step.allFinite() || step.norm() < 1e-15) break;
    double alpha = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k, alpha *= opt.damping) {
      const Vec trial = retract(x, alpha * step);
      const Vec rt = residual(trial);
      if (rt.norm() < r.norm()) {
        x = trial;
        r = rt;
        improved = true;
        break;
      }
    }
    if (!improved || alpha * step.norm() < 1e-15) break;
  }
  h_abs = r.norm();
  return h_abs < opt.tol;
}

}  // namespace detail

/// Degeneracy points of K: grid scan of |h| on a chart atlas, local minima
/// below a coarse threshold refined by damped Gauss-Newton, then deduplicated.
/// Throws AssumptionViolation when near-zeros form a plateau.
inline ZeroSet find_zero_set(const ComplexField& f, const ZeroSearchOptions& opt = {}) {
  if (opt.grid < 8) throw ConfigError("zero search grid must be at least 8");
  if (f.manifold == ManifoldKind::product_sphere2)
    throw ConfigError("find_zero_set works factorwise on product models");

  std::vector<detail::ScanGrid> grids;
  std::function<Vec(const Vec&, const Vec&)> retract;
  std::function<double(const Vec&, const Vec&)> distance = [](const Vec& a, const Vec& b) { return (a - b).norm(); };
  int params = f.dim;
  const int g = opt.grid;

  switch (f.manifold) {
    case ManifoldKind::sphere2: {
      for (int face = 0; face < 6; ++face) {
        grids.push_back({2, g, false, [face, g](const std::vector<int>& idx) {
                           const double s = -1.0 + 2.0 * (idx[0] + 0.5) / g;
                           const double t = -1.0 + 2.0 * (idx[1] + 0.5) / g;
                           return detail::sphere_from_cube(face, s, t);
                         }});
      }
      retract = [](const Vec& x, const Vec& du) {
        const auto [a, b] = detail::tangent_basis(x);
        Vec y = x + du[0] * a + du[1] * b;
        return Vec(y / y.norm());
      };
      params = 2;
      break;
    }
    case ManifoldKind::torus2: {
      grids.push_back({2, g, true, [g](const std::vector<int>& idx) {
                         Vec x(2);
                         x << 2.0 * kPi * idx[0] / g, 2.0 * kPi * idx[1] / g;
                         return x;
                       }});
      retract = [](const Vec& x, const Vec& du) { return detail::wrap_torus(x + du); };
      distance = detail::torus_distance;
      break;
    }
    case ManifoldKind::flat_chart: {
      if (f.lower.size() != f.dim || f.upper.size() != f.dim)
        throw ConfigError("flat_chart needs lower and upper bounds for every coordinate");
      int per_axis = g;
      while (per_axis > 8 && std::pow(static_cast<double>(per_axis), f.dim) > static_cast<double>(opt.max_cells))
        per_axis /= 2;
      const Vec lo = f.lower, hi = f.upper;
      grids.push_back({f.dim, per_axis, false, [lo, hi, per_axis](const std::vector<int>& idx) {
                         Vec x(lo.size());
                         for (Eigen::Index i = 0; i < x.size(); ++i)
                           x[i] = lo[i] + (hi[i] - lo[i]) * (idx[static_cast<std::size_t>(i)] + 0.5) / per_axis;
                         return x;
                       }});
      retract = [](const Vec& x, const Vec& du) { return Vec(x + du); };
      break;
    }
    case ManifoldKind::product_sphere2: break;
  }

  // Scan.
  std::vector<std::vector<double>> values(grids.size());
  double hmax = 0.0;
  std::size_t total_cells = 0;
  for (std::size_t gi = 0; gi < grids.size(); ++gi) {
    const auto& grid = grids[gi];
    std::size_t cells = 1;
    for (int a = 0; a < grid.axes; ++a) cells *= static_cast<std::size_t>(grid.per_axis);
    values[gi].resize(cells);
    parallel_for(cells, [&](std::size_t c) {
      values[gi][c] = std::abs(h_ck(f, grid.point(detail::unflatten(c, grid.axes, grid.per_axis))));
    });
    for (double v : values[gi]) hmax = std::max(hmax, v);
    total_cells += cells;
  }

  std::size_t near_zero = 0;
  const double near_level = std::max(opt.plateau_level * hmax, opt.tol);
  for (const auto& vs : values)
    for (double v : vs)
      if (v <= near_level) ++near_zero;
  if (static_cast<double>(near_zero) > opt.plateau_fraction * static_cast<double>(total_cells)) {
    std::ostringstream os;
    os << near_zero << " of " << total_cells << " grid cells have |h| <= " << near_level
       << "; the degeneracy set does not look like finitely many points";
    throw AssumptionViolation(os.str());
  }

  // Seeds: local minima of |h| below the coarse threshold.
  std::vector<Vec> seeds;
  const double seed_level = opt.seed_fraction * hmax;
  for (std::size_t gi = 0; gi < grids.size(); ++gi) {
    const auto& grid = grids[gi];
    const auto& vs = values[gi];
    const bool full = grid.axes <= 2;
    for (std::size_t c = 0; c < vs.size(); ++c) {
      if (!(vs[c] < seed_level)) continue;
      const auto idx = detail::unflatten(c, grid.axes, grid.per_axis);
      bool minimum = true;
      auto compare = [&](std::vector<int> nb) {
        for (int a = 0; a < grid.axes; ++a) {
          if (nb[a] < 0 || nb[a] >= grid.per_axis) {
            if (!grid.periodic) return;
            nb[a] = (nb[a] + grid.per_axis) % grid.per_axis;
          }
        }
        if (vs[detail::flatten(nb, grid.per_axis)] < vs[c]) minimum = false;
      };
      if (full) {
        for (int da = -1; da <= 1 && minimum; ++da)
          for (int db = -1; db <= 1 && minimum; ++db)
            if (da != 0 || db != 0) compare({idx[0] + da, idx[1] + db});
      } else {
        for (int a = 0; a < grid.axes && minimum; ++a)
          for (int s : {-1, 1}) {
            auto nb = idx;
            nb[a] += s;
            compare(nb);
          }
      }
      if (minimum) seeds.push_back(grid.point(idx));
    }
  }

  ZeroSet out;
  out.seeds = seeds.size();
  std::vector<std::optional<SingularPoint>> refined(seeds.size());
  std::vector<std::string> notes(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t s) {
    Vec x = seeds[s];
    double h_abs = 0.0;
    if (detail::refine_zero(f, x, params, retract, opt, h_abs)) {
      refined[s] = SingularPoint{x, PointKind::z_k, h_abs, std::nullopt};
    } else {
      std::ostringstream os;
      os << "Newton refinement from seed " << format_point(seeds[s]) << " stopped at |h| = " << h_abs;
      notes[s] = os.str();
    }
  });
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    if (!refined[s]) {
      out.diagnostics.push_back(notes[s]);
      continue;
    }
    bool duplicate = false;
    for (auto& p : out.points) {
      if (distance(p.location, refined[s]->location) < opt.dedup_radius) {
        duplicate = true;
        if (refined[s]->h_abs < p.h_abs) p = *refined[s];
        break;
      }
    }
    if (!duplicate) out.points.push_back(*refined[s]);
  }
  std::sort(out.points.begin(), out.points.end(), [](const SingularPoint& a, const SingularPoint& b) {
    return std::lexicographical_compare(a.location.data(), a.location.data() + a.location.size(), b.location.data(),
                                        b.location.data() + b.location.size());
  });
  return out;
}

/// True when (xi(x), eta(x)) is an oriented frame of T_x M (surfaces only).
/// Both vectors zero counts as not oriented; exactly one zero is an error.
inline bool classify_oriented(const ComplexField& f, const Vec& x, double zero_tol = 1e-9) {
  if (f.dim != 2) throw DimensionError("classify_oriented applies to surfaces only");
  const auto [a, b] = f.evaluate(x);
  const bool za = a.norm() <= zero_tol, zb = b.norm() <= zero_tol;
  if (za && zb) return false;
  if (za || zb)
    throw DegenerateFrame("exactly one of xi, eta vanishes at " + format_point(x) + "; no frame to classify");
  double det = 0.0;
  if (f.manifold == ManifoldKind::sphere2) {
    RMat m(3, 3);
    m.col(0) = x / x.norm();
    m.col(1) = a;
    m.col(2) = b;
    det = m.determinant();
  } else {
    det = a[0] * b[1] - a[1] * b[0];
  }
  if (std::abs(det) <= zero_tol * a.norm() * b.norm())
    throw DegenerateFrame("xi and eta are parallel at " + format_point(x));
  return det > 0.0;
}

enum class SphereChart { projection, stereographic };

/// xi and eta pulled to an oriented chart centred at p: chart point u in R^{dim}
/// maps to frame components (xi_hat(u), eta_hat(u)).
using LocalFrameField = std::function<std::pair<Vec, Vec>(const Vec&)>;

inline LocalFrameField local_frame_field(const ComplexField& f, const Vec& p, SphereChart chart = SphereChart::projection,
                                         double rotation = 0.0) {
  if (f.manifold == ManifoldKind::sphere2) {
    if (p.size() != 3 || std::abs(p.norm() - 1.0) > 1e-9)
      throw DimensionError("sphere chart centre must be a unit vector in R^3");
    auto [a0, b0] = detail::tangent_basis(p);
    const Vec a = std::cos(rotation) * a0 + std::sin(rotation) * b0;
    const Vec b = Vec(Eigen::Vector3d(p).cross(Eigen::Vector3d(a)));
    return [f, p, a, b, chart](const Vec& u) {
      const double r2 = u.squaredNorm();
      Vec X;
      if (chart == SphereChart::projection) {
        if (r2 >= 1.0) throw DimensionError("chart point outside the projection chart");
        X = std::sqrt(1.0 - r2) * p + u[0] * a + u[1] * b;
      } else {
        X = ((4.0 - r2) * p + 4.0 * (u[0] * a + u[1] * b)) / (4.0 + r2);
      }
      const Eigen::Vector3d Xv = X;
      const Eigen::Vector3d f1 = (Eigen::Vector3d(a) - Eigen::Vector3d(a).dot(Xv) * Xv).normalized();
      const Eigen::Vector3d f2 = Xv.cross(f1);
      const auto [xi, eta] = f.evaluate(X);
      Vec xh(2), eh(2);
      xh << xi.dot(Vec(f1)), xi.dot(Vec(f2));
      eh << eta.dot(Vec(f1)), eta.dot(Vec(f2));
      return std::pair<Vec, Vec>{xh, eh};
    };
  }
  if (p.size() != f.dim) throw DimensionError("chart centre has the wrong dimension");
  return [f, p](const Vec& u) { return f.evaluate(Vec(p + u)); };
}

/// v_K on the sphere of radius eps in local chart coordinates.
struct LocalModel {
  BundleMapField v;
  int dim = 2;
  double eps = 0.1;
  LocalFrameField frame;  // empty for product models
  CliffordModule module;

  SphereRule rule(int level) const { return sphere_rule(dim, eps, Vec::Zero(dim), level); }
};

inline LocalModel build_vk_sphere_field(const ComplexField& f, const Vec& p, double eps, const CliffordModule& mod,
                                        SphereChart chart = SphereChart::projection, double rotation = 0.0) {
  if (mod.dim_base != f.dim) throw DimensionError("Clifford module dimension differs from the manifold dimension");
  if (!(eps > 0.0)) throw ConfigError("sphere radius must be positive");
  LocalModel lm;
  lm.dim = f.dim;
  lm.eps = eps;
  lm.module = mod;
  lm.frame = local_frame_field(f, p, chart, rotation);
  auto frame = lm.frame;
  lm.v.rank = mod.half_dim();
  lm.v.evaluate = [frame, mod](const Vec& u) {
    const auto [xi, eta] = frame(u);
    return plus_to_minus(mod, build_vk(mod, xi, eta).matrix);
  };
  return lm;
}

/// v_K = sum_i v_{K,i} on a product of surfaces, factor i acting as
/// tau x ... x tau x V_{K,i} x Id x ... x Id on the graded tensor product of
/// the factor spinor spaces. Chart coordinates are (u_1, ..., u_m).
inline LocalModel build_product_vk_field(const std::vector<ComplexField>& factors, const std::vector<Vec>& points,
                                         double eps, Realization realization = Realization::standard,
                                         SphereChart chart = SphereChart::projection) {
  if (factors.empty() || factors.size() != points.size())
    throw DimensionError("product model needs one chart centre per factor");
  std::vector<LocalFrameField> frames;
  std::vector<CliffordModule> mods;
  int dim = 0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    frames.push_back(local_frame_field(factors[i], points[i], chart));
    mods.push_back(build_clifford_module(factors[i].dim, realization));
    dim += factors[i].dim;
  }
  CliffordModule total = mods.front();
  for (std::size_t i = 1; i < mods.size(); ++i) total = graded_tensor(total, mods[i]);

  LocalModel lm;
  lm.dim = dim;
  lm.eps = eps;
  lm.module = total;
  lm.v.rank = total.half_dim();
  lm.v.evaluate = [frames, mods, total](const Vec& u) {
    Mat sum = Mat::Zero(total.spinor_dim, total.spinor_dim);
    int offset = 0;
    for (std::size_t i = 0; i < mods.size(); ++i) {
      const int di = mods[i].dim_base;
      const auto [xi, eta] = frames[i](Vec(u.segment(offset, di)));
      Mat lifted = Mat::Identity(1, 1);
      for (std::size_t j = 0; j < mods.size(); ++j) {
        const Mat& piece = j < i    ? mods[j].tau
                           : j == i ? build_vk(mods[i], xi, eta).matrix
                                    : Mat(Mat::Identity(mods[j].spinor_dim, mods[j].spinor_dim));
        lifted = kron(lifted, piece);
      }
      sum += lifted;
      offset += di;
    }
    return plus_to_minus(total, sum);
  };
  return lm;
}

/// eta_p = eta_hat / |eta_hat| as a map from the chart sphere to the unit sphere.
inline std::function<Vec(const Vec&)> normalized_eta(const LocalModel& lm) {
  if (!lm.frame) throw DimensionError("normalized_eta needs a single-factor local model");
  auto frame = lm.frame;
  return [frame](const Vec& u) {
    const Vec e = frame(u).second;
    const double n = e.norm();
    if (!(n > 0.0)) throw SingularOnSphere("eta vanishes on the sphere at " + format_point(u));
    return Vec(e / n);
  };
}

}  // namespace spindeg
