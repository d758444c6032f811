#pragma once

// Scenario runner: degeneracy set, orientation classes, local degrees, and the
// index sums they predict, plus the transgression and Brouwer cross-checks.
//
// Sign conventions (see README): local degrees are normalised so that
// e^{ik theta} has degree k, spheres carry the outward-normal orientation and
// tau = i^n c(e_1)...c(e_2n). With these,
//   <ch(E+) - ch(E-), [M]> = -sum deg,   chi(M) = (-1)^{n+1} sum deg.

#include "spindeg/field.hpp"
#include "spindeg/superconn.hpp"

#include <chrono>
#include <json.hpp>

namespace spindeg {

enum class Mode { complex_field, bundle_map };

inline const char* mode_name(Mode m) { return m == Mode::bundle_map ? "bundle_map" : "complex_field"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "complex_field") return Mode::complex_field;
  if (s == "bundle_map") return Mode::bundle_map;
  throw ConfigError("unknown mode '" + s + "' (expected complex_field or bundle_map)");
}

/// A generic bundle map on a flat chart, given by expression matrices.
struct MapSpec {
  int dim = 2;
  std::vector<std::vector<std::string>> re, im;  // rank x rank
  std::vector<Vec> points;                       // declared isolated singularities
  std::optional<long> expected_pairing;
};

struct Scenario {
  std::string name;
  std::string description;
  ManifoldKind manifold = ManifoldKind::sphere2;
  Mode mode = Mode::complex_field;
  ComplexField field;  // the factor field for product models
  int m = 1;           // number of factors for product_sphere2
  std::optional<MapSpec> map;
  std::optional<long> expected_chi;
  double eps = 0.1;
  int rule_level = 3;
  ZeroSearchOptions zeros;
  bool superconn_check = true;
  double fd_step = 1e-5;
};

struct PointReport {
  std::vector<double> location;
  std::string kind;  // Z_K, Z_K_plus or declared
  bool in_sum = true;
  long degree = 0;
  double raw_re = 0.0, raw_im = 0.0, residual = 0.0;
  std::optional<long> brouwer;
  std::optional<double> transgression;  // real part of the T -> infinity limit
  std::optional<double> gamma_T;        // real part at T = 6
  std::optional<double> two_path_gap;

  bool operator==(const PointReport&) const = default;
};

struct VerificationReport {
  int schema = 1;
  std::string scenario, manifold, mode, check;
  int n = 1;
  int rule_level = 0;
  double eps = 0.0;
  std::vector<PointReport> points;
  long sum_of_degrees = 0;
  long predicted_chi = 0;
  std::optional<long> expected_chi;
  long predicted_pairing = 0;
  std::optional<long> expected_pairing;
  long chi_from_pairing = 0;
  std::optional<long> classical_chi;  // sum of Brouwer degrees when xi = 0
  double max_residual = 0.0;
  bool routes_consistent = true;
  bool superconn_consistent = true;
  bool pass = false;
  std::vector<std::string> diagnostics;
  std::optional<double> seconds;

  bool operator==(const VerificationReport&) const = default;
};

inline constexpr double kTwoPathTolerance = 1e-6;
inline constexpr double kSignLawTolerance = 1e-4;
inline constexpr double kDefaultT = 6.0;

namespace detail {

inline int sign_pow(int k) { return k % 2 == 0 ? 1 : -1; }

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

inline bool field_is_classical(const ComplexField& f) {
  if (f.xi_text.empty()) return false;
  for (const auto& s : f.xi_text) {
    const Expr e = parse_expression(s);
    if (e->kind != ExprNode::Kind::number || e->value != 0.0) return false;
  }
  return true;
}

inline void fill_degree(PointReport& pr, const DegreeResult& d) {
  pr.degree = d.degree;
  pr.raw_re = d.raw.real();
  pr.raw_im = d.raw.imag();
  pr.residual = d.residual;
}

inline void superconn_crosscheck(PointReport& pr, const BundleMapField& v, const SphereRule& rule, int n,
                                 VerificationReport& rep) {
  const FlatSuperModel model = unitary_model(v);
  const cplx limit = transgression_limit(model, rule);
  const cplx finite = gamma_T_integral(model, rule, kDefaultT);
  pr.transgression = limit.real();
  pr.gamma_T = finite.real();
  pr.two_path_gap = std::abs(limit - finite);
  // Both integrals use the same rule, so the sign law is checked against the
  // raw degree; quadrature error then cancels instead of being charged twice.
  const double sign = sign_pow(n);
  const cplx raw(pr.raw_re, pr.raw_im);
  const bool ok = *pr.two_path_gap < kTwoPathTolerance && std::abs(limit - sign * raw) < kSignLawTolerance &&
                  std::lround(limit.real()) == sign * pr.degree;
  if (!ok) {
    rep.superconn_consistent = false;
    std::ostringstream os;
    os << "transgression check failed at " << format_point(Eigen::Map<const Vec>(pr.location.data(), pr.location.size()))
       << ": limit " << limit << ", gamma(T=6) " << finite << ", degree " << pr.degree;
    rep.diagnostics.push_back(os.str());
  }
}

// Index sums and pass/fail once all point degrees are known.
inline void finalize(VerificationReport& rep) {
  long sum = 0;
  double worst = 0.0;
  for (const auto& p : rep.points) {
    worst = std::max(worst, p.residual);
    if (p.in_sum) sum += p.degree;
  }
  rep.sum_of_degrees = sum;
  rep.max_residual = worst;
  rep.predicted_chi = sign_pow(rep.n + 1) * sum;
  rep.predicted_pairing = -sum;
  rep.chi_from_pairing = sign_pow(rep.n) * rep.predicted_pairing;
  rep.routes_consistent = rep.chi_from_pairing == rep.predicted_chi;
  if (rep.classical_chi && *rep.classical_chi != rep.predicted_chi) rep.routes_consistent = false;
  bool ok = worst < kDegreeResidualLimit && rep.routes_consistent && rep.superconn_consistent;
  if (rep.expected_chi && *rep.expected_chi != rep.predicted_chi) ok = false;
  if (rep.expected_pairing && *rep.expected_pairing != rep.predicted_pairing) ok = false;
  rep.pass = ok;
}

inline VerificationReport start_report(const Scenario& s, int n, const char* check) {
  VerificationReport rep;
  rep.scenario = s.name;
  rep.manifold = manifold_name(s.manifold);
  rep.mode = mode_name(s.mode);
  rep.check = check;
  rep.n = n;
  rep.rule_level = s.rule_level;
  rep.eps = s.eps;
  rep.expected_chi = s.expected_chi;
  return rep;
}

inline BundleMapField map_from_spec(const MapSpec& spec) {
  const std::size_t rank = spec.re.size();
  if (rank == 0 || spec.im.size() != rank) throw ConfigError("map needs square re and im matrices of equal size");
  std::vector<std::vector<Expr>> re(rank), im(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    if (spec.re[i].size() != rank || spec.im[i].size() != rank)
      throw ConfigError("map matrices must be square");
    for (std::size_t j = 0; j < rank; ++j) {
      re[i].push_back(parse_expression(spec.re[i][j]));
      im[i].push_back(parse_expression(spec.im[i][j]));
      if (std::max(expression_arity(re[i].back()), expression_arity(im[i].back())) > spec.dim)
        throw ConfigError("map entry uses a coordinate beyond the chart dimension");
    }
  }
  BundleMapField v;
  v.rank = static_cast<int>(rank);
  v.evaluate = [re, im, rank](const Vec& x) {
    Mat out(rank, rank);
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t j = 0; j < rank; ++j) out(i, j) = cplx(evaluate(re[i][j], x), evaluate(im[i][j], x));
    return out;
  };
  return v;
}

inline BundleMapField shifted(const BundleMapField& v, const Vec& p) {
  BundleMapField out = v;
  auto eval = v.evaluate;
  out.evaluate = [eval, p](const Vec& u) { return eval(Vec(p + u)); };
  out.derivative = {};
  return out;
}

}  // namespace detail

/// Generic bundle maps on a flat chart: sum of local degrees at the declared
/// singular points and the predicted pairing -sum deg.
inline VerificationReport theorem_1_1_check(const BundleMapField& v, int dim, const std::vector<Vec>& points,
                                            double eps, int level, const std::string& name = "bundle_map",
                                            std::optional<long> expected_pairing = std::nullopt) {
  if (dim % 2 != 0) throw DimensionError("bundle map chart dimension must be even");
  Scenario s;
  s.name = name;
  s.manifold = ManifoldKind::flat_chart;
  s.mode = Mode::bundle_map;
  s.eps = eps;
  s.rule_level = level;
  VerificationReport rep = detail::start_report(s, dim / 2, "bundle_map_pairing");
  rep.expected_pairing = expected_pairing;
  const SphereRule rule = sphere_rule(dim, eps, Vec::Zero(dim), level);
  for (const auto& p : points) {
    if (p.size() != dim) throw ConfigError("declared point has the wrong dimension");
    PointReport pr;
    pr.location = detail::to_std(p);
    pr.kind = "declared";
    detail::fill_degree(pr, local_degree(detail::shifted(v, p), rule));
    rep.points.push_back(pr);
  }
  detail::finalize(rep);
  return rep;
}

struct RunOptions {
  bool timing = false;
};

inline VerificationReport run_scenario(const Scenario& s, const RunOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport rep;

  if (s.map) {
    const BundleMapField v = detail::map_from_spec(*s.map);
    rep = theorem_1_1_check(v, s.map->dim, s.map->points, s.eps, s.rule_level, s.name, s.map->expected_pairing);
    rep.expected_chi = s.expected_chi;
    if (s.expected_chi) detail::finalize(rep);
  } else if (s.manifold == ManifoldKind::product_sphere2) {
    if (s.m < 1 || s.m > 3) throw ConfigError("product_sphere2 supports 1 to 3 factors");
    if (s.field.manifold != ManifoldKind::sphere2) throw ConfigError("product factors must be sphere2 fields");
    rep = detail::start_report(s, s.m, "bundle_map_pairing");
    const ZeroSet zs = find_zero_set(s.field, s.zeros);
    rep.diagnostics = zs.diagnostics;
    // Z(v) of the lifted map is the product of the factor singular sets Z_K \ Z_K+.
    std::vector<Vec> singular;
    for (const auto& p : zs.points)
      if (!classify_oriented(s.field, p.location)) singular.push_back(p.location);
    std::vector<std::vector<Vec>> tuples{{}};
    for (int i = 0; i < s.m; ++i) {
      std::vector<std::vector<Vec>> next;
      for (const auto& t : tuples)
        for (const auto& p : singular) {
          auto e = t;
          e.push_back(p);
          next.push_back(e);
        }
      tuples = std::move(next);
    }
    if (singular.empty()) tuples.clear();
    for (const auto& t : tuples) {
      const LocalModel lm = build_product_vk_field(std::vector<ComplexField>(s.m, s.field), t, s.eps);
      const SphereRule rule = lm.rule(s.rule_level);
      PointReport pr;
      for (const auto& p : t)
        for (Eigen::Index i = 0; i < p.size(); ++i) pr.location.push_back(p[i]);
      pr.kind = "Z_K";
      detail::fill_degree(pr, local_degree(lm.v, rule));
      if (s.superconn_check) detail::superconn_crosscheck(pr, lm.v, rule, rep.n, rep);
      rep.points.push_back(pr);
    }
    detail::finalize(rep);
  } else {
    const int n = s.field.dim / 2;
    rep = detail::start_report(s, n, s.mode == Mode::bundle_map ? "bundle_map_pairing" : "complex_field_index");
    const ZeroSet zs = find_zero_set(s.field, s.zeros);
    rep.diagnostics = zs.diagnostics;
    const CliffordModule mod = build_clifford_module(s.field.dim);
    const bool classical = detail::field_is_classical(s.field);
    long brouwer_sum = 0;
    for (const auto& p : zs.points) {
      PointReport pr;
      pr.location = detail::to_std(p.location);
      bool oriented = false;
      if (n == 1) oriented = classify_oriented(s.field, p.location);
      pr.kind = point_kind_name(oriented ? PointKind::z_k_plus : PointKind::z_k);
      pr.in_sum = !oriented;
      LocalModel lm = build_vk_sphere_field(s.field, p.location, s.eps, mod);
      lm.v.fd_step = s.fd_step;
      const SphereRule rule = lm.rule(s.rule_level);
      detail::fill_degree(pr, local_degree(lm.v, rule));
      if (oriented && pr.degree != 0) {
        rep.diagnostics.push_back("oriented point " + format_point(p.location) + " has nonzero degree " +
                                  std::to_string(pr.degree));
        rep.routes_consistent = false;
      }
      if (classical) {
        pr.brouwer = brouwer_degree(normalized_eta(lm), rule, s.fd_step);
        brouwer_sum += *pr.brouwer;
        if (pr.degree != detail::sign_pow(n + 1) * *pr.brouwer) {
          rep.diagnostics.push_back("degree and Brouwer degree disagree at " + format_point(p.location));
        }
      }
      if (s.superconn_check && pr.in_sum) detail::superconn_crosscheck(pr, lm.v, rule, n, rep);
      rep.points.push_back(pr);
    }
    if (classical) rep.classical_chi = brouwer_sum;
    detail::finalize(rep);
  }
  if (opt.timing) rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// Built-in scenarios.

struct BuiltinInfo {
  std::string name;
  std::string description;
};

inline std::vector<BuiltinInfo> list_builtins() {
  return {
      {"example_3_7", "S^2 with xi = (-y, x, 0), eta = (z, 0, -x); two degeneracy points, chi = 2"},
      {"classical_ph_sphere", "S^2 with xi = 0 and eta the gradient of the height function; chi = 2"},
      {"torus_nonvanishing", "flat torus with K = 2 d/dx + i d/dy; no degeneracy points, chi = 0"},
      {"example_3_8", "(S^2)^m with the lifted sum of factor maps; parameter m in 1..3, chi = 2^m"},
      {"classical_flat_linear", "flat R^2 chart with xi = 0, eta = (x, y); one simple zero"},
      {"classical_flat_r4", "flat R^4 chart with xi = 0, eta = (x, y, z, w); one simple zero"},
      {"classical_flat_r6", "flat R^6 chart with xi = 0, eta = identity; one simple zero"},
      {"constant_map", "constant invertible 2x2 bundle map on a flat R^2 chart; pairing 0"},
  };
}

inline Scenario builtin_example(const std::string& name, int m = 2) {
  Scenario s;
  s.name = name;
  for (const auto& b : list_builtins())
    if (b.name == name) s.description = b.description;
  auto flat = [&](int dim, std::vector<std::string> eta) {
    s.manifold = ManifoldKind::flat_chart;
    s.field = field_from_expressions(ManifoldKind::flat_chart, dim, std::vector<std::string>(dim, "0"), eta);
    s.field.lower = Vec::Constant(dim, -1.0);
    s.field.upper = Vec::Constant(dim, 1.0);
  };
  if (name == "example_3_7") {
    s.field = field_from_expressions(ManifoldKind::sphere2, 2, {"-y", "x", "0"}, {"z", "0", "-x"});
    s.expected_chi = 2;
  } else if (name == "classical_ph_sphere") {
    s.field = field_from_expressions(ManifoldKind::sphere2, 2, {"0", "0", "0"}, {"-x*z", "-y*z", "1 - z^2"});
    s.expected_chi = 2;
  } else if (name == "torus_nonvanishing") {
    s.manifold = ManifoldKind::torus2;
    s.field = field_from_expressions(ManifoldKind::torus2, 2, {"2", "0"}, {"0", "1"});
    s.expected_chi = 0;
  } else if (name == "example_3_8") {
    if (m < 1 || m > 3) throw ConfigError("example_3_8 supports m = 1, 2 or 3");
    s.manifold = ManifoldKind::product_sphere2;
    s.mode = Mode::bundle_map;
    s.m = m;
    s.field = field_from_expressions(ManifoldKind::sphere2, 2, {"-y", "x", "0"}, {"z", "0", "-x"});
    s.expected_chi = 1L << m;
    s.rule_level = m == 2 ? 4 : 3;
  } else if (name == "classical_flat_linear") {
    flat(2, {"x", "y"});
    s.eps = 0.5;
  } else if (name == "classical_flat_r4") {
    flat(4, {"x", "y", "z", "w"});
    s.eps = 0.5;
  } else if (name == "classical_flat_r6") {
    flat(6, {"x1", "x2", "x3", "x4", "x5", "x6"});
    s.eps = 0.5;
    s.rule_level = 2;
  } else if (name == "constant_map") {
    s.manifold = ManifoldKind::flat_chart;
    s.mode = Mode::bundle_map;
    MapSpec spec;
    spec.dim = 2;
    spec.re = {{"1", "0"}, {"0", "2"}};
    spec.im = {{"0", "1"}, {"0", "0"}};
    spec.expected_pairing = 0;
    s.map = spec;
  } else {
    throw ConfigError("unknown built-in scenario '" + name + "'");
  }
  return s;
}

// Reports.

using ojson = nlohmann::ordered_json;

inline ojson report_to_json(const VerificationReport& r) {
  ojson j;
  j["schema"] = r.schema;
  j["scenario"] = r.scenario;
  j["manifold"] = r.manifold;
  j["mode"] = r.mode;
  j["check"] = r.check;
  j["n"] = r.n;
  j["rule_level"] = r.rule_level;
  j["eps"] = r.eps;
  ojson pts = ojson::array();
  for (const auto& p : r.points) {
    ojson q;
    q["location"] = p.location;
    q["kind"] = p.kind;
    q["in_sum"] = p.in_sum;
    q["degree"] = p.degree;
    q["raw"] = {p.raw_re, p.raw_im};
    q["residual"] = p.residual;
    if (p.brouwer) q["brouwer"] = *p.brouwer;
    if (p.transgression) q["transgression"] = *p.transgression;
    if (p.gamma_T) q["gamma_T"] = *p.gamma_T;
    if (p.two_path_gap) q["two_path_gap"] = *p.two_path_gap;
    pts.push_back(q);
  }
  j["points"] = pts;
  j["sum_of_degrees"] = r.sum_of_degrees;
  j["predicted_chi"] = r.predicted_chi;
  j["expected_chi"] = r.expected_chi ? ojson(*r.expected_chi) : ojson(nullptr);
  j["predicted_pairing"] = r.predicted_pairing;
  j["expected_pairing"] = r.expected_pairing ? ojson(*r.expected_pairing) : ojson(nullptr);
  j["chi_from_pairing"] = r.chi_from_pairing;
  j["classical_chi"] = r.classical_chi ? ojson(*r.classical_chi) : ojson(nullptr);
  j["max_residual"] = r.max_residual;
  j["routes_consistent"] = r.routes_consistent;
  j["superconn_consistent"] = r.superconn_consistent;
  j["pass"] = r.pass;
  j["diagnostics"] = r.diagnostics;
  if (r.seconds) j["seconds"] = *r.seconds;
  return j;
}

inline VerificationReport report_from_json(const ojson& j) {
  auto opt_long = [&](const char* key) -> std::optional<long> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<long>();
  };
  VerificationReport r;
  r.schema = j.at("schema").get<int>();
  if (r.schema != 1) throw ConfigError("unsupported report schema " + std::to_string(r.schema));
  r.scenario = j.at("scenario").get<std::string>();
  r.manifold = j.at("manifold").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.check = j.at("check").get<std::string>();
  r.n = j.at("n").get<int>();
  r.rule_level = j.at("rule_level").get<int>();
  r.eps = j.at("eps").get<double>();
  for (const auto& q : j.at("points")) {
    PointReport p;
    p.location = q.at("location").get<std::vector<double>>();
    p.kind = q.at("kind").get<std::string>();
    p.in_sum = q.at("in_sum").get<bool>();
    p.degree = q.at("degree").get<long>();
    p.raw_re = q.at("raw").at(0).get<double>();
    p.raw_im = q.at("raw").at(1).get<double>();
    p.residual = q.at("residual").get<double>();
    if (q.contains("brouwer")) p.brouwer = q.at("brouwer").get<long>();
    if (q.contains("transgression")) p.transgression = q.at("transgression").get<double>();
    if (q.contains("gamma_T")) p.gamma_T = q.at("gamma_T").get<double>();
    if (q.contains("two_path_gap")) p.two_path_gap = q.at("two_path_gap").get<double>();
    r.points.push_back(p);
  }
  r.sum_of_degrees = j.at("sum_of_degrees").get<long>();
  r.predicted_chi = j.at("predicted_chi").get<long>();
  r.expected_chi = opt_long("expected_chi");
  r.predicted_pairing = j.at("predicted_pairing").get<long>();
  r.expected_pairing = opt_long("expected_pairing");
  r.chi_from_pairing = j.at("chi_from_pairing").get<long>();
  r.classical_chi = opt_long("classical_chi");
  r.max_residual = j.at("max_residual").get<double>();
  r.routes_consistent = j.at("routes_consistent").get<bool>();
  r.superconn_consistent = j.at("superconn_consistent").get<bool>();
  r.pass = j.at("pass").get<bool>();
  r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  if (j.contains("seconds")) r.seconds = j.at("seconds").get<double>();
  return r;
}

enum class ReportFormat { json, text };

inline std::string emit_report(const VerificationReport& r, ReportFormat format) {
  if (format == ReportFormat::json) return report_to_json(r).dump(2) + "\n";
  std::ostringstream os;
  os.precision(12);
  os << "scenario " << r.scenario << " (" << r.manifold << ", " << r.mode << ", n = " << r.n << ", level "
     << r.rule_level << ", eps " << r.eps << ")\n";
  if (r.points.empty()) os << "  no degeneracy points\n";
  for (const auto& p : r.points) {
    os << "  point (";
    for (std::size_t i = 0; i < p.location.size(); ++i) os << (i ? ", " : "") << p.location[i];
    os << ") " << p.kind << (p.in_sum ? "" : " excluded") << ": degree " << p.degree << ", raw " << p.raw_re
       << (p.raw_im < 0 ? " - " : " + ") << std::abs(p.raw_im) << "i, residual " << p.residual;
    if (p.brouwer) os << ", brouwer " << *p.brouwer;
    if (p.transgression) os << ", transgression " << *p.transgression << " (gap " << *p.two_path_gap << ")";
    os << "\n";
  }
  os << "  sum of degrees " << r.sum_of_degrees << "\n";
  os << "  predicted chi " << r.predicted_chi;
  if (r.expected_chi) os << ", expected " << *r.expected_chi;
  os << "\n  predicted pairing " << r.predicted_pairing;
  if (r.expected_pairing) os << ", expected " << *r.expected_pairing;
  os << ", chi from pairing " << r.chi_from_pairing << "\n";
  if (r.classical_chi) os << "  sum of Brouwer degrees " << *r.classical_chi << "\n";
  for (const auto& d : r.diagnostics) os << "  note: " << d << "\n";
  if (r.seconds) os << "  time " << *r.seconds << " s\n";
  os << (r.pass ? "PASS" : "FAIL") << " " << r.scenario << "\n";
  return os.str();
}

}  // namespace spindeg
