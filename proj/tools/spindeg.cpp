// spindeg: command-line front end for the scenario runner.
//
//   spindeg verify [FILE] [--builtin NAME] [--m M] [--level L] [--eps E] [--json OUT]
//   spindeg degree [FILE] [--builtin NAME] --point "x,y,..." [--eps E] [--level L]
//   spindeg zeros  [FILE] [--builtin NAME] [--grid N] [--tol T]
//   spindeg list-builtins
//
// Exit status: 0 pass, 1 verification failure, 2 usage or runtime error.

#include "spindeg/scenario_file.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace spindeg;

namespace {

struct Source {
  std::string path;
  std::string builtin;
  int m = 2;
};

void add_source(CLI::App* cmd, Source& src) {
  cmd->add_option("file", src.path, "scenario file");
  cmd->add_option("--builtin", src.builtin, "built-in scenario name (see list-builtins)");
  cmd->add_option("--m", src.m, "number of factors for product scenarios")->check(CLI::Range(1, 3));
}

ScenarioFile load(const Source& src) {
  if (src.path.empty() == src.builtin.empty()) throw ConfigError("give exactly one of a scenario file or --builtin");
  if (!src.builtin.empty()) return {builtin_example(src.builtin, src.m), std::nullopt};
  return load_scenario_file(src.path);
}

Vec parse_point(const std::string& text) {
  std::vector<double> xs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("malformed point coordinate '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
      throw ConfigError("malformed point coordinate '" + item + "'");
    xs.push_back(v);
  }
  if (xs.empty()) throw ConfigError("empty --point");
  return Eigen::Map<Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

void print_degree(const DegreeResult& r) {
  std::cout.precision(12);
  std::cout << "degree " << r.degree << "\nraw " << r.raw.real() << (r.raw.imag() < 0 ? " - " : " + ")
            << std::abs(r.raw.imag()) << "i\nresidual " << r.residual << "\nrule_level " << r.rule_level << "\n";
}

int cmd_degree(const Scenario& s, const Vec& point) {
  if (s.map) {
    const BundleMapField v = detail::map_from_spec(*s.map);
    if (point.size() != s.map->dim) throw ConfigError("point dimension does not match the map chart");
    const SphereRule rule = sphere_rule(s.map->dim, s.eps, Vec::Zero(s.map->dim), s.rule_level);
    print_degree(local_degree(detail::shifted(v, point), rule));
    return 0;
  }
  if (s.manifold == ManifoldKind::product_sphere2) {
    if (point.size() != 3 * s.m) throw ConfigError("product point needs 3 coordinates per factor");
    std::vector<Vec> pts;
    for (int i = 0; i < s.m; ++i) {
      Vec p = point.segment(3 * i, 3);
      pts.push_back(p / p.norm());
    }
    const LocalModel lm = build_product_vk_field(std::vector<ComplexField>(s.m, s.field), pts, s.eps);
    print_degree(local_degree(lm.v, lm.rule(s.rule_level)));
    return 0;
  }
  Vec p = point;
  if (s.field.manifold == ManifoldKind::sphere2) {
    if (p.size() != 3) throw ConfigError("sphere points need 3 coordinates");
    p /= p.norm();
  }
  LocalModel lm = build_vk_sphere_field(s.field, p, s.eps, build_clifford_module(s.field.dim));
  lm.v.fd_step = s.fd_step;
  print_degree(local_degree(lm.v, lm.rule(s.rule_level)));
  return 0;
}

int cmd_zeros(const Scenario& s) {
  if (s.map) throw ConfigError("zeros needs a complex-field scenario");
  const ZeroSet zs = find_zero_set(s.field, s.zeros);
  if (s.manifold == ManifoldKind::product_sphere2) std::cout << "factor degeneracy points:\n";
  if (zs.points.empty()) std::cout << "no degeneracy points\n";
  std::cout.precision(12);
  for (const auto& p : zs.points) {
    std::string kind = point_kind_name(PointKind::z_k);
    if (s.field.dim == 2 && classify_oriented(s.field, p.location)) kind = point_kind_name(PointKind::z_k_plus);
    std::cout << format_point(p.location) << "  " << kind << (kind == "Z_K_plus" ? " (oriented)" : "")
              << "  |h| = " << p.h_abs << "\n";
  }
  for (const auto& d : zs.diagnostics) std::cout << "note: " << d << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local degrees and index sums for complex vector fields and spinor bundle maps"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: SPINDEG_THREADS or hardware concurrency)");

  Source vsrc, dsrc, zsrc;
  std::optional<int> level;
  std::optional<double> eps;
  std::string json_out, format = "text";
  bool timing = false;
  auto* verify = app.add_subcommand("verify", "run a scenario and check its index identity");
  add_source(verify, vsrc);
  verify->add_option("--level", level, "quadrature level")->check(CLI::PositiveNumber);
  verify->add_option("--eps", eps, "sphere radius")->check(CLI::PositiveNumber);
  verify->add_option("--json", json_out, "write the JSON report to this path ('-' for stdout)");
  verify->add_option("--format", format, "stdout format")->check(CLI::IsMember({"text", "json"}));
  verify->add_flag("--timing", timing, "include wall time in the report");

  std::string point;
  auto* degree = app.add_subcommand("degree", "local degree of v_K or a bundle map at one point");
  add_source(degree, dsrc);
  degree->add_option("--point", point, "comma-separated coordinates")->required();
  degree->add_option("--level", level, "quadrature level")->check(CLI::PositiveNumber);
  degree->add_option("--eps", eps, "sphere radius")->check(CLI::PositiveNumber);

  std::optional<int> grid;
  std::optional<double> tol;
  auto* zeros = app.add_subcommand("zeros", "locate the degeneracy set h(K, K) = 0");
  add_source(zeros, zsrc);
  zeros->add_option("--grid", grid, "grid cells per chart axis")->check(CLI::Range(8, 4096));
  zeros->add_option("--tol", tol, "residual tolerance")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-builtins", "list the built-in scenarios");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) setenv("SPINDEG_THREADS", std::to_string(threads).c_str(), 1);

  try {
    if (*list) {
      for (const auto& b : list_builtins()) std::cout << b.name << "  " << b.description << "\n";
      return 0;
    }
    if (*verify) {
      ScenarioFile sf = load(vsrc);
      if (level) sf.scenario.rule_level = *level;
      if (eps) sf.scenario.eps = *eps;
      if (!json_out.empty()) sf.json_path = json_out;
      const VerificationReport rep = run_scenario(sf.scenario, RunOptions{timing});
      std::cout << emit_report(rep, format == "json" ? ReportFormat::json : ReportFormat::text);
      if (sf.json_path) {
        if (*sf.json_path == "-") {
          std::cout << emit_report(rep, ReportFormat::json);
        } else {
          std::ofstream out(*sf.json_path);
          if (!out) throw ConfigError("cannot write '" + *sf.json_path + "'");
          out << emit_report(rep, ReportFormat::json);
          if (!out) throw ConfigError("write to '" + *sf.json_path + "' failed");
        }
      }
      return rep.pass ? 0 : 1;
    }
    if (*degree) {
      ScenarioFile sf = load(dsrc);
      if (level) sf.scenario.rule_level = *level;
      if (eps) sf.scenario.eps = *eps;
      return cmd_degree(sf.scenario, parse_point(point));
    }
    if (*zeros) {
      ScenarioFile sf = load(zsrc);
      if (grid) sf.scenario.zeros.grid = *grid;
      if (tol) sf.scenario.zeros.tol = *tol;
      return cmd_zeros(sf.scenario);
    }
  } catch (const spindeg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
