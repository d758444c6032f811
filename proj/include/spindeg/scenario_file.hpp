#pragma once

// Scenario files: a small TOML subset (tables, key = value, strings, numbers,
// booleans, arrays that may span lines, # comments). The grammar and the key
// reference live in docs/scenario-format.md.

#include "spindeg/harness.hpp"

#include <fstream>
#include <set>
#include <variant>

namespace spindeg {

struct ConfigValue {
  std::variant<std::string, double, bool, std::vector<ConfigValue>> data;
  bool integer = false;
  std::size_t line = 0, column = 0;
};

namespace detail {

class ConfigParser {
 public:
  struct Entry {
    std::string table, key;
    ConfigValue value;
    std::size_t line, column;
  };

  explicit ConfigParser(std::string text) : src_(std::move(text)) {}

  std::vector<Entry> parse() {
    std::vector<Entry> out;
    std::set<std::string> seen_tables{""}, seen_keys;
    std::string table;
    for (;;) {
      skip_blank_lines();
      if (eof()) break;
      const std::size_t l = line_, c = col_;
      if (peek() == '[') {
        advance();
        skip_inline_ws();
        table = identifier();
        skip_inline_ws();
        expect(']');
        if (!seen_tables.insert(table).second) fail("table [" + table + "] defined twice", l, c);
      } else {
        const std::string key = identifier();
        skip_inline_ws();
        expect('=');
        skip_inline_ws();
        ConfigValue v = value();
        if (!seen_keys.insert(table + "." + key).second) fail("key '" + key + "' defined twice", l, c);
        out.push_back({table, key, std::move(v), l, c});
      }
      end_of_statement();
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t l, std::size_t c) const { throw ParseError(msg, l, c); }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, line_, col_); }

  bool eof() const { return pos_ >= src_.size(); }
  char peek() const { return eof() ? '\0' : src_[pos_]; }
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void expect(char ch) {
    if (peek() != ch) fail(std::string("expected '") + ch + "'");
    advance();
  }
  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') advance();
  }
  void skip_blank_lines() {
    for (;;) {
      skip_inline_ws();
      skip_comment();
      if (peek() == '\n') advance();
      else return;
    }
  }
  // Inside arrays newlines and comments are insignificant.
  void skip_any_ws() {
    for (;;) {
      skip_inline_ws();
      skip_comment();
      if (peek() == '\n') advance();
      else return;
    }
  }
  void end_of_statement() {
    skip_inline_ws();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
    advance();
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) advance();
    if (pos_ == start) fail("expected a key");
    return src_.substr(start, pos_ - start);
  }

  ConfigValue value() {
    ConfigValue v;
    v.line = line_;
    v.column = col_;
    const char c = peek();
    if (c == '"') {
      advance();
      std::string s;
      while (!eof() && peek() != '"') {
        if (peek() == '\n') fail("unterminated string");
        if (peek() == '\\') {
          advance();
          const char e = peek();
          if (e == 'n') s += '\n';
          else if (e == 't') s += '\t';
          else if (e == '"' || e == '\\') s += e;
          else fail("unknown escape sequence");
          advance();
          continue;
        }
        s += peek();
        advance();
      }
      if (eof()) fail("unterminated string", v.line, v.column);
      advance();
      v.data = std::move(s);
    } else if (c == '[') {
      advance();
      std::vector<ConfigValue> items;
      skip_any_ws();
      while (peek() != ']') {
        items.push_back(value());
        skip_any_ws();
        if (peek() == ',') {
          advance();
          skip_any_ws();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      advance();
      v.data = std::move(items);
    } else if (src_.compare(pos_, 4, "true") == 0) {
      for (int i = 0; i < 4; ++i) advance();
      v.data = true;
    } else if (src_.compare(pos_, 5, "false") == 0) {
      for (int i = 0; i < 5; ++i) advance();
      v.data = false;
    } else {
      const std::size_t start = pos_;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '+' ||
                        peek() == '-'))
        advance();
      const std::string tok = src_.substr(start, pos_ - start);
      if (tok.empty()) fail("expected a value");
      char* end = nullptr;
      const double d = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) fail("malformed value '" + tok + "'", v.line, v.column);
      if (!std::isfinite(d)) fail("numeric value must be finite", v.line, v.column);
      v.data = d;
      v.integer = tok.find_first_of(".eE") == std::string::npos;
    }
    return v;
  }

  std::string src_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

[[noreturn]] inline void bad_value(const ConfigValue& v, const std::string& msg) {
  throw ParseError(msg, v.line, v.column);
}

inline std::string as_string(const ConfigValue& v) {
  if (auto s = std::get_if<std::string>(&v.data)) return *s;
  bad_value(v, "expected a string");
}

inline double as_number(const ConfigValue& v) {
  if (auto d = std::get_if<double>(&v.data)) return *d;
  bad_value(v, "expected a number");
}

inline long as_integer(const ConfigValue& v) {
  const double d = as_number(v);
  if (!v.integer || d != std::floor(d)) bad_value(v, "expected an integer");
  return static_cast<long>(d);
}

inline bool as_bool(const ConfigValue& v) {
  if (auto b = std::get_if<bool>(&v.data)) return *b;
  bad_value(v, "expected true or false");
}

inline const std::vector<ConfigValue>& as_array(const ConfigValue& v) {
  if (auto a = std::get_if<std::vector<ConfigValue>>(&v.data)) return *a;
  bad_value(v, "expected an array");
}

inline std::vector<std::string> as_strings(const ConfigValue& v) {
  std::vector<std::string> out;
  for (const auto& x : as_array(v)) {
    // Numbers are accepted as constant components.
    if (auto d = std::get_if<double>(&x.data)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", *d);
      out.push_back(buf);
    } else {
      out.push_back(as_string(x));
    }
  }
  return out;
}

inline Vec as_vector(const ConfigValue& v) {
  const auto& a = as_array(v);
  Vec out(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) out[static_cast<Eigen::Index>(i)] = as_number(a[i]);
  return out;
}

}  // namespace detail

struct ScenarioFile {
  Scenario scenario;
  std::optional<std::string> json_path;
};

inline ScenarioFile parse_scenario_text(const std::string& text) {
  using detail::as_integer;
  using detail::as_number;
  using detail::as_string;
  const auto entries = detail::ConfigParser(text).parse();

  ScenarioFile out;
  Scenario& s = out.scenario;
  // A builtin base, if any, is applied before every other key.
  for (const auto& e : entries)
    if (e.table.empty() && e.key == "builtin") {
      long m = 2;
      for (const auto& f : entries)
        if (f.table.empty() && f.key == "m") m = as_integer(f.value);
      s = builtin_example(as_string(e.value), static_cast<int>(m));
    }

  std::optional<std::vector<std::string>> xi, eta;
  std::optional<long> chart_dim;
  std::optional<Vec> lower, upper;
  std::optional<std::string> manifold;
  MapSpec map;
  bool have_map = false;

  for (const auto& e : entries) {
    const std::string where = e.table.empty() ? e.key : e.table + "." + e.key;
    const auto& v = e.value;
    if (where == "builtin" || where == "m") {
      if (where == "m") s.m = static_cast<int>(as_integer(v));
    } else if (where == "name") s.name = as_string(v);
    else if (where == "description") s.description = as_string(v);
    else if (where == "manifold") manifold = as_string(v);
    else if (where == "mode") s.mode = parse_mode(as_string(v));
    else if (where == "expected_chi") s.expected_chi = as_integer(v);
    else if (where == "eps") {
      s.eps = as_number(v);
      if (!(s.eps > 0.0)) detail::bad_value(v, "eps must be positive");
    } else if (where == "rule_level") {
      s.rule_level = static_cast<int>(as_integer(v));
      if (s.rule_level < 1) detail::bad_value(v, "rule_level must be at least 1");
    } else if (where == "fd_step") s.fd_step = as_number(v);
    else if (where == "field.xi") xi = detail::as_strings(v);
    else if (where == "field.eta") eta = detail::as_strings(v);
    else if (where == "zeros.grid") s.zeros.grid = static_cast<int>(as_integer(v));
    else if (where == "zeros.tol") s.zeros.tol = as_number(v);
    else if (where == "chart.dim") chart_dim = as_integer(v);
    else if (where == "chart.lower") lower = detail::as_vector(v);
    else if (where == "chart.upper") upper = detail::as_vector(v);
    else if (where == "map.dim") {
      map.dim = static_cast<int>(as_integer(v));
      have_map = true;
    } else if (where == "map.re" || where == "map.im") {
      std::vector<std::vector<std::string>> rows;
      for (const auto& row : detail::as_array(v)) rows.push_back(detail::as_strings(row));
      (where == "map.re" ? map.re : map.im) = rows;
      have_map = true;
    } else if (where == "map.points") {
      for (const auto& p : detail::as_array(v)) map.points.push_back(detail::as_vector(p));
      have_map = true;
    } else if (where == "map.expected_pairing") {
      map.expected_pairing = as_integer(v);
      have_map = true;
    } else if (where == "output.json") out.json_path = as_string(v);
    else if (where == "superconn.check") s.superconn_check = detail::as_bool(v);
    else throw ParseError("unknown key '" + where + "'", e.line, e.column);
  }

  if (manifold) s.manifold = parse_manifold(*manifold);
  if (have_map) {
    if (map.im.empty() && !map.re.empty())
      map.im.assign(map.re.size(), std::vector<std::string>(map.re.size(), "0"));
    s.map = map;
    s.mode = Mode::bundle_map;
    s.manifold = ManifoldKind::flat_chart;
  } else if (xi || eta) {
    if (!xi || !eta) throw ConfigError("[field] needs both xi and eta");
    const ManifoldKind fm = s.manifold == ManifoldKind::product_sphere2 ? ManifoldKind::sphere2 : s.manifold;
    int dim = 2;
    if (fm == ManifoldKind::flat_chart) {
      if (!chart_dim) throw ConfigError("flat_chart scenarios need [chart] dim");
      dim = static_cast<int>(*chart_dim);
    }
    s.field = field_from_expressions(fm, dim, *xi, *eta);
  } else if (!s.field.xi && !s.map) {
    throw ConfigError("scenario needs a [field], a [map] or a builtin");
  }
  if (s.field.manifold == ManifoldKind::flat_chart && !s.map) {
    const int d = s.field.dim;
    if (lower) s.field.lower = *lower;
    if (upper) s.field.upper = *upper;
    if (s.field.lower.size() != d || s.field.upper.size() != d)
      throw ConfigError("[chart] lower and upper need " + std::to_string(d) + " entries");
    for (int i = 0; i < d; ++i)
      if (!(s.field.lower[i] < s.field.upper[i])) throw ConfigError("[chart] lower must be below upper");
  }
  if (s.mode == Mode::bundle_map && !s.map && s.manifold != ManifoldKind::product_sphere2)
    throw ConfigError("bundle_map mode needs a [map] table or a product_sphere2 manifold");
  if (s.name.empty()) s.name = "scenario";
  return out;
}

inline ScenarioFile load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario_text(os.str());
}

}  // namespace spindeg
