#pragma once

// Arithmetic expressions over chart coordinates.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] integer)?
//   primary := number | identifier | call '(' expr ')' | '(' expr ')'
//
// Identifiers: x y z w (coordinates 1..4), x1 .. x9, and the constant pi.
// Calls: sin cos sqrt.

#include "spindeg/core.hpp"

#include <cctype>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>

namespace spindeg {

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { number, variable, pi, neg, add, sub, mul, div, pow, sin, cos, sqrt };
  Kind kind = Kind::number;
  double value = 0.0;  // number literal
  int index = 0;       // variable index (0-based)
  int exponent = 0;    // integer power
  Expr lhs, rhs;       // operands; unary nodes use lhs only
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  Expr parse() {
    skip_ws();
    if (pos_ >= src_.size()) fail("empty expression");
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) fail(std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, pos_ + 1); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static Expr make(ExprNode::Kind k, Expr a = nullptr, Expr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+')) e = make(ExprNode::Kind::add, e, parse_term());
      else if (accept('-')) e = make(ExprNode::Kind::sub, e, parse_term());
      else return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) e = make(ExprNode::Kind::mul, e, parse_unary());
      else if (accept('/')) e = make(ExprNode::Kind::div, e, parse_unary());
      else return e;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return make(ExprNode::Kind::neg, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (!accept('^')) return base;
    skip_ws();
    const bool negative = accept('-');
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ == start) fail("exponent must be an integer literal");
    if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
      fail("exponent must be an integer literal");
    const std::string digits(src_.substr(start, pos_ - start));
    if (digits.size() > 4) fail("exponent too large");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::pow;
    n->lhs = std::move(base);
    n->exponent = (negative ? -1 : 1) * std::stoi(digits);
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '^') fail("chained powers need parentheses");
    return n;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    const char* begin = src_.data() + pos_;
    char* end = nullptr;
    const std::string tail(begin, src_.size() - pos_);
    const double v = std::strtod(tail.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - tail.c_str());
    if (used == 0) fail("malformed number");
    pos_ += used;
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::number;
    n->value = v;
    return n;
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    auto call = [&](ExprNode::Kind k) {
      if (!accept('(')) fail("expected '(' after " + name);
      Expr arg = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return make(k, arg);
    };
    if (name == "sin") return call(ExprNode::Kind::sin);
    if (name == "cos") return call(ExprNode::Kind::cos);
    if (name == "sqrt") return call(ExprNode::Kind::sqrt);
    if (name == "pi") return make(ExprNode::Kind::pi);
    int index = -1;
    if (name == "x") index = 0;
    else if (name == "y") index = 1;
    else if (name == "z") index = 2;
    else if (name == "w") index = 3;
    else if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '9') index = name[1] - '1';
    if (index < 0) {
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::variable;
    n->index = index;
    return n;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expression(std::string_view src) { return detail::ExprParser(src).parse(); }

/// Highest variable index used plus one.
inline int expression_arity(const Expr& e) {
  if (!e) return 0;
  int a = e->kind == ExprNode::Kind::variable ? e->index + 1 : 0;
  return std::max({a, expression_arity(e->lhs), expression_arity(e->rhs)});
}

inline double evaluate(const Expr& e, const Vec& x) {
  using K = ExprNode::Kind;
  switch (e->kind) {
    case K::number: return e->value;
    case K::pi: return kPi;
    case K::variable:
      if (e->index >= x.size())
        throw DimensionError("expression uses coordinate " + std::to_string(e->index + 1) + " of a " +
                             std::to_string(x.size()) + "-dimensional point");
      return x[e->index];
    case K::neg: return -evaluate(e->lhs, x);
    case K::add: return evaluate(e->lhs, x) + evaluate(e->rhs, x);
    case K::sub: return evaluate(e->lhs, x) - evaluate(e->rhs, x);
    case K::mul: return evaluate(e->lhs, x) * evaluate(e->rhs, x);
    case K::div: return evaluate(e->lhs, x) / evaluate(e->rhs, x);
    case K::pow: {
      const double b = evaluate(e->lhs, x);
      double r = 1.0;
      for (int i = 0; i < std::abs(e->exponent); ++i) r *= b;
      return e->exponent < 0 ? 1.0 / r : r;
    }
    case K::sin: return std::sin(evaluate(e->lhs, x));
    case K::cos: return std::cos(evaluate(e->lhs, x));
    case K::sqrt: return std::sqrt(evaluate(e->lhs, x));
  }
  return 0.0;
}

/// Normalised text: every compound operand parenthesised, numbers with 17
/// significant digits, so parse(print(e)) rebuilds the same tree.
inline std::string print_expression(const Expr& e) {
  using K = ExprNode::Kind;
  auto wrap = [](const Expr& s) {
    const bool atomic = s->kind == K::number || s->kind == K::variable || s->kind == K::pi ||
                        s->kind == K::sin || s->kind == K::cos || s->kind == K::sqrt;
    return atomic ? print_expression(s) : "(" + print_expression(s) + ")";
  };
  switch (e->kind) {
    case K::number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e->value);
      return buf;
    }
    case K::pi: return "pi";
    case K::variable: return "x" + std::to_string(e->index + 1);
    case K::neg: return "-" + wrap(e->lhs);
    case K::add: return wrap(e->lhs) + " + " + wrap(e->rhs);
    case K::sub: return wrap(e->lhs) + " - " + wrap(e->rhs);
    case K::mul: return wrap(e->lhs) + " * " + wrap(e->rhs);
    case K::div: return wrap(e->lhs) + " / " + wrap(e->rhs);
    case K::pow: return wrap(e->lhs) + "^" + std::to_string(e->exponent);
    case K::sin: return "sin(" + print_expression(e->lhs) + ")";
    case K::cos: return "cos(" + print_expression(e->lhs) + ")";
    case K::sqrt: return "sqrt(" + print_expression(e->lhs) + ")";
  }
  return {};
}

inline bool same_tree(const Expr& a, const Expr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->index != b->index || a->exponent != b->exponent) return false;
  if (a->kind == ExprNode::Kind::number && a->value != b->value) return false;
  return same_tree(a->lhs, b->lhs) && same_tree(a->rhs, b->rhs);
}

}  // namespace spindeg
