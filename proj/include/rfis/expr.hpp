#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "rfis/errors.hpp"

namespace rfis {

/// Bivariate scaling-factor expressions over x, y with + - * / ^, unary
/// minus and sin/cos/exp/abs/sqrt. Trees are immutable value types stored
/// as flat node vectors; evaluation is reentrant.
///
/// Grammar (EBNF, also documented in the README):
///   expr     = term { ("+" | "-") term } ;
///   term     = unary { ("*" | "/") unary } ;
///   unary    = "-" unary | power ;
///   power    = primary [ "^" exponent ] ;
///   exponent = [ "-" ] number [ "^" exponent ] ;      (* constant, folded *)
///   primary  = number | "x" | "y" | func "(" expr ")" | "(" expr ")" ;
///   func     = "sin" | "cos" | "exp" | "abs" | "sqrt" ;
///
/// Precedence: ^ binds tighter than unary -, then * /, then + -.
/// + - * / associate left; ^ associates right. The exponent of ^ must be a
/// constant (it is folded to a literal at parse time).
struct ScaleExpr {
  enum class Op { literal, var_x, var_y, add, sub, mul, div, pow, neg, sin, cos, exp, abs, sqrt };

  struct Node {
    Op op;
    double value = 0.0;  // literal payload
    int lhs = -1, rhs = -1;
  };

  std::vector<Node> nodes;
  int root = -1;

  bool valid() const { return root >= 0; }

  bool operator==(const ScaleExpr& o) const {
    if (nodes.size() != o.nodes.size() || root != o.root) return false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Node &a = nodes[i], &b = o.nodes[i];
      if (a.op != b.op || a.lhs != b.lhs || a.rhs != b.rhs) return false;
      if (a.op == Op::literal && a.value != b.value) return false;
    }
    return true;
  }
};

namespace detail {

struct ExprParser {
  std::string_view text;
  std::size_t pos = 0;
  ScaleExpr out;

  [[noreturn]] void syntax(const std::string& what, std::size_t at) {
    fail(errc::syntax_error, what + " at offset " + std::to_string(at));
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eof() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  int add(ScaleExpr::Node n) {
    out.nodes.push_back(n);
    return static_cast<int>(out.nodes.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+'))
        lhs = add({ScaleExpr::Op::add, 0.0, lhs, parse_term()});
      else if (accept('-'))
        lhs = add({ScaleExpr::Op::sub, 0.0, lhs, parse_term()});
      else
        return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = add({ScaleExpr::Op::mul, 0.0, lhs, parse_unary()});
      else if (accept('/'))
        lhs = add({ScaleExpr::Op::div, 0.0, lhs, parse_unary()});
      else
        return lhs;
    }
  }

  int parse_unary() {
    if (accept('-')) return add({ScaleExpr::Op::neg, 0.0, parse_unary(), -1});
    return parse_power();
  }

  int parse_power() {
    int base = parse_primary();
    skip_ws();
    if (accept('^')) {
      double e = parse_exponent();
      int lit = add({ScaleExpr::Op::literal, e, -1, -1});
      return add({ScaleExpr::Op::pow, 0.0, base, lit});
    }
    return base;
  }

  // Exponents are constants: an optionally negated number, possibly itself
  // raised to another constant (right-associative), folded at parse time.
  double parse_exponent() {
    skip_ws();
    std::size_t at = pos;
    bool negate = accept('-');
    char c = peek();
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.')
      syntax("exponent must be a numeric literal", pos);
    double v = parse_number();
    skip_ws();
    if (accept('^')) {
      double e = parse_exponent();
      v = std::pow(v, e);
      if (!std::isfinite(v)) syntax("constant exponent folding overflows", at);
    }
    return negate ? -v : v;
  }

  double parse_number() {
    skip_ws();
    std::size_t start = pos;
    const char* first = text.data() + pos;
    const char* last = text.data() + text.size();
    double v = 0.0;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{}) syntax("expected number", start);
    pos += static_cast<std::size_t>(res.ptr - first);
    return v;
  }

  int parse_primary() {
    char c = peek();
    std::size_t at = pos;
    if (c == '\0') syntax("unexpected end of expression", pos);

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return add({ScaleExpr::Op::literal, parse_number(), -1, -1});

    if (accept('(')) {
      int e = parse_expr();
      if (!accept(')')) syntax("expected ')'", pos);
      return e;
    }

    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos;
      while (end < text.size() &&
             std::isalnum(static_cast<unsigned char>(text[end])))
        ++end;
      std::string_view ident = text.substr(pos, end - pos);
      pos = end;
      if (ident == "x") return add({ScaleExpr::Op::var_x, 0.0, -1, -1});
      if (ident == "y") return add({ScaleExpr::Op::var_y, 0.0, -1, -1});

      ScaleExpr::Op fn;
      if (ident == "sin") fn = ScaleExpr::Op::sin;
      else if (ident == "cos") fn = ScaleExpr::Op::cos;
      else if (ident == "exp") fn = ScaleExpr::Op::exp;
      else if (ident == "abs") fn = ScaleExpr::Op::abs;
      else if (ident == "sqrt") fn = ScaleExpr::Op::sqrt;
      else
        fail(errc::unknown_identifier,
             "'" + std::string(ident) + "' at offset " + std::to_string(at));

      if (!accept('(')) syntax("expected '(' after function name", pos);
      int arg = parse_expr();
      if (!accept(')')) syntax("expected ')'", pos);
      return add({fn, 0.0, arg, -1});
    }

    syntax(std::string("unexpected character '") + c + "'", at);
  }
};

}  // namespace detail

inline ScaleExpr parse(std::string_view text) {
  detail::ExprParser p{text, 0, {}};
  p.out.root = p.parse_expr();
  if (!p.eof()) p.syntax("trailing input", p.pos);
  return std::move(p.out);
}

inline double eval(const ScaleExpr& expr, double x, double y) {
  if (!expr.valid()) fail(errc::eval_error, "empty expression");
  struct Ev {
    const ScaleExpr& e;
    double x, y;
    double run(int idx) const {
      const ScaleExpr::Node& n = e.nodes[idx];
      double v;
      switch (n.op) {
        case ScaleExpr::Op::literal: v = n.value; break;
        case ScaleExpr::Op::var_x: v = x; break;
        case ScaleExpr::Op::var_y: v = y; break;
        case ScaleExpr::Op::add: v = run(n.lhs) + run(n.rhs); break;
        case ScaleExpr::Op::sub: v = run(n.lhs) - run(n.rhs); break;
        case ScaleExpr::Op::mul: v = run(n.lhs) * run(n.rhs); break;
        case ScaleExpr::Op::div: v = run(n.lhs) / run(n.rhs); break;
        case ScaleExpr::Op::pow: v = std::pow(run(n.lhs), e.nodes[n.rhs].value); break;
        case ScaleExpr::Op::neg: v = -run(n.lhs); break;
        case ScaleExpr::Op::sin: v = std::sin(run(n.lhs)); break;
        case ScaleExpr::Op::cos: v = std::cos(run(n.lhs)); break;
        case ScaleExpr::Op::exp: v = std::exp(run(n.lhs)); break;
        case ScaleExpr::Op::abs: v = std::abs(run(n.lhs)); break;
        case ScaleExpr::Op::sqrt: v = std::sqrt(run(n.lhs)); break;
        default: v = std::nan("");
      }
      if (!std::isfinite(v)) fail(errc::eval_error, "non-finite intermediate result");
      return v;
    }
  };
  return Ev{expr, x, y}.run(expr.root);
}

/// True iff the tree references neither variable.
inline bool is_constant(const ScaleExpr& expr) {
  for (const auto& n : expr.nodes)
    if (n.op == ScaleExpr::Op::var_x || n.op == ScaleExpr::Op::var_y) return false;
  return true;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void print_node(const ScaleExpr& e, int idx, std::string& out) {
  const ScaleExpr::Node& n = e.nodes[idx];
  auto binary = [&](const char* op) {
    out += '(';
    print_node(e, n.lhs, out);
    out += op;
    print_node(e, n.rhs, out);
    out += ')';
  };
  // ^ exponents must stay in exponent form ([-]number, no parentheses)
  // so the printed text reparses under the exponent grammar.
  auto power = [&] {
    out += '(';
    print_node(e, n.lhs, out);
    out += '^';
    const double v = e.nodes[n.rhs].value;
    if (v < 0 || std::signbit(v)) {
      out += '-';
      out += format_double(-v);
    } else {
      out += format_double(v);
    }
    out += ')';
  };
  auto func = [&](const char* name) {
    out += name;
    out += '(';
    print_node(e, n.lhs, out);
    out += ')';
  };
  switch (n.op) {
    case ScaleExpr::Op::literal:
      if (n.value < 0 || std::signbit(n.value)) {
        out += "(-" + format_double(-n.value) + ')';
      } else {
        out += format_double(n.value);
      }
      break;
    case ScaleExpr::Op::var_x: out += 'x'; break;
    case ScaleExpr::Op::var_y: out += 'y'; break;
    case ScaleExpr::Op::add: binary("+"); break;
    case ScaleExpr::Op::sub: binary("-"); break;
    case ScaleExpr::Op::mul: binary("*"); break;
    case ScaleExpr::Op::div: binary("/"); break;
    case ScaleExpr::Op::pow: power(); break;
    case ScaleExpr::Op::neg:
      out += "(-";
      print_node(e, n.lhs, out);
      out += ')';
      break;
    case ScaleExpr::Op::sin: func("sin"); break;
    case ScaleExpr::Op::cos: func("cos"); break;
    case ScaleExpr::Op::exp: func("exp"); break;
    case ScaleExpr::Op::abs: func("abs"); break;
    case ScaleExpr::Op::sqrt: func("sqrt"); break;
  }
}

}  // namespace detail

/// Canonical fully parenthesized form; parse(print(e)) reproduces e up to
/// node numbering (compared structurally).
inline std::string print(const ScaleExpr& expr) {
  std::string out;
  detail::print_node(expr, expr.root, out);
  return out;
}

struct Rect {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
};

struct MagnitudeBounds {
  double lo = 0;  ///< certified min of |expr| over the region (after padding)
  double hi = 0;  ///< certified max of |expr| (after padding); must stay < 1
};

/// Min/max of |expr| over a density x density endpoint-inclusive sample of
/// the rectangle. The bounds are sampled, not interval-certified; pad
/// inflates hi and deflates lo. Throws CapViolation when the certified max
/// reaches 1.
inline MagnitudeBounds certify_bounds(const ScaleExpr& expr, const Rect& rect, int density,
                                      double pad = 0.0) {
  if (density < 2) fail(errc::config_error, "certify_bounds density must be >= 2");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < density; ++i) {
    const double x = rect.x0 + (rect.x1 - rect.x0) * i / (density - 1);
    for (int j = 0; j < density; ++j) {
      const double y = rect.y0 + (rect.y1 - rect.y0) * j / (density - 1);
      const double v = std::abs(eval(expr, x, y));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  MagnitudeBounds b{std::max(0.0, lo - pad), hi + pad};
  if (b.hi >= 1.0)
    fail(errc::cap_violation, "certified |s| reaches " + detail::format_double(b.hi) +
                                  " (cap requires |s| < 1)");
  return b;
}

/// Sampled Lipschitz estimate of the expression over a rectangle: max
/// adjacent finite-difference quotient along both axes.
inline double sampled_lipschitz(const ScaleExpr& expr, const Rect& rect, int density) {
  if (density < 2) fail(errc::config_error, "sampled_lipschitz density must be >= 2");
  const double hx = (rect.x1 - rect.x0) / (density - 1);
  const double hy = (rect.y1 - rect.y0) / (density - 1);
  double best = 0.0;
  std::vector<double> prev_col(density), col(density);
  for (int i = 0; i < density; ++i) {
    const double x = rect.x0 + hx * i;
    for (int j = 0; j < density; ++j) {
      col[j] = eval(expr, x, rect.y0 + hy * j);
      if (j > 0 && hy > 0) best = std::max(best, std::abs(col[j] - col[j - 1]) / hy);
      if (i > 0 && hx > 0) best = std::max(best, std::abs(col[j] - prev_col[j]) / hx);
    }
    std::swap(col, prev_col);
  }
  return best;
}

}  // namespace rfis
