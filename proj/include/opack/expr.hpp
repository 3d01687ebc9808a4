#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "opack/common.hpp"

namespace opack {

// Arithmetic expressions over the closed grammar used by model files:
// literals, the variables x1.., u1.., w1.. and s, the four binary operators
// with standard precedence, unary minus, and a fixed set of calls.

enum class VarKind { X, U, W, S };

enum class Func { Sin, Cos, Tan, Tanh, Sech, Abs, Exp, Min, Max, Sqrt };

inline int func_arity(Func f) { return f == Func::Min || f == Func::Max ? 2 : 1; }

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Tanh: return "tanh";
    case Func::Sech: return "sech";
    case Func::Abs: return "abs";
    case Func::Exp: return "exp";
    case Func::Min: return "min";
    case Func::Max: return "max";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

class Expr {
 public:
  enum class Node { Number, Variable, Neg, Add, Sub, Mul, Div, Call };

  Node node = Node::Number;
  double value = 0.0;           // Number
  VarKind var_kind = VarKind::S;
  int var_index = 0;            // 0-based; S always 0
  Func func = Func::Sin;        // Call
  std::vector<Expr> args;

  static Expr number(double v) {
    Expr e;
    e.node = Node::Number;
    e.value = v;
    return e;
  }
  static Expr variable(VarKind k, int index) {
    Expr e;
    e.node = Node::Variable;
    e.var_kind = k;
    e.var_index = index;
    return e;
  }

  bool operator==(const Expr& o) const {
    if (node != o.node) return false;
    switch (node) {
      case Node::Number: return value == o.value;
      case Node::Variable: return var_kind == o.var_kind && var_index == o.var_index;
      case Node::Call:
        if (func != o.func) return false;
        break;
      default: break;
    }
    return args == o.args;
  }
};

struct EvalEnv {
  std::span<const double> x;
  std::span<const double> u;
  std::span<const double> w;
  double s = 0.0;
  bool has_s = false;
};

namespace detail {

struct Token {
  enum class Kind { Number, Ident, Plus, Minus, Star, Slash, LParen, RParen, Comma, End };
  Kind kind;
  double number = 0.0;
  std::string ident;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= text_.size()) {
      tok_.kind = Token::Kind::End;
      return;
    }
    const char c = text_[pos_];
    auto single = [&](Token::Kind k) {
      tok_.kind = k;
      ++pos_;
      ++col_;
    };
    switch (c) {
      case '+': single(Token::Kind::Plus); return;
      case '-': single(Token::Kind::Minus); return;
      case '*': single(Token::Kind::Star); return;
      case '/': single(Token::Kind::Slash); return;
      case '(': single(Token::Kind::LParen); return;
      case ')': single(Token::Kind::RParen); return;
      case ',': single(Token::Kind::Comma); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      tok_.number = std::strtod(text_.c_str() + pos_, &end);
      const std::size_t n = static_cast<std::size_t>(end - (text_.c_str() + pos_));
      if (n == 0) fail("malformed number");
      pos_ += n;
      col_ += static_cast<int>(n);
      tok_.kind = Token::Kind::Number;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t n = 0;
      while (pos_ + n < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_ + n])) || text_[pos_ + n] == '_'))
        ++n;
      tok_.ident = text_.substr(pos_, n);
      pos_ += n;
      col_ += static_cast<int>(n);
      tok_.kind = Token::Kind::Ident;
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("expression: " + msg + " at line " + std::to_string(line_) + ", column " +
                std::to_string(col_));
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  Expr parse() {
    Expr e = sum();
    expect(Token::Kind::End, "end of expression");
    return e;
  }

 private:
  Expr sum() {
    Expr e = term();
    while (true) {
      const auto k = lex_.peek().kind;
      if (k != Token::Kind::Plus && k != Token::Kind::Minus) return e;
      lex_.take();
      Expr rhs = term();
      Expr parent;
      parent.node = k == Token::Kind::Plus ? Expr::Node::Add : Expr::Node::Sub;
      parent.args = {std::move(e), std::move(rhs)};
      e = std::move(parent);
    }
  }

  Expr term() {
    Expr e = unary();
    while (true) {
      const auto k = lex_.peek().kind;
      if (k != Token::Kind::Star && k != Token::Kind::Slash) return e;
      lex_.take();
      Expr rhs = unary();
      Expr parent;
      parent.node = k == Token::Kind::Star ? Expr::Node::Mul : Expr::Node::Div;
      parent.args = {std::move(e), std::move(rhs)};
      e = std::move(parent);
    }
  }

  Expr unary() {
    if (lex_.peek().kind == Token::Kind::Minus) {
      lex_.take();
      Expr parent;
      parent.node = Expr::Node::Neg;
      parent.args = {unary()};
      return parent;
    }
    return primary();
  }

  Expr primary() {
    Token t = lex_.take();
    switch (t.kind) {
      case Token::Kind::Number:
        return Expr::number(t.number);
      case Token::Kind::LParen: {
        Expr e = sum();
        expect(Token::Kind::RParen, "')'");
        return e;
      }
      case Token::Kind::Ident:
        if (lex_.peek().kind == Token::Kind::LParen) return call(t);
        return variable(t);
      default:
        fail(t, "expected a number, variable, call or '('");
    }
  }

  Expr call(const Token& name) {
    static const std::pair<const char*, Func> table[] = {
        {"sin", Func::Sin}, {"cos", Func::Cos}, {"tan", Func::Tan},   {"tanh", Func::Tanh},
        {"sech", Func::Sech}, {"abs", Func::Abs}, {"exp", Func::Exp}, {"min", Func::Min},
        {"max", Func::Max}, {"sqrt", Func::Sqrt}};
    Expr e;
    e.node = Expr::Node::Call;
    bool known = false;
    for (const auto& [n, f] : table) {
      if (name.ident == n) {
        e.func = f;
        known = true;
        break;
      }
    }
    if (!known) fail(name, "unknown function '" + name.ident + "'");
    lex_.take();  // '('
    e.args.push_back(sum());
    while (lex_.peek().kind == Token::Kind::Comma) {
      lex_.take();
      e.args.push_back(sum());
    }
    expect(Token::Kind::RParen, "')'");
    if (static_cast<int>(e.args.size()) != func_arity(e.func))
      fail(name, "function '" + name.ident + "' takes " + std::to_string(func_arity(e.func)) +
                     " argument(s)");
    return e;
  }

  Expr variable(const Token& t) {
    const std::string& id = t.ident;
    if (id == "s") return Expr::variable(VarKind::S, 0);
    if ((id[0] == 'x' || id[0] == 'u' || id[0] == 'w') && id.size() > 1) {
      bool digits = true;
      for (std::size_t i = 1; i < id.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(id[i]));
      if (digits && id[1] != '0') {
        const int index = std::stoi(id.substr(1)) - 1;
        const VarKind k = id[0] == 'x' ? VarKind::X : id[0] == 'u' ? VarKind::U : VarKind::W;
        return Expr::variable(k, index);
      }
    }
    fail(t, "unknown identifier '" + id + "'");
  }

  void expect(Token::Kind k, const std::string& what) {
    Token t = lex_.take();
    if (t.kind != k) fail(t, "expected " + what);
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw Error("expression: " + msg + " at line " + std::to_string(t.line) + ", column " +
                std::to_string(t.col));
  }

  Lexer lex_;
};

}  // namespace detail

inline Expr parse_expr(const std::string& text) {
  if (text.empty()) throw Error("expression: empty input");
  return detail::Parser(text).parse();
}

inline double eval_expr(const Expr& e, const EvalEnv& env) {
  auto var = [&](VarKind k, int i) -> double {
    const char* names = "xuws";
    std::span<const double> v;
    switch (k) {
      case VarKind::X: v = env.x; break;
      case VarKind::U: v = env.u; break;
      case VarKind::W: v = env.w; break;
      case VarKind::S:
        if (!env.has_s) throw Error("expression: unbound variable s");
        return env.s;
    }
    if (i < 0 || i >= static_cast<int>(v.size()))
      throw Error(std::string("expression: unbound variable ") + names[static_cast<int>(k)] +
                  std::to_string(i + 1));
    return v[static_cast<std::size_t>(i)];
  };
  double r = 0.0;
  switch (e.node) {
    case Expr::Node::Number: r = e.value; break;
    case Expr::Node::Variable: r = var(e.var_kind, e.var_index); break;
    case Expr::Node::Neg: r = -eval_expr(e.args[0], env); break;
    case Expr::Node::Add: r = eval_expr(e.args[0], env) + eval_expr(e.args[1], env); break;
    case Expr::Node::Sub: r = eval_expr(e.args[0], env) - eval_expr(e.args[1], env); break;
    case Expr::Node::Mul: r = eval_expr(e.args[0], env) * eval_expr(e.args[1], env); break;
    case Expr::Node::Div: {
      const double den = eval_expr(e.args[1], env);
      if (den == 0.0) throw Error("expression: division by zero");
      r = eval_expr(e.args[0], env) / den;
      break;
    }
    case Expr::Node::Call: {
      const double a = eval_expr(e.args[0], env);
      switch (e.func) {
        case Func::Sin: r = std::sin(a); break;
        case Func::Cos: r = std::cos(a); break;
        case Func::Tan: r = std::tan(a); break;
        case Func::Tanh: r = std::tanh(a); break;
        case Func::Sech: r = 1.0 / std::cosh(a); break;
        case Func::Abs: r = std::fabs(a); break;
        case Func::Exp: r = std::exp(a); break;
        case Func::Sqrt: r = std::sqrt(a); break;
        case Func::Min: r = std::min(a, eval_expr(e.args[1], env)); break;
        case Func::Max: r = std::max(a, eval_expr(e.args[1], env)); break;
      }
      break;
    }
  }
  if (!std::isfinite(r)) throw Error("expression: non-finite result");
  return r;
}

namespace detail {

inline int precedence(Expr::Node n) {
  switch (n) {
    case Expr::Node::Add:
    case Expr::Node::Sub: return 1;
    case Expr::Node::Mul:
    case Expr::Node::Div: return 2;
    case Expr::Node::Neg: return 3;
    default: return 4;
  }
}

inline void print_expr(const Expr& e, std::string& out, int parent_prec, bool rhs) {
  const int prec = precedence(e.node);
  const bool parens = prec < parent_prec || (prec == parent_prec && rhs);
  if (parens) out += '(';
  char buf[40];
  switch (e.node) {
    case Expr::Node::Number:
      std::snprintf(buf, sizeof(buf), "%.17g", e.value);
      out += buf;
      break;
    case Expr::Node::Variable: {
      const char* names = "xuws";
      out += names[static_cast<int>(e.var_kind)];
      if (e.var_kind != VarKind::S) out += std::to_string(e.var_index + 1);
      break;
    }
    case Expr::Node::Neg:
      out += '-';
      print_expr(e.args[0], out, precedence(Expr::Node::Neg), false);
      break;
    case Expr::Node::Add:
    case Expr::Node::Sub:
    case Expr::Node::Mul:
    case Expr::Node::Div: {
      print_expr(e.args[0], out, prec, false);
      const char* ops[] = {"", "", "", " + ", " - ", "*", "/", ""};
      out += ops[static_cast<int>(e.node)];
      print_expr(e.args[1], out, prec, true);
      break;
    }
    case Expr::Node::Call:
      out += func_name(e.func);
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print_expr(e.args[i], out, 0, false);
      }
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_expr(e, out, 0, false);
  return out;
}

}  // namespace opack

#include "opack/kinf.hpp"

namespace opack {

// Classify a certificate expression in the single variable s into a
// MonotoneFn. Zero and linear forms are recognized by sampling; anything
// else stays an evaluable monotone callable (validated for strict increase).
inline MonotoneFn classify_monotone(const Expr& e, const std::string& origin) {
  auto eval_at = [e](double s) {
    EvalEnv env;
    env.s = s;
    env.has_s = true;
    return eval_expr(e, env);
  };
  if (std::fabs(eval_at(0.0)) > 1e-12)
    throw Error(origin + ": comparison function must satisfy f(0) = 0");
  std::vector<double> samples;
  for (int k = -16; k <= 16; ++k) samples.push_back(std::pow(2.0, k));
  bool zero = true, linear = true;
  const double c = eval_at(1.0);
  for (double s : samples) {
    const double v = eval_at(s);
    zero = zero && std::fabs(v) <= 1e-14 * std::max(1.0, s);
    linear = linear && std::fabs(v - c * s) <= 1e-12 * std::max({1.0, std::fabs(v), c * s});
  }
  if (zero) return MonotoneFn::zero();
  if (linear && c > 0) return MonotoneFn::linear(c);
  double prev = 0.0;
  for (double s : samples) {
    const double v = eval_at(s);
    if (v <= prev) throw Error(origin + ": comparison function is not strictly increasing");
    prev = v;
  }
  return MonotoneFn::numeric(eval_at, origin + ":" + to_string(e));
}

}  // namespace opack
