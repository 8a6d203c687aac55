#include "folia/cfun.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>

namespace folia {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

struct FunctionName {
  std::string_view name;
  ExprOp op;
};

constexpr FunctionName kFunctions[] = {
    {"conj", ExprOp::Conj}, {"re", ExprOp::Re},   {"im", ExprOp::Im},   {"abs2", ExprOp::Abs2},
    {"exp", ExprOp::Exp},   {"sin", ExprOp::Sin}, {"cos", ExprOp::Cos},
};

const char* op_name(ExprOp op) {
  switch (op) {
    case ExprOp::Lit: return "Lit";
    case ExprOp::Var: return "Var";
    case ExprOp::Add: return "Add";
    case ExprOp::Sub: return "Sub";
    case ExprOp::Mul: return "Mul";
    case ExprOp::Div: return "Div";
    case ExprOp::Pow: return "Pow";
    case ExprOp::Conj: return "Conj";
    case ExprOp::Re: return "Re";
    case ExprOp::Im: return "Im";
    case ExprOp::Abs2: return "Abs2";
    case ExprOp::Exp: return "Exp";
    case ExprOp::Sin: return "Sin";
    case ExprOp::Cos: return "Cos";
  }
  return "?";
}

const char* function_text(ExprOp op) {
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name.data();
  }
  return "?";
}

std::string format_number(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

std::string format_complex(cplx c) {
  if (c.imag() == 0.0) return format_number(c.real());
  if (c.real() == 0.0) return format_number(c.imag()) + "i";
  return "(" + format_number(c.real()) + (c.imag() < 0 ? "-" : "+") + format_number(std::abs(c.imag())) + "i)";
}

std::string infix(const ExprNode& n) {
  switch (n.op) {
    case ExprOp::Lit:
      // The grammar has no unary minus; negative literals print as differences.
      if (n.value.real() < 0.0 || (n.value.real() == 0.0 && n.value.imag() < 0.0)) {
        return "(0 - " + format_complex(-n.value) + ")";
      }
      return format_complex(n.value);
    case ExprOp::Var:
      return "z" + std::to_string(n.index);
    case ExprOp::Add:
      return "(" + infix(*n.lhs) + " + " + infix(*n.rhs) + ")";
    case ExprOp::Sub:
      return "(" + infix(*n.lhs) + " - " + infix(*n.rhs) + ")";
    case ExprOp::Mul:
      return "(" + infix(*n.lhs) + " * " + infix(*n.rhs) + ")";
    case ExprOp::Div:
      return "(" + infix(*n.lhs) + " / " + infix(*n.rhs) + ")";
    case ExprOp::Pow:
      return infix(*n.lhs) + "^" + std::to_string(n.index);
    default:
      return std::string(function_text(n.op)) + "(" + infix(*n.lhs) + ")";
  }
}

std::string structure_of(const ExprNode& n) {
  switch (n.op) {
    case ExprOp::Lit:
      return "Lit " + format_complex(n.value);
    case ExprOp::Var:
      return "Var " + std::to_string(n.index);
    case ExprOp::Pow:
      return "Pow(" + structure_of(*n.lhs) + ", " + std::to_string(n.index) + ")";
    default:
      if (n.rhs) return std::string(op_name(n.op)) + "(" + structure_of(*n.lhs) + ", " + structure_of(*n.rhs) + ")";
      return std::string(op_name(n.op)) + "(" + structure_of(*n.lhs) + ")";
  }
}

cplx integer_power(cplx base, int k, const ExprNode& node) {
  if (k == 0) return {1.0, 0.0};
  unsigned e = static_cast<unsigned>(k < 0 ? -static_cast<long>(k) : k);
  cplx result{1.0, 0.0};
  cplx b = base;
  while (e) {
    if (e & 1U) result *= b;
    b *= b;
    e >>= 1U;
  }
  if (k < 0) {
    if (result == cplx{0.0, 0.0}) throw EvalError("division by zero in " + infix(node));
    result = cplx{1.0, 0.0} / result;
  }
  return result;
}

cplx apply_unary(ExprOp op, cplx x) {
  switch (op) {
    case ExprOp::Conj: return std::conj(x);
    case ExprOp::Re: return {x.real(), 0.0};
    case ExprOp::Im: return {x.imag(), 0.0};
    case ExprOp::Abs2: return {std::norm(x), 0.0};
    case ExprOp::Exp: return std::exp(x);
    case ExprOp::Sin: return std::sin(x);
    case ExprOp::Cos: return std::cos(x);
    default: return x;
  }
}

cplx eval_node(const ExprNode& n, const Point& p) {
  switch (n.op) {
    case ExprOp::Lit:
      return n.value;
    case ExprOp::Var:
      if (n.index > p.complex_dim()) {
        throw EvalError("variable z" + std::to_string(n.index) + " is not bound (n = " +
                        std::to_string(p.complex_dim()) + ")");
      }
      return complex_coord(p, n.index);
    case ExprOp::Add:
      return eval_node(*n.lhs, p) + eval_node(*n.rhs, p);
    case ExprOp::Sub:
      return eval_node(*n.lhs, p) - eval_node(*n.rhs, p);
    case ExprOp::Mul:
      return eval_node(*n.lhs, p) * eval_node(*n.rhs, p);
    case ExprOp::Div: {
      const cplx num = eval_node(*n.lhs, p);
      const cplx den = eval_node(*n.rhs, p);
      if (den == cplx{0.0, 0.0}) throw EvalError("division by zero in " + infix(n));
      return num / den;
    }
    case ExprOp::Pow:
      return integer_power(eval_node(*n.lhs, p), n.index, n);
    default:
      return apply_unary(n.op, eval_node(*n.lhs, p));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ < src_.size()) fail(pos_, std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& what) const { throw ParseError(at, what); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  NodePtr make(ExprOp op, NodePtr lhs, NodePtr rhs, std::size_t at, int index = 0) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->index = index;
    n->depth = 1 + std::max(lhs ? lhs->depth : 0, rhs ? rhs->depth : 0);
    if (n->depth > kMaxExprDepth) fail(at, "expression nested deeper than " + std::to_string(kMaxExprDepth));
    const bool literal = lhs && lhs->op == ExprOp::Lit && (!rhs || rhs->op == ExprOp::Lit);
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    if (literal) {
      // Fold constant subtrees; leave a failing division for eval to report.
      try {
        const Point none = Point::zero(1);
        return literal_node(eval_node(*n, none));
      } catch (const EvalError&) {
      }
    }
    return n;
  }

  static NodePtr literal_node(cplx v) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Lit;
    n->value = v;
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size() || (src_[pos_] != '+' && src_[pos_] != '-')) return lhs;
      const std::size_t at = pos_;
      const ExprOp op = src_[pos_++] == '+' ? ExprOp::Add : ExprOp::Sub;
      lhs = make(op, lhs, term(), at);
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size() || (src_[pos_] != '*' && src_[pos_] != '/')) return lhs;
      const std::size_t at = pos_;
      const ExprOp op = src_[pos_++] == '*' ? ExprOp::Mul : ExprOp::Div;
      lhs = make(op, lhs, factor(), at);
    }
  }

  NodePtr factor() {
    NodePtr base = atom();
    if (!peek('^')) return base;
    const std::size_t at = pos_++;
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < src_.size() && src_[pos_] == '-') ++pos_;
    const std::size_t digits = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ == digits) fail(start, "expected an integer exponent");
    const long k = std::strtol(std::string(src_.substr(start, pos_ - start)).c_str(), nullptr, 10);
    if (k > 1000000 || k < -1000000) fail(start, "exponent out of range");
    return make(ExprOp::Pow, base, nullptr, at, static_cast<int>(k));
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail(pos_, "unexpected end of input");
    const std::size_t start = pos_;
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Nest guard(*this, start);
      NodePtr inner = expr();
      if (!peek(')')) fail(pos_, "expected ')'");
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      return number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      const std::string_view id = src_.substr(start, pos_ - start);
      if (id == "i") return literal_node({0.0, 1.0});
      if (id.size() >= 2 && id[0] == 'z' && id[1] != '0' &&
          std::all_of(id.begin() + 1, id.end(), [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
        if (id.size() > 7) fail(start, "variable index too large");
        auto n = std::make_shared<ExprNode>();
        n->op = ExprOp::Var;
        n->index = std::atoi(std::string(id.substr(1)).c_str());
        return n;
      }
      for (const auto& f : kFunctions) {
        if (id == f.name) {
          if (!peek('(')) fail(pos_, "expected '(' after " + std::string(id));
          ++pos_;
          Nest guard(*this, start);
          NodePtr arg = expr();
          if (!peek(')')) fail(pos_, "expected ')'");
          ++pos_;
          return make(f.op, arg, nullptr, start);
        }
      }
      fail(start, "unknown identifier '" + std::string(id) + "'");
    }
    fail(start, std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      const std::size_t exp_digits = pos_;
      digits();
      if (pos_ == exp_digits) pos_ = save;  // not an exponent after all
    }
    const double value = std::strtod(std::string(src_.substr(start, pos_ - start)).c_str(), nullptr);
    if (!std::isfinite(value)) fail(start, "number out of range");
    if (pos_ < src_.size() && src_[pos_] == 'i' &&
        !(pos_ + 1 < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '_'))) {
      ++pos_;
      return literal_node({0.0, value});
    }
    return literal_node({value, 0.0});
  }

  // Bounds recursion for parentheses, which do not add tree depth.
  struct Nest {
    Nest(Parser& p, std::size_t at) : parser(p) {
      if (++parser.nesting_ > kMaxExprDepth) parser.fail(at, "parentheses nested too deeply");
    }
    ~Nest() { --parser.nesting_; }
    Parser& parser;
  };

  std::string_view src_;
  std::size_t pos_ = 0;
  int nesting_ = 0;
};

struct Jet {
  cplx v;
  cplx a;  // d/dz_l
  cplx b;  // d/dconj(z_l)
};

Jet jet_node(const ExprNode& n, const Point& p, int l) {
  switch (n.op) {
    case ExprOp::Lit:
      return {n.value, 0.0, 0.0};
    case ExprOp::Var: {
      const cplx v = eval_node(n, p);
      return n.index == l ? Jet{v, 1.0, 0.0} : Jet{v, 0.0, 0.0};
    }
    case ExprOp::Add: {
      const Jet f = jet_node(*n.lhs, p, l), g = jet_node(*n.rhs, p, l);
      return {f.v + g.v, f.a + g.a, f.b + g.b};
    }
    case ExprOp::Sub: {
      const Jet f = jet_node(*n.lhs, p, l), g = jet_node(*n.rhs, p, l);
      return {f.v - g.v, f.a - g.a, f.b - g.b};
    }
    case ExprOp::Mul: {
      const Jet f = jet_node(*n.lhs, p, l), g = jet_node(*n.rhs, p, l);
      return {f.v * g.v, f.a * g.v + f.v * g.a, f.b * g.v + f.v * g.b};
    }
    case ExprOp::Div: {
      const Jet f = jet_node(*n.lhs, p, l), g = jet_node(*n.rhs, p, l);
      if (g.v == cplx{0.0, 0.0}) throw EvalError("division by zero in " + infix(n));
      const cplx g2 = g.v * g.v;
      return {f.v / g.v, (f.a * g.v - f.v * g.a) / g2, (f.b * g.v - f.v * g.b) / g2};
    }
    case ExprOp::Pow: {
      const Jet f = jet_node(*n.lhs, p, l);
      if (n.index == 0) return {1.0, 0.0, 0.0};
      const cplx d = static_cast<double>(n.index) * integer_power(f.v, n.index - 1, n);
      return {integer_power(f.v, n.index, n), d * f.a, d * f.b};
    }
    case ExprOp::Conj: {
      const Jet f = jet_node(*n.lhs, p, l);
      return {std::conj(f.v), std::conj(f.b), std::conj(f.a)};
    }
    case ExprOp::Re: {
      const Jet f = jet_node(*n.lhs, p, l);
      return {f.v.real(), 0.5 * (f.a + std::conj(f.b)), 0.5 * (f.b + std::conj(f.a))};
    }
    case ExprOp::Im: {
      const Jet f = jet_node(*n.lhs, p, l);
      const cplx two_i{0.0, 2.0};
      return {f.v.imag(), (f.a - std::conj(f.b)) / two_i, (f.b - std::conj(f.a)) / two_i};
    }
    case ExprOp::Abs2: {
      const Jet f = jet_node(*n.lhs, p, l);
      const cplx fc = std::conj(f.v);
      return {std::norm(f.v), f.a * fc + f.v * std::conj(f.b), f.b * fc + f.v * std::conj(f.a)};
    }
    case ExprOp::Exp:
    case ExprOp::Sin:
    case ExprOp::Cos: {
      const Jet f = jet_node(*n.lhs, p, l);
      cplx d;
      if (n.op == ExprOp::Exp) d = std::exp(f.v);
      if (n.op == ExprOp::Sin) d = std::cos(f.v);
      if (n.op == ExprOp::Cos) d = -std::sin(f.v);
      return {apply_unary(n.op, f.v), d * f.a, d * f.b};
    }
  }
  return {};
}

int max_var(const ExprNode& n) {
  int m = n.op == ExprOp::Var ? n.index : 0;
  if (n.lhs) m = std::max(m, max_var(*n.lhs));
  if (n.rhs) m = std::max(m, max_var(*n.rhs));
  return m;
}

bool holomorphic_node(const ExprNode& n) {
  if (n.op == ExprOp::Conj || n.op == ExprOp::Re || n.op == ExprOp::Im || n.op == ExprOp::Abs2) return false;
  return (!n.lhs || holomorphic_node(*n.lhs)) && (!n.rhs || holomorphic_node(*n.rhs));
}

}  // namespace

Expr Expr::parse(std::string_view src) { return Expr(Parser(src).parse()); }

int Expr::max_variable() const { return max_var(*root_); }

bool Expr::holomorphic_syntax() const { return holomorphic_node(*root_); }

std::string Expr::to_string() const { return infix(*root_); }

std::string Expr::structure() const { return structure_of(*root_); }

cplx eval(const Expr& e, const Point& p) { return eval_node(e.root(), p); }

WirtingerPair wirtinger_ad(const Expr& e, const Point& p, int l) {
  if (l < 1 || l > p.complex_dim()) throw DomainError("Wirtinger variable index out of range");
  const Jet j = jet_node(e.root(), p, l);
  return {j.a, j.b};
}

}  // namespace folia
