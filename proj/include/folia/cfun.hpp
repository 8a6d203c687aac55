#pragma once

// Test functions f: C^n -> C written as small expressions.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' int)?
//   atom   := number | 'i' | var | func '(' expr ')' | '(' expr ')'
//
// number is a decimal literal, optionally suffixed by 'i' (imaginary);
// var is z1..zN; func is one of conj, re, im, abs2, exp, sin, cos; int may
// carry a leading '-'.

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "folia/geometry.hpp"

namespace folia {

using cplx = std::complex<double>;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : std::runtime_error("syntax error at offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExprOp { Lit, Var, Add, Sub, Mul, Div, Pow, Conj, Re, Im, Abs2, Exp, Sin, Cos };

struct ExprNode {
  ExprOp op = ExprOp::Lit;
  cplx value;          // Lit
  int index = 0;       // Var: 1-based variable; Pow: exponent
  int depth = 1;
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

inline constexpr int kMaxExprDepth = 64;

/// Immutable parsed expression; cheap to copy.
class Expr {
 public:
  static Expr parse(std::string_view src);

  const ExprNode& root() const { return *root_; }
  /// Largest variable index used.
  int max_variable() const;
  /// True when no conj/re/im/abs2 appears.
  bool holomorphic_syntax() const;

  /// Fully parenthesised infix form.
  std::string to_string() const;
  /// Constructor-style tree, e.g. Mul(Conj(Var 1), Pow(Var 2, 2)).
  std::string structure() const;

 private:
  explicit Expr(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}
  std::shared_ptr<const ExprNode> root_;
};

cplx eval(const Expr& e, const Point& p);

/// (d f / d z_l, d f / d conj(z_l)).
struct WirtingerPair {
  cplx a;
  cplx b;
};

/// Forward-mode propagation of the Wirtinger pair for variable l.
WirtingerPair wirtinger_ad(const Expr& e, const Point& p, int l);

}  // namespace folia
