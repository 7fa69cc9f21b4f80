#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "nakano/errors.hpp"

namespace nakano {

/// Arithmetic expression AST used to define scalar fields and metric entries.
///
/// Grammar (see docs/grammar.ebnf for the authoritative copy):
///
///   expression = term , { ( "+" | "-" ) , term } ;
///   term       = factor , { ( "*" | "/" ) , factor } ;
///   factor     = "-" , factor | power ;
///   power      = atom , [ "^" , factor ] ;
///   atom       = number | variable | function , "(" , expression , ")"
///              | "(" , expression , ")" ;
///
/// Precedence is ^ > unary - > * / > + -, with +,-,*,/ left-associative and
/// ^ right-associative. Variables are x1.., y1.. and the scan parameter s;
/// functions are exp, log, sqrt, sin, cos, abs.
struct Expr {
  enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;  // variable or function name
  std::shared_ptr<const Expr> lhs;
  std::shared_ptr<const Expr> rhs;
};

using ExprPtr = std::shared_ptr<const Expr>;
using Bindings = std::map<std::string, double>;

/// Parses `text` into an AST. Throws ParseError (with byte offset) on
/// unbalanced parentheses, unknown identifiers, or trailing tokens.
ExprPtr parse(std::string_view text);

/// Evaluates with IEEE-754 doubles. log/sqrt of a negative argument,
/// division by zero and 0/negative bases under fractional exponents raise
/// EvalError instead of producing NaN; unbound variables raise ExprVarError.
double eval(const Expr& e, const Bindings& bindings);

std::set<std::string> free_vars(const Expr& e);

/// Minimal-parenthesis rendering; parse(pretty(e)) is structurally equal to e.
std::string pretty(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

}  // namespace nakano
