#include "nakano/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

namespace nakano {

namespace {

const std::array<std::string_view, 6> kFunctions = {"exp", "log", "sqrt",
                                                    "sin", "cos", "abs"};

bool is_function(std::string_view name) {
  for (auto f : kFunctions)
    if (f == name) return true;
  return false;
}

// Valid variables: s, x1.., y1.. (no leading zero in the index).
bool is_variable(std::string_view name) {
  if (name == "s") return true;
  if (name.size() < 2) return false;
  if (name[0] != 'x' && name[0] != 'y') return false;
  if (name[1] == '0') return false;
  for (std::size_t i = 1; i < name.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return false;
  return true;
}

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

ExprPtr number(double v) {
  Expr e;
  e.kind = Expr::Kind::Number;
  e.number = v;
  return make(std::move(e));
}

ExprPtr unary(Expr::Kind k, ExprPtr a) {
  Expr e;
  e.kind = k;
  e.lhs = std::move(a);
  return make(std::move(e));
}

ExprPtr binary(Expr::Kind k, ExprPtr a, ExprPtr b) {
  Expr e;
  e.kind = k;
  e.lhs = std::move(a);
  e.rhs = std::move(b);
  return make(std::move(e));
}

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr run() {
    ExprPtr e = expression();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("trailing tokens", pos_);
    return e;
  }

private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  ExprPtr expression() {
    ExprPtr e = term();
    for (;;) {
      if (accept('+'))
        e = binary(Expr::Kind::Add, e, term());
      else if (accept('-'))
        e = binary(Expr::Kind::Sub, e, term());
      else
        return e;
    }
  }

  ExprPtr term() {
    ExprPtr e = factor();
    for (;;) {
      if (accept('*'))
        e = binary(Expr::Kind::Mul, e, factor());
      else if (accept('/'))
        e = binary(Expr::Kind::Div, e, factor());
      else
        return e;
    }
  }

  ExprPtr factor() {
    if (accept('-')) return unary(Expr::Kind::Neg, factor());
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (accept('^')) return binary(Expr::Kind::Pow, base, factor());
    return base;
  }

  ExprPtr atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    if (c == '(') {
      ++pos_;
      ExprPtr e = expression();
      if (!accept(')')) throw ParseError("unbalanced parentheses", pos_);
      return e;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  ExprPtr parse_number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) throw ParseError("malformed number", pos_);
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return number(value);
  }

  ExprPtr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (is_function(name)) {
      if (!accept('(')) throw ParseError("expected '(' after function '" + name + "'", pos_);
      ExprPtr arg = expression();
      if (!accept(')')) throw ParseError("unbalanced parentheses", pos_);
      Expr e;
      e.kind = Expr::Kind::Call;
      e.name = std::move(name);
      e.lhs = std::move(arg);
      return make(std::move(e));
    }
    if (is_variable(name)) {
      Expr e;
      e.kind = Expr::Kind::Var;
      e.name = std::move(name);
      return make(std::move(e));
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool is_integral(double v) {
  return std::isfinite(v) && std::nearbyint(v) == v && std::abs(v) < 9.0e15;
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result of ") + what);
  return v;
}

}  // namespace

ExprPtr parse(std::string_view text) { return Parser(text).run(); }

double eval(const Expr& e, const Bindings& bindings) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return e.number;
    case Expr::Kind::Var: {
      auto it = bindings.find(e.name);
      if (it == bindings.end()) throw ExprVarError(e.name);
      return it->second;
    }
    case Expr::Kind::Neg:
      return -eval(*e.lhs, bindings);
    case Expr::Kind::Add:
      return checked(eval(*e.lhs, bindings) + eval(*e.rhs, bindings), "addition");
    case Expr::Kind::Sub:
      return checked(eval(*e.lhs, bindings) - eval(*e.rhs, bindings), "subtraction");
    case Expr::Kind::Mul:
      return checked(eval(*e.lhs, bindings) * eval(*e.rhs, bindings), "multiplication");
    case Expr::Kind::Div: {
      double denom = eval(*e.rhs, bindings);
      if (denom == 0.0) throw EvalError("division by zero");
      return checked(eval(*e.lhs, bindings) / denom, "division");
    }
    case Expr::Kind::Pow: {
      double base = eval(*e.lhs, bindings);
      double expo = eval(*e.rhs, bindings);
      if (is_integral(expo)) {
        if (base == 0.0 && expo < 0.0) throw EvalError("zero base with negative exponent");
        return checked(std::pow(base, expo), "power");
      }
      if (base <= 0.0)
        throw EvalError("non-integer exponent requires a positive base");
      return checked(std::pow(base, expo), "power");
    }
    case Expr::Kind::Call: {
      double a = eval(*e.lhs, bindings);
      if (e.name == "exp") return checked(std::exp(a), "exp");
      if (e.name == "log") {
        if (a <= 0.0) throw EvalError("log of non-positive argument");
        return checked(std::log(a), "log");
      }
      if (e.name == "sqrt") {
        if (a < 0.0) throw EvalError("sqrt of negative argument");
        return std::sqrt(a);
      }
      if (e.name == "sin") return std::sin(a);
      if (e.name == "cos") return std::cos(a);
      if (e.name == "abs") return std::abs(a);
      throw EvalError("unknown function '" + e.name + "'");
    }
  }
  throw EvalError("corrupt expression node");
}

namespace {

void collect_vars(const Expr& e, std::set<std::string>& out) {
  switch (e.kind) {
    case Expr::Kind::Var:
      out.insert(e.name);
      break;
    case Expr::Kind::Number:
      break;
    default:
      if (e.lhs) collect_vars(*e.lhs, out);
      if (e.rhs) collect_vars(*e.rhs, out);
  }
}

// Printing precedence: + - (1), * / (2), unary - (3), ^ (4), atoms (5).
int prec(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
      return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div:
      return 2;
    case Expr::Kind::Neg:
      return 3;
    case Expr::Kind::Pow:
      return 4;
    case Expr::Kind::Number:
      return e.number < 0.0 || std::signbit(e.number) ? 3 : 5;
    default:
      return 5;
  }
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& child, int min_prec, std::string& out) {
  if (prec(child) < min_prec) {
    out += '(';
    print(child, out);
    out += ')';
  } else {
    print(child, out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e.number);
      out += buf;
      break;
    }
    case Expr::Kind::Var:
      out += e.name;
      break;
    case Expr::Kind::Neg:
      out += '-';
      print_child(*e.lhs, 3, out);
      break;
    case Expr::Kind::Add:
      print_child(*e.lhs, 1, out);
      out += " + ";
      print_child(*e.rhs, 2, out);
      break;
    case Expr::Kind::Sub:
      print_child(*e.lhs, 1, out);
      out += " - ";
      print_child(*e.rhs, 2, out);
      break;
    case Expr::Kind::Mul:
      print_child(*e.lhs, 2, out);
      out += "*";
      print_child(*e.rhs, 3, out);
      break;
    case Expr::Kind::Div:
      print_child(*e.lhs, 2, out);
      out += "/";
      print_child(*e.rhs, 3, out);
      break;
    case Expr::Kind::Pow:
      print_child(*e.lhs, 5, out);
      out += "^";
      print_child(*e.rhs, 3, out);
      break;
    case Expr::Kind::Call:
      out += e.name;
      out += '(';
      print(*e.lhs, out);
      out += ')';
      break;
  }
}

}  // namespace

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

std::string pretty(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Number:
      return a.number == b.number ||
             (std::isnan(a.number) && std::isnan(b.number));
    case Expr::Kind::Var:
      return a.name == b.name;
    case Expr::Kind::Call:
      if (a.name != b.name) return false;
      return structurally_equal(*a.lhs, *b.lhs);
    case Expr::Kind::Neg:
      return structurally_equal(*a.lhs, *b.lhs);
    default:
      return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
  }
}

}  // namespace nakano
