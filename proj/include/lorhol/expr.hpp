#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "lorhol/errors.hpp"

namespace lorhol {

// Exact exponent for powers; always normalized (den > 0, gcd(num, den) = 1).
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_integer() const { return den_ == 1; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::string to_string(const Rational& r);

enum class ExprKind : std::uint8_t {
  Constant,
  Coordinate,
  Parameter,
  Negate,
  Add,
  Subtract,
  Multiply,
  Divide,
  Power,
  Sqrt,
  Exp,
  Log,
  Sin,
  Cos,
};

struct ExprNode;

// Immutable handle to a shared expression DAG. Copying is cheap; nodes are never mutated,
// so an Expr can be evaluated from several threads at once.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(double value);

  static Expr coordinate(std::string name);
  static Expr parameter(std::string name);

  ExprKind kind() const;
  double value() const;             // Constant only
  const std::string& name() const;  // Coordinate / Parameter only
  Rational exponent() const;        // Power only
  int arity() const;
  Expr arg(int i) const;

  bool is_constant() const { return kind() == ExprKind::Constant; }
  bool is_constant(double v) const { return is_constant() && value() == v; }
  bool is_zero() const { return is_constant(0.0); }

  std::size_t hash() const;
  const ExprNode* node() const { return node_.get(); }
  const std::shared_ptr<const ExprNode>& shared() const { return node_; }

  static Expr from_node(std::shared_ptr<const ExprNode> node) { return Expr(std::move(node)); }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  ExprKind kind = ExprKind::Constant;
  double value = 0.0;
  std::string name;
  Rational exponent;
  std::array<std::shared_ptr<const ExprNode>, 2> args;
  std::size_t hash = 0;
};

// Builders. They fold constants and apply the trivial identities x+0, x*1, x*0, x^0, x^1,
// --x; nothing else is simplified.
Expr operator-(const Expr& a);
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
inline Expr operator+(const Expr& a, double b) { return a + Expr(b); }
inline Expr operator+(double a, const Expr& b) { return Expr(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr(b); }
inline Expr operator-(double a, const Expr& b) { return Expr(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr(b); }
inline Expr operator*(double a, const Expr& b) { return Expr(a) * b; }
inline Expr operator/(const Expr& a, double b) { return a / Expr(b); }
inline Expr operator/(double a, const Expr& b) { return Expr(a) / b; }
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }
inline Expr& operator/=(Expr& a, const Expr& b) { return a = a / b; }

Expr pow(const Expr& base, Rational exponent);
Expr sqrt(const Expr& a);
Expr exp(const Expr& a);
Expr ln(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);

bool structurally_equal(const Expr& a, const Expr& b);

// Canonical text form; parse_expr(to_string(e)) rebuilds the same tree.
std::string to_string(const Expr& e);
std::ostream& operator<<(std::ostream& os, const Expr& e);
// Printed form cut off after roughly `cap` characters, for diagnostics.
std::string abbreviated(const Expr& e, std::size_t cap = 240);

std::set<std::string> coordinates_in(const Expr& e);
std::set<std::string> parameters_in(const Expr& e);

// Node count of the DAG (shared nodes counted once).
std::size_t dag_size(const Expr& e);

struct SymbolTable {
  std::vector<std::string> coordinates;
  std::vector<std::string> parameters;
};

Expr parse_expr(std::string_view src, const SymbolTable& symbols);

// Exact partial derivative. The Differentiator keeps a memo keyed by node, so repeated
// use on related expressions (a metric and its higher derivatives) shares work.
class Differentiator {
 public:
  explicit Differentiator(std::string variable) : var_(std::move(variable)) {}
  Expr operator()(const Expr& e);
  const std::string& variable() const { return var_; }

 private:
  std::string var_;
  std::unordered_map<const ExprNode*, std::pair<Expr, Expr>> memo_;  // node -> (source, derivative)
};

Expr differentiate(const Expr& e, const std::string& variable);

using ParamEnv = std::map<std::string, double, std::less<>>;
using Coordinates = std::array<std::string, 4>;
using Point = Eigen::Vector4d;

// Straight-line program compiled from a set of expressions with common subexpressions
// merged. Parameters are bound at compile time.
class Tape {
 public:
  Tape() = default;
  Tape(const std::vector<Expr>& outputs, const Coordinates& coords, const ParamEnv& env);

  std::size_t output_count() const { return outputs_.size(); }
  std::size_t instruction_count() const { return code_.size(); }

  // Throws DomainError naming the failing subexpression.
  void evaluate(const Point& x, double* out) const;
  std::vector<double> evaluate(const Point& x) const;

 private:
  struct Instr {
    ExprKind kind = ExprKind::Constant;
    std::int32_t a = -1;
    std::int32_t b = -1;
    double value = 0.0;  // constant value, or exponent as double
    Rational exponent;
  };
  std::vector<Instr> code_;
  std::vector<Expr> origins_;
  std::vector<std::int32_t> outputs_;
};

double eval_expr(const Expr& e, const Coordinates& coords, const Point& x, const ParamEnv& env);

}  // namespace lorhol

namespace Eigen {
template <>
struct NumTraits<lorhol::Expr> : GenericNumTraits<lorhol::Expr> {
  using Real = lorhol::Expr;
  using NonInteger = lorhol::Expr;
  using Nested = lorhol::Expr;
  using Literal = lorhol::Expr;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 3,
    MulCost = 3
  };
};
}  // namespace Eigen

namespace lorhol {
using ExprMatrix = Eigen::Matrix<Expr, 4, 4>;
using ExprVector = Eigen::Matrix<Expr, 4, 1>;
}  // namespace lorhol
