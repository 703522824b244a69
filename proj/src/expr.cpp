#include "lorhol/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <ostream>
#include <unordered_set>

namespace lorhol {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
Rational operator*(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.num_, a.den_ * b.den_);
}

std::string to_string(const Rational& r) {
  if (r.is_integer()) return std::to_string(r.num());
  return std::to_string(r.num()) + "/" + std::to_string(r.den());
}

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t node_hash(const ExprNode& n) {
  std::size_t h = std::hash<int>{}(static_cast<int>(n.kind));
  std::uint64_t bits;
  std::memcpy(&bits, &n.value, sizeof bits);
  h = mix(h, std::hash<std::uint64_t>{}(bits));
  h = mix(h, std::hash<std::string>{}(n.name));
  h = mix(h, std::hash<std::int64_t>{}(n.exponent.num()));
  h = mix(h, std::hash<std::int64_t>{}(n.exponent.den()));
  for (const auto& a : n.args)
    if (a) h = mix(h, a->hash);
  return h;
}

NodePtr make_node(ExprKind kind, NodePtr a = nullptr, NodePtr b = nullptr, double value = 0.0,
                  std::string name = {}, Rational exponent = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->value = value == 0.0 ? 0.0 : value;  // no negative zero
  n->name = std::move(name);
  n->exponent = exponent;
  n->args = {std::move(a), std::move(b)};
  n->hash = node_hash(*n);
  return n;
}

Expr unary(ExprKind kind, const Expr& a) { return Expr::from_node(make_node(kind, a.shared())); }
Expr binary(ExprKind kind, const Expr& a, const Expr& b) {
  return Expr::from_node(make_node(kind, a.shared(), b.shared()));
}

// Folding only keeps finite results so the printed form always parses.
bool foldable(double v) { return std::isfinite(v); }

const NodePtr& zero_node() {
  static const NodePtr z = make_node(ExprKind::Constant);
  return z;
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}
Expr::Expr(double value) : node_(value == 0.0 ? zero_node() : make_node(ExprKind::Constant, nullptr, nullptr, value)) {
  if (!std::isfinite(value)) throw Error("non-finite constant");
}

Expr Expr::coordinate(std::string name) {
  return Expr(make_node(ExprKind::Coordinate, nullptr, nullptr, 0.0, std::move(name)));
}
Expr Expr::parameter(std::string name) {
  return Expr(make_node(ExprKind::Parameter, nullptr, nullptr, 0.0, std::move(name)));
}

ExprKind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
Rational Expr::exponent() const { return node_->exponent; }
int Expr::arity() const { return node_->args[1] ? 2 : node_->args[0] ? 1 : 0; }
Expr Expr::arg(int i) const { return Expr(node_->args.at(static_cast<std::size_t>(i))); }
std::size_t Expr::hash() const { return node_->hash; }

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  if (a.kind() == ExprKind::Negate) return a.arg(0);
  return unary(ExprKind::Negate, a);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && foldable(a.value() + b.value())) return Expr(a.value() + b.value());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return binary(ExprKind::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && foldable(a.value() - b.value())) return Expr(a.value() - b.value());
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return binary(ExprKind::Subtract, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && foldable(a.value() * b.value())) return Expr(a.value() * b.value());
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return binary(ExprKind::Multiply, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0 && foldable(a.value() / b.value()))
    return Expr(a.value() / b.value());
  if (a.is_zero() && !b.is_zero()) return Expr();
  if (b.is_constant(1.0)) return a;
  return binary(ExprKind::Divide, a, b);
}

Expr pow(const Expr& base, Rational exponent) {
  if (exponent == Rational(0)) return Expr(1.0);
  if (exponent == Rational(1)) return base;
  if (base.is_constant()) {
    const double b = base.value();
    if (b > 0.0 || (exponent.is_integer() && !(b == 0.0 && exponent.num() < 0))) {
      const double v = std::pow(b, exponent.value());
      if (foldable(v)) return Expr(v);
    }
  }
  return Expr::from_node(make_node(ExprKind::Power, base.shared(), nullptr, 0.0, {}, exponent));
}

Expr sqrt(const Expr& a) {
  if (a.is_constant() && a.value() >= 0.0) return Expr(std::sqrt(a.value()));
  return unary(ExprKind::Sqrt, a);
}
Expr exp(const Expr& a) {
  if (a.is_constant() && foldable(std::exp(a.value()))) return Expr(std::exp(a.value()));
  return unary(ExprKind::Exp, a);
}
Expr ln(const Expr& a) {
  if (a.is_constant() && a.value() > 0.0) return Expr(std::log(a.value()));
  return unary(ExprKind::Log, a);
}
Expr sin(const Expr& a) {
  if (a.is_constant()) return Expr(std::sin(a.value()));
  return unary(ExprKind::Sin, a);
}
Expr cos(const Expr& a) {
  if (a.is_constant()) return Expr(std::cos(a.value()));
  return unary(ExprKind::Cos, a);
}

bool structurally_equal(const Expr& a, const Expr& b) {
  struct PairHash {
    std::size_t operator()(const std::pair<const ExprNode*, const ExprNode*>& p) const {
      return mix(std::hash<const void*>{}(p.first), std::hash<const void*>{}(p.second));
    }
  };
  std::unordered_set<std::pair<const ExprNode*, const ExprNode*>, PairHash> known;
  std::function<bool(const ExprNode*, const ExprNode*)> eq = [&](const ExprNode* x, const ExprNode* y) {
    if (x == y) return true;
    if (!x || !y) return false;
    if (x->hash != y->hash || x->kind != y->kind || x->value != y->value || x->name != y->name ||
        !(x->exponent == y->exponent))
      return false;
    if (known.count({x, y})) return true;
    for (int i = 0; i < 2; ++i)
      if (!eq(x->args[i].get(), y->args[i].get())) return false;
    known.insert({x, y});
    return true;
  };
  return eq(a.node(), b.node());
}

// ---------------------------------------------------------------------------------------
// Printing

namespace {

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case ExprKind::Constant:
      return n.value < 0.0 ? 3 : 5;
    case ExprKind::Add:
    case ExprKind::Subtract:
      return 1;
    case ExprKind::Multiply:
    case ExprKind::Divide:
      return 2;
    case ExprKind::Negate:
      return 3;
    case ExprKind::Power:
      return 4;
    default:
      return 5;
  }
}

bool leads_with_minus(const ExprNode& n) {
  return n.kind == ExprKind::Negate || (n.kind == ExprKind::Constant && n.value < 0.0);
}

void format_number(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

class Printer {
 public:
  explicit Printer(std::size_t cap) : cap_(cap) {}

  void print(const ExprNode& n, int min_prec, bool right_operand) {
    if (out.size() > cap_) return;
    const bool paren = precedence(n) < min_prec || (right_operand && leads_with_minus(n));
    if (paren) out += '(';
    body(n);
    if (paren) out += ')';
  }

  std::string out;

 private:
  void body(const ExprNode& n) {
    switch (n.kind) {
      case ExprKind::Constant:
        format_number(out, n.value);
        return;
      case ExprKind::Coordinate:
      case ExprKind::Parameter:
        out += n.name;
        return;
      case ExprKind::Negate:
        out += '-';
        print(*n.args[0], 3, false);
        return;
      case ExprKind::Add:
        infix(n, '+', 1, 2);
        return;
      case ExprKind::Subtract:
        infix(n, '-', 1, 2);
        return;
      case ExprKind::Multiply:
        infix(n, '*', 2, 3);
        return;
      case ExprKind::Divide:
        infix(n, '/', 2, 3);
        return;
      case ExprKind::Power:
        print(*n.args[0], 5, false);
        out += '^';
        if (n.exponent.is_integer() && n.exponent.num() >= 0) {
          out += std::to_string(n.exponent.num());
        } else {
          out += '(';
          out += to_string(n.exponent);
          out += ')';
        }
        return;
      case ExprKind::Sqrt:
        call("sqrt", n);
        return;
      case ExprKind::Exp:
        call("exp", n);
        return;
      case ExprKind::Log:
        call("ln", n);
        return;
      case ExprKind::Sin:
        call("sin", n);
        return;
      case ExprKind::Cos:
        call("cos", n);
        return;
    }
  }

  void infix(const ExprNode& n, char op, int left_prec, int right_prec) {
    print(*n.args[0], left_prec, false);
    out += op;
    print(*n.args[1], right_prec, true);
  }

  void call(const char* name, const ExprNode& n) {
    out += name;
    out += '(';
    print(*n.args[0], 0, false);
    out += ')';
  }

  std::size_t cap_;
};

}  // namespace

std::string to_string(const Expr& e) {
  Printer p(static_cast<std::size_t>(-1));
  p.print(*e.node(), 0, false);
  return std::move(p.out);
}

// Bounded form for diagnostics; derived expressions can be large when expanded as trees.
std::string abbreviated(const Expr& e, std::size_t cap) {
  Printer p(cap);
  p.print(*e.node(), 0, false);
  if (p.out.size() > cap) {
    p.out.resize(cap);
    p.out += "...";
  }
  return std::move(p.out);
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

namespace {

template <typename Fn>
void visit_dag(const Expr& e, Fn&& fn) {
  std::unordered_set<const ExprNode*> seen;
  std::vector<const ExprNode*> stack{e.node()};
  while (!stack.empty()) {
    const ExprNode* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    fn(*n);
    for (const auto& a : n->args)
      if (a) stack.push_back(a.get());
  }
}

}  // namespace

std::set<std::string> coordinates_in(const Expr& e) {
  std::set<std::string> out;
  visit_dag(e, [&](const ExprNode& n) {
    if (n.kind == ExprKind::Coordinate) out.insert(n.name);
  });
  return out;
}

std::set<std::string> parameters_in(const Expr& e) {
  std::set<std::string> out;
  visit_dag(e, [&](const ExprNode& n) {
    if (n.kind == ExprKind::Parameter) out.insert(n.name);
  });
  return out;
}

std::size_t dag_size(const Expr& e) {
  std::size_t count = 0;
  visit_dag(e, [&](const ExprNode&) { ++count; });
  return count;
}

// ---------------------------------------------------------------------------------------
// Differentiation

Expr Differentiator::operator()(const Expr& e) {
  auto it = memo_.find(e.node());
  if (it != memo_.end()) return it->second.second;

  Expr d;
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Parameter:
      break;
    case ExprKind::Coordinate:
      d = Expr(e.name() == var_ ? 1.0 : 0.0);
      break;
    case ExprKind::Negate:
      d = -(*this)(e.arg(0));
      break;
    case ExprKind::Add:
      d = (*this)(e.arg(0)) + (*this)(e.arg(1));
      break;
    case ExprKind::Subtract:
      d = (*this)(e.arg(0)) - (*this)(e.arg(1));
      break;
    case ExprKind::Multiply: {
      const Expr a = e.arg(0), b = e.arg(1);
      d = (*this)(a) * b + a * (*this)(b);
      break;
    }
    case ExprKind::Divide: {
      const Expr a = e.arg(0), b = e.arg(1);
      const Expr da = (*this)(a), db = (*this)(b);
      d = da / b - a * db / pow(b, Rational(2));
      break;
    }
    case ExprKind::Power: {
      const Expr a = e.arg(0);
      const Rational r = e.exponent();
      d = Expr(r.value()) * pow(a, r - Rational(1)) * (*this)(a);
      break;
    }
    case ExprKind::Sqrt:
      d = (*this)(e.arg(0)) / (Expr(2.0) * e);
      break;
    case ExprKind::Exp:
      d = e * (*this)(e.arg(0));
      break;
    case ExprKind::Log:
      d = (*this)(e.arg(0)) / e.arg(0);
      break;
    case ExprKind::Sin:
      d = cos(e.arg(0)) * (*this)(e.arg(0));
      break;
    case ExprKind::Cos:
      d = -(sin(e.arg(0)) * (*this)(e.arg(0)));
      break;
  }
  memo_.emplace(e.node(), std::make_pair(e, d));
  return d;
}

Expr differentiate(const Expr& e, const std::string& variable) {
  Differentiator d(variable);
  return d(e);
}

}  // namespace lorhol
