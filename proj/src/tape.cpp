#include <cmath>
#include <cstring>
#include <map>
#include <tuple>
#include <unordered_map>

#include "lorhol/expr.hpp"

namespace lorhol {

namespace {

struct InstrKey {
  ExprKind kind;
  std::int32_t a, b;
  std::uint64_t bits;
  std::int64_t num, den;
  auto tie() const { return std::tie(kind, a, b, bits, num, den); }
  bool operator<(const InstrKey& o) const { return tie() < o.tie(); }
};

}  // namespace

Tape::Tape(const std::vector<Expr>& outputs, const Coordinates& coords, const ParamEnv& env) {
  std::unordered_map<const ExprNode*, std::int32_t> slot_of;
  std::map<InstrKey, std::int32_t> merged;

  auto emit = [&](Instr ins, const Expr& origin) -> std::int32_t {
    std::uint64_t bits;
    std::memcpy(&bits, &ins.value, sizeof bits);
    InstrKey key{ins.kind, ins.a, ins.b, bits, ins.exponent.num(), ins.exponent.den()};
    auto [it, fresh] = merged.emplace(key, static_cast<std::int32_t>(code_.size()));
    if (fresh) {
      code_.push_back(ins);
      origins_.push_back(origin);
    }
    return it->second;
  };

  // Iterative post-order so deep derivative chains cannot overflow the stack.
  auto compile = [&](const Expr& root) -> std::int32_t {
    std::vector<std::pair<Expr, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [e, expanded] = stack.back();
      stack.pop_back();
      if (slot_of.count(e.node())) continue;
      if (!expanded) {
        stack.push_back({e, true});
        for (int i = e.arity() - 1; i >= 0; --i) stack.push_back({e.arg(i), false});
        continue;
      }
      Instr ins;
      ins.kind = e.kind();
      switch (e.kind()) {
        case ExprKind::Constant:
          ins.value = e.value();
          break;
        case ExprKind::Parameter: {
          auto it = env.find(e.name());
          if (it == env.end()) throw Error("unbound parameter '" + e.name() + "'");
          ins.kind = ExprKind::Constant;
          ins.value = it->second;
          break;
        }
        case ExprKind::Coordinate: {
          std::int32_t idx = -1;
          for (std::int32_t i = 0; i < 4; ++i)
            if (coords[static_cast<std::size_t>(i)] == e.name()) idx = i;
          if (idx < 0) throw Error("undeclared coordinate '" + e.name() + "'");
          ins.a = idx;
          break;
        }
        case ExprKind::Power:
          ins.a = slot_of.at(e.arg(0).node());
          ins.exponent = e.exponent();
          ins.value = e.exponent().value();
          break;
        default:
          ins.a = slot_of.at(e.arg(0).node());
          if (e.arity() == 2) ins.b = slot_of.at(e.arg(1).node());
          break;
      }
      slot_of[e.node()] = emit(ins, e);
    }
    return slot_of.at(root.node());
  };

  outputs_.reserve(outputs.size());
  for (const auto& e : outputs) outputs_.push_back(compile(e));
}

void Tape::evaluate(const Point& x, double* out) const {
  thread_local std::vector<double> slots;
  slots.resize(code_.size());
  const std::size_t n = code_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Instr& ins = code_[i];
    const double a = ins.a >= 0 && ins.kind != ExprKind::Coordinate ? slots[static_cast<std::size_t>(ins.a)] : 0.0;
    const double b = ins.b >= 0 ? slots[static_cast<std::size_t>(ins.b)] : 0.0;
    double r = 0.0;
    const char* problem = nullptr;
    switch (ins.kind) {
      case ExprKind::Constant:
      case ExprKind::Parameter:
        r = ins.value;
        break;
      case ExprKind::Coordinate:
        r = x[ins.a];
        break;
      case ExprKind::Negate:
        r = -a;
        break;
      case ExprKind::Add:
        r = a + b;
        break;
      case ExprKind::Subtract:
        r = a - b;
        break;
      case ExprKind::Multiply:
        r = a * b;
        break;
      case ExprKind::Divide:
        if (b == 0.0) problem = "division by zero";
        r = a / b;
        break;
      case ExprKind::Power: {
        const Rational& e = ins.exponent;
        if (a == 0.0 && e.num() < 0) {
          problem = "division by zero";
        } else if (a < 0.0 && !e.is_integer()) {
          if (e.den() % 2 == 0) problem = "even root of negative value";
          r = std::pow(-a, ins.value);
          if (e.num() % 2 != 0) r = -r;
          break;
        }
        if (e.is_integer() && e.num() == 2)
          r = a * a;
        else
          r = std::pow(a, ins.value);
        break;
      }
      case ExprKind::Sqrt:
        if (a < 0.0) problem = "square root of negative value";
        r = std::sqrt(a);
        break;
      case ExprKind::Exp:
        r = std::exp(a);
        break;
      case ExprKind::Log:
        if (a <= 0.0) problem = "logarithm of non-positive value";
        r = std::log(a);
        break;
      case ExprKind::Sin:
        r = std::sin(a);
        break;
      case ExprKind::Cos:
        r = std::cos(a);
        break;
    }
    if (!problem && !std::isfinite(r)) problem = "non-finite value";
    if (problem) throw DomainError(problem, abbreviated(origins_[i]));
    slots[i] = r;
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) out[k] = slots[static_cast<std::size_t>(outputs_[k])];
}

std::vector<double> Tape::evaluate(const Point& x) const {
  std::vector<double> out(outputs_.size());
  evaluate(x, out.data());
  return out;
}

double eval_expr(const Expr& e, const Coordinates& coords, const Point& x, const ParamEnv& env) {
  Tape t({e}, coords, env);
  double v;
  t.evaluate(x, &v);
  return v;
}

}  // namespace lorhol
