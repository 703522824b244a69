#include <algorithm>
#include <cstdlib>
#include <map>
#include <mutex>
#include <random>

#include "lorhol/metric.hpp"

namespace lorhol {

// ---------------------------------------------------------------------------------------
// DerivativeTapes

struct DerivativeTapes::State {
  std::vector<Expr> exprs;
  Coordinates coords;
  ParamEnv env;

  std::mutex mu;
  std::vector<Differentiator> diff;
  std::map<std::pair<std::size_t, std::size_t>, Expr> derivs;  // (expr, sorted offset)
  std::vector<std::vector<MultiIndex>> sorted;                 // sorted multi-indices per order
  std::vector<std::map<std::size_t, std::size_t>> column;      // sorted offset -> position
  std::vector<std::shared_ptr<const Tape>> tapes;

  Expr derivative_locked(std::size_t i, const MultiIndex& m) {
    if (m.size == 0) return exprs[i];
    const auto key = std::make_pair(i, Jet<double>::offset(m));
    auto it = derivs.find(key);
    if (it != derivs.end()) return it->second;
    MultiIndex parent = m;
    --parent.size;
    const Expr base = derivative_locked(i, parent);
    Expr d = diff[static_cast<std::size_t>(m[m.size - 1])](base);
    derivs.emplace(key, d);
    return d;
  }

  void ensure_order(int k) {
    while (static_cast<int>(sorted.size()) <= k) {
      const int order = static_cast<int>(sorted.size());
      std::vector<MultiIndex> list;
      std::map<std::size_t, std::size_t> col;
      for_each_multi_index(order, [&](const MultiIndex& m) {
        if (m.size != order) return;
        for (int j = 1; j < m.size; ++j)
          if (m[j] < m[j - 1]) return;
        col[Jet<double>::offset(m)] = list.size();
        list.push_back(m);
      });
      std::vector<Expr> outputs;
      outputs.reserve(exprs.size() * list.size());
      for (std::size_t i = 0; i < exprs.size(); ++i)
        for (const auto& m : list) outputs.push_back(derivative_locked(i, m));
      tapes.push_back(std::make_shared<const Tape>(outputs, coords, env));
      sorted.push_back(std::move(list));
      column.push_back(std::move(col));
    }
  }
};

DerivativeTapes::DerivativeTapes(std::vector<Expr> exprs, Coordinates coords, ParamEnv env)
    : state_(std::make_shared<State>()) {
  state_->exprs = std::move(exprs);
  state_->coords = std::move(coords);
  state_->env = std::move(env);
  for (const auto& c : state_->coords) state_->diff.emplace_back(c);
}

std::size_t DerivativeTapes::size() const { return state_ ? state_->exprs.size() : 0; }
const std::vector<Expr>& DerivativeTapes::exprs() const { return state_->exprs; }

Expr DerivativeTapes::derivative(std::size_t i, const MultiIndex& m) const {
  MultiIndex s = m;
  std::sort(s.idx.begin(), s.idx.begin() + s.size);
  std::lock_guard<std::mutex> lock(state_->mu);
  return state_->derivative_locked(i, s);
}

std::vector<Jet<double>> DerivativeTapes::jets(const Point& x, int order) const {
  const std::size_t n = size();
  std::vector<std::shared_ptr<const Tape>> tapes;
  std::vector<std::map<std::size_t, std::size_t>> columns;
  {
    std::lock_guard<std::mutex> lock(state_->mu);
    state_->ensure_order(order);
    tapes.assign(state_->tapes.begin(), state_->tapes.begin() + order + 1);
    columns.assign(state_->column.begin(), state_->column.begin() + order + 1);
  }
  std::vector<std::vector<double>> values(static_cast<std::size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) values[static_cast<std::size_t>(k)] = tapes[static_cast<std::size_t>(k)]->evaluate(x);

  std::vector<Jet<double>> out(n, Jet<double>(order, 0.0));
  for_each_multi_index(order, [&](const MultiIndex& m) {
    MultiIndex s = m;
    std::sort(s.idx.begin(), s.idx.begin() + s.size);
    const auto k = static_cast<std::size_t>(m.size);
    const std::size_t col = columns[k].at(Jet<double>::offset(s));
    const std::size_t width = columns[k].size();
    for (std::size_t i = 0; i < n; ++i) out[i][m] = values[k][i * width + col];
  });
  return out;
}

// ---------------------------------------------------------------------------------------
// SymmetricField

namespace {
constexpr std::array<std::pair<int, int>, 10> kLower = {
    {{0, 0}, {1, 0}, {1, 1}, {2, 0}, {2, 1}, {2, 2}, {3, 0}, {3, 1}, {3, 2}, {3, 3}}};
}

SymmetricField::SymmetricField(const ExprMatrix& components, const Coordinates& coords, const ParamEnv& env) {
  components_ = components;
  std::vector<Expr> lower;
  for (auto [a, b] : kLower) {
    components_(b, a) = components_(a, b);
    lower.push_back(components_(a, b));
  }
  tapes_ = DerivativeTapes(std::move(lower), coords, env);
}

Jet<Matrix4d> SymmetricField::jet(const Point& x, int order) const {
  const auto parts = tapes_.jets(x, order);
  Jet<Matrix4d> out(order, Matrix4d::Zero());
  for_each_multi_index(order, [&](const MultiIndex& m) {
    Matrix4d& v = out[m];
    for (std::size_t k = 0; k < kLower.size(); ++k) {
      auto [a, b] = kLower[k];
      v(a, b) = v(b, a) = parts[k][m];
    }
  });
  return out;
}

// ---------------------------------------------------------------------------------------
// MetricSpec

namespace {

void check_symbols(const Expr& e, const Coordinates& coords, const ParamEnv& params, const char* what) {
  for (const auto& c : coordinates_in(e))
    if (std::find(coords.begin(), coords.end(), c) == coords.end())
      throw Error(std::string(what) + " references undeclared coordinate '" + c + "'");
  for (const auto& p : parameters_in(e))
    if (!params.count(p)) throw Error(std::string(what) + " references unbound parameter '" + p + "'");
}

}  // namespace

MetricSpec::MetricSpec(Coordinates coords, const ExprMatrix& components, ParamEnv params, std::vector<Expr> constraints,
                       std::optional<SampleBox> box)
    : coords_(std::move(coords)), params_(std::move(params)), constraints_(std::move(constraints)), box_(box) {
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (coords_[i] == coords_[j]) throw Error("duplicate coordinate name '" + coords_[i] + "'");
  for (auto [a, b] : kLower) check_symbols(components(a, b), coords_, params_, "metric component");
  for (const auto& c : constraints_) check_symbols(c, coords_, params_, "constraint");
  field_ = SymmetricField(components, coords_, params_);
  if (!constraints_.empty()) constraint_tape_ = std::make_shared<Tape>(constraints_, coords_, params_);
}

SymbolTable MetricSpec::symbols() const {
  SymbolTable t;
  t.coordinates.assign(coords_.begin(), coords_.end());
  for (const auto& [k, v] : params_) t.parameters.push_back(k);
  return t;
}

bool MetricSpec::admissible(const Point& x) const {
  try {
    if (constraint_tape_) {
      const auto vals = constraint_tape_->evaluate(x);
      for (double v : vals)
        if (!(v > 0.0)) return false;
    }
    (void)field_.value(x);
  } catch (const DomainError&) {
    return false;
  }
  return true;
}

MetricSpec MetricSpec::with_box(const SampleBox& box) const {
  MetricSpec copy = *this;
  copy.box_ = box;
  return copy;
}

ExprMatrix parse_symmetric(const std::array<std::array<std::string, 4>, 4>& entries, const SymbolTable& symbols) {
  ExprMatrix m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b <= a; ++b) {
      const std::string& s = entries[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      m(a, b) = m(b, a) = s.empty() ? Expr() : parse_expr(s, symbols);
    }
  return m;
}

MetricSpec make_metric(const Coordinates& coords, const ParamEnv& params,
                       const std::array<std::array<std::string, 4>, 4>& entries,
                       const std::vector<std::string>& constraints, std::optional<SampleBox> box) {
  SymbolTable symbols;
  symbols.coordinates.assign(coords.begin(), coords.end());
  for (const auto& [k, v] : params) symbols.parameters.push_back(k);
  std::vector<Expr> cons;
  for (const auto& c : constraints) cons.push_back(parse_expr(c, symbols));
  return MetricSpec(coords, parse_symmetric(entries, symbols), params, std::move(cons), box);
}

// ---------------------------------------------------------------------------------------
// Sampling

std::uint64_t default_seed() {
  if (const char* s = std::getenv("LORHOL_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end && *end == '\0' && end != s) return v;
  }
  return 7;
}

SampleBox default_box() {
  SampleBox b;
  b.ranges.fill({0.5, 2.0});
  return b;
}

std::vector<Point> sample_points(const MetricSpec& spec, std::size_t count, std::uint64_t seed,
                                 const std::optional<SampleBox>& box) {
  const SampleBox b = box ? *box : spec.sample_box() ? *spec.sample_box() : default_box();
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Point> out;
  const std::size_t max_attempts = 1000 * std::max<std::size_t>(count, 1);
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < count; ++attempt) {
    Point x;
    for (int i = 0; i < 4; ++i) {
      const auto [lo, hi] = b.ranges[static_cast<std::size_t>(i)];
      x[i] = lo + (hi - lo) * uniform();
    }
    if (spec.admissible(x)) out.push_back(x);
  }
  if (out.empty() && count > 0) throw Error("no admissible sample points in the sample box");
  return out;
}

}  // namespace lorhol
