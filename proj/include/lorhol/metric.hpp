#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "lorhol/expr.hpp"
#include "lorhol/tensor.hpp"

namespace lorhol {

struct SampleBox {
  std::array<std::pair<double, double>, 4> ranges{};
};

// A set of expressions together with lazily built, memoized symbolic partial derivatives
// compiled to tapes. Thread-safe; copies share the cache.
class DerivativeTapes {
 public:
  DerivativeTapes() = default;
  DerivativeTapes(std::vector<Expr> exprs, Coordinates coords, ParamEnv env);

  std::size_t size() const;
  const std::vector<Expr>& exprs() const;

  // Jets of every expression up to `order`.
  std::vector<Jet<double>> jets(const Point& x, int order) const;
  // Symbolic partial derivative of expression i along the sorted multi-index.
  Expr derivative(std::size_t i, const MultiIndex& m) const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

// Symmetric 4x4 field of expressions; only the lower triangle is ever read.
class SymmetricField {
 public:
  SymmetricField() = default;
  SymmetricField(const ExprMatrix& components, const Coordinates& coords, const ParamEnv& env);

  const ExprMatrix& components() const { return components_; }
  Jet<Matrix4d> jet(const Point& x, int order) const;
  Matrix4d value(const Point& x) const { return jet(x, 0).value(); }

 private:
  ExprMatrix components_;
  DerivativeTapes tapes_;
};

// 4 coordinate names, symmetric metric components, parameter bindings and domain
// constraints (each expression must be > 0 at admissible points). Immutable.
class MetricSpec {
 public:
  MetricSpec() = default;
  MetricSpec(Coordinates coords, const ExprMatrix& components, ParamEnv params,
             std::vector<Expr> constraints = {}, std::optional<SampleBox> box = {});

  const Coordinates& coordinates() const { return coords_; }
  const ExprMatrix& components() const { return field_.components(); }
  const ParamEnv& parameters() const { return params_; }
  const std::vector<Expr>& constraints() const { return constraints_; }
  const std::optional<SampleBox>& sample_box() const { return box_; }
  SymbolTable symbols() const;
  const SymmetricField& field() const { return field_; }

  // Constraints positive and every component evaluable.
  bool admissible(const Point& x) const;
  Jet<Matrix4d> metric_jet(const Point& x, int order) const { return field_.jet(x, order); }

  MetricSpec with_box(const SampleBox& box) const;

 private:
  Coordinates coords_{};
  ParamEnv params_;
  std::vector<Expr> constraints_;
  std::optional<SampleBox> box_;
  SymmetricField field_;
  std::shared_ptr<Tape> constraint_tape_;
};

// Parses each component with the spec's symbol table; `entries[a][b]` for b <= a is read.
MetricSpec make_metric(const Coordinates& coords, const ParamEnv& params,
                       const std::array<std::array<std::string, 4>, 4>& entries,
                       const std::vector<std::string>& constraints = {}, std::optional<SampleBox> box = {});
ExprMatrix parse_symmetric(const std::array<std::array<std::string, 4>, 4>& entries, const SymbolTable& symbols);

struct Signature {
  std::array<int, 4> signs{};  // sorted ascending
  bool lorentz() const { return signs == std::array<int, 4>{-1, 1, 1, 1}; }
};

struct FrameOptions {
  int riemann_derivatives = 1;  // 0: no covariant derivative of Riem, 1: first, 2: second too
  bool require_lorentz = true;
};

// Every metric-derived tensor at one point. Index order follows the written symbol,
// e.g. christoffel(a, b, c) = Γ^a_{bc}, riemann_up(a, b, c, d) = R^a_{bcd}.
struct PointFrame {
  Point point = Point::Zero();
  Matrix4d g = Matrix4d::Identity();
  Matrix4d g_inv = Matrix4d::Identity();
  double det_g = 1.0;
  Tensor3d dg;                 // ∂_c g_ab at (a, b, c)
  Tensor3d christoffel;        // Γ^a_bc
  Tensor4d christoffel_d;      // ∂_e Γ^a_bc at (a, b, c, e)
  Tensor4d riemann_up;         // R^a_bcd
  Tensor4d riemann_down;       // R_abcd
  Matrix4d ricci = Matrix4d::Zero();
  double ricci_scalar = 0.0;
  Matrix4d ricci_tracefree = Matrix4d::Zero();
  Tensor4d e_tensor;           // E^a_bcd
  Tensor4d weyl;               // C^a_bcd
  std::optional<Tensor5d> riemann_cov1;  // R^a_bcd;e
  std::optional<Tensor6d> riemann_cov2;  // R^a_bcd;ef
};

PointFrame frame_at(const MetricSpec& spec, const Point& x, const FrameOptions& options = {});

// Frame built directly from a metric and a lowered curvature tensor at a point with vanishing
// Christoffel symbols; used for algebraic studies of curvature tensors.
PointFrame frame_from_curvature(const Matrix4d& g, const Tensor4d& riemann_down);

Signature signature_at(const MetricSpec& spec, const Point& x);
Signature signature_of(const Matrix4d& g);

// Throws DegenerateMetricError when |det g| < 1e-12 (max |g_ab|)^4.
void check_nondegenerate(const Matrix4d& g);

Tensor4d weyl_conformal_at(const PointFrame& frame);
Tensor5d cov_deriv_riemann_at(const MetricSpec& spec, const Point& x);
Tensor3d cov_deriv_sym2_at(const MetricSpec& spec, const SymmetricField& field, const Point& x);

// Christoffel symbols as a jet (from a metric jet of one order higher).
Jet<Tensor3d> christoffel_jet(const Jet<Matrix4d>& metric, int order);

// Covariant derivative of a tensor jet: output order is input order minus one. `upper[s]`
// marks contravariant slots; the new index is appended last.
template <int Rank>
Jet<Tensor<double, Rank + 1>> covariant_derivative(const Jet<Tensor<double, Rank>>& t, const std::array<bool, Rank>& upper,
                                                   const Jet<Tensor3d>& gamma);

// --- sampling -----------------------------------------------------------------------------

std::uint64_t default_seed();  // LORHOL_SEED from the environment, else 7

// Uniform points in the box (default: the spec's box, else [0.5, 2]^4) that satisfy the
// domain constraints. Deterministic for a given seed; throws if none can be found.
std::vector<Point> sample_points(const MetricSpec& spec, std::size_t count, std::uint64_t seed,
                                 const std::optional<SampleBox>& box = {});

SampleBox default_box();

}  // namespace lorhol
