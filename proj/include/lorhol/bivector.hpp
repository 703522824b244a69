#pragma once

#include <array>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "lorhol/metric.hpp"
#include "lorhol/tensor.hpp"

namespace lorhol {

// Metric at a point, shared by the bivectors living there. orientation = ±1 selects the sign
// of ε_0123 = orientation · sqrt|det g| in the chart's coordinate order.
struct MetricContext {
  Matrix4d g;
  Matrix4d g_inv;
  double volume = 1.0;
  int orientation = 1;
};
using MetricContextPtr = std::shared_ptr<const MetricContext>;

MetricContextPtr make_context(const Matrix4d& g, int orientation = 1);
MetricContextPtr context_of(const PointFrame& frame);
bool same_metric(const MetricContext& a, const MetricContext& b);

// Basis order of the 6 independent components F^{ab}, a < b.
inline constexpr std::array<std::pair<int, int>, 6> kBivectorBasis{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// Antisymmetric (2,0) tensor F^{ab}. Stored as its 6 independent components, so
// F^{ab} = -F^{ba} holds exactly.
class Bivector {
 public:
  Bivector(MetricContextPtr ctx, const Vector6d& components);

  static Bivector zero(MetricContextPtr ctx) { return Bivector(std::move(ctx), Vector6d::Zero()); }
  // Antisymmetric part of the given (2,0) matrix.
  static Bivector from_upper(MetricContextPtr ctx, const Matrix4d& f);
  // From F^a_b; the (2,0) form is F^a_c g^{cb}.
  static Bivector from_mixed(MetricContextPtr ctx, const Matrix4d& f);
  // p ∧ q with (p ∧ q)^{ab} = p^a q^b - q^a p^b.
  static Bivector wedge(MetricContextPtr ctx, const Vector4d& p, const Vector4d& q);

  const Vector6d& components() const { return c_; }
  const MetricContextPtr& context() const { return ctx_; }
  Matrix4d upper() const;
  Matrix4d lower() const;
  Matrix4d mixed() const;  // F^a_b = F^{ac} g_{cb}

  Bivector operator+(const Bivector& o) const { return Bivector(ctx_, c_ + o.c_); }
  Bivector operator-(const Bivector& o) const { return Bivector(ctx_, c_ - o.c_); }
  Bivector operator-() const { return Bivector(ctx_, -c_); }
  friend Bivector operator*(double s, const Bivector& b) { return Bivector(b.ctx_, s * b.c_); }

 private:
  MetricContextPtr ctx_;
  Vector6d c_;
};

double pfaffian(const Bivector& f);             // F01 F23 - F02 F13 + F03 F12
double inner(const Bivector& f, const Bivector& h);  // F_ab H^ab
inline double theta(const Bivector& f) { return inner(f, f); }

Bivector hodge_dual(const Bivector& f);

enum class BivectorKind { Zero, SimpleTimelike, SimpleSpacelike, SimpleNull, NonSimple };
const char* to_string(BivectorKind k);

struct BivectorClass {
  BivectorKind kind = BivectorKind::Zero;
  double theta = 0.0;
  double pfaffian = 0.0;
  std::optional<std::pair<Vector4d, Vector4d>> blade;               // simple: spanning vectors
  std::optional<std::pair<Bivector, Bivector>> canonical_pair;      // non-simple: (G timelike, H spacelike), F = G + H
};

// tol is relative: |Pf| <= tol |F|^2 means simple, |θ| <= tol |F^..||F_..| means null.
BivectorClass classify_bivector(const Bivector& f, double tol = 1e-9);

enum class Causal { Timelike, Spacelike, Null };
const char* to_string(Causal c);
Causal causal_character(const Vector4d& k, const Matrix4d& g, double tol = 1e-9);

// Causal character of the subspace spanned by the columns of b (the induced metric's
// signature: any negative direction makes it timelike, a degenerate one null).
Causal subspace_character(const Eigen::Matrix<double, 4, Eigen::Dynamic>& b, const Matrix4d& g, double tol = 1e-9);

struct CurvatureMap {
  Matrix6d matrix = Matrix6d::Zero();  // F^{ab} -> R^{ab}_{cd} F^{cd} in kBivectorBasis components
  Vector6d singular_values = Vector6d::Zero();
  int rank = 0;
  std::vector<Bivector> kernel;
  std::vector<Bivector> range;
  double margin = 0.0;
};

CurvatureMap curvature_map_matrix(const PointFrame& frame, double svd_tol = 1e-9);

}  // namespace lorhol
