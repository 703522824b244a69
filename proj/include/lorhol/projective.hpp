#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lorhol/curvclass.hpp"
#include "lorhol/metric.hpp"

namespace lorhol {

using OneForm = std::array<Expr, 4>;

// Sinyukov data on a base metric: symmetric a_ab and the 1-form λ_a (unset means "take the
// gradient of ½ g^ab a_ab").
struct SinyukovPair {
  MetricSpec base;
  ExprMatrix a;
  std::optional<OneForm> lambda;
};

struct ProjectivePair {
  MetricSpec g;
  MetricSpec g_prime;
  OneForm psi;
  std::optional<Expr> chi;
};

// λ_a = ∂_a(½ g^ab a_ab), symbolic.
OneForm lambda_from_trace(const SinyukovPair& pair);
OneForm resolved_lambda(const SinyukovPair& pair);

// Symbolic cofactor expansion.
Expr determinant(const ExprMatrix& m);
ExprMatrix adjugate(const ExprMatrix& m);

struct SkippedPoint {
  std::size_t index = 0;
  std::string reason;
};

// Per-point normalized residuals; points where evaluation fails are listed in `skipped`.
struct ResidualReport {
  double max = 0.0;
  std::vector<double> per_point;  // NaN at skipped points
  std::vector<SkippedPoint> skipped;
};

// max |a_ab;c - g_ac λ_b - g_bc λ_a| / max|a|, plus the curl of λ.
struct SinyukovReport {
  ResidualReport residual;
  double curl = 0.0;  // max |∂_a λ_b - ∂_b λ_a|
};
SinyukovReport sinyukov_residual(const SinyukovPair& pair, const std::vector<Point>& points);

struct InvertOptions {
  double tol = 1e-8;
};

// (a, λ) -> (g', ψ, χ) with χ = -½ ln|det a / det g|, ψ_a = -g_ac (a^-1)^cd λ_d and
// g'_ab = e^{2χ} g_ac (a^-1)^cd g_db. dχ = ψ and ∇''a = 0 (Γ'' = Γ - ψ^a g_bc) are asserted
// at the check points; ConsistencyError when they fail.
ProjectivePair invert_pair(const SinyukovPair& pair, const std::vector<Point>& check_points,
                           const InvertOptions& options = {});

// The inverse map: a = e^{2χ} g g'^-1 g and λ = -a ψ (with the index raised by g).
struct SinyukovValues {
  Matrix4d a;
  Vector4d lambda;
};
SinyukovValues forward_map(const ProjectivePair& pair, const Point& x);

// ψ together with ∂ψ at a point; dpsi(a, b) = ∂_b ψ_a.
struct PsiSample {
  Vector4d psi = Vector4d::Zero();
  Matrix4d dpsi = Matrix4d::Zero();
};

class PsiField {
 public:
  PsiField();  // identically zero
  static PsiField from_exprs(const OneForm& psi, const Coordinates& coords, const ParamEnv& env);
  // ψ_b = (Γ'^a_ba - Γ^a_ba)/5 and its first derivatives, numerically from both metrics.
  static PsiField from_connections(const MetricSpec& g, const MetricSpec& g_prime);
  static PsiField from_function(std::function<PsiSample(const Point&)> fn);

  PsiSample at(const Point& x) const { return fn_(x); }

 private:
  std::function<PsiSample(const Point&)> fn_;
};

Vector4d psi_from_connections(const MetricSpec& g, const MetricSpec& g_prime, const Point& x);

// max |g'_ab;c - 2 g'_ab ψ_c - g'_ac ψ_b - g'_bc ψ_a| / max|g'|, ∇ of g.
ResidualReport projective_residual(const MetricSpec& g, const MetricSpec& g_prime, const PsiField& psi,
                                   const std::vector<Point>& points);

// ψ_ab = ψ_a;b - ψ_a ψ_b from a sample and the Christoffel symbols of g.
Matrix4d psi_ab(const PsiSample& s, const Tensor3d& christoffel);

// R' - R - δ^a_d ψ_bc + δ^a_c ψ_bd and R'_ab - R_ab + 3ψ_ab, each normalized by the
// largest of max|R|, max|R'|, max|ψ_ab| at the point.
struct CurvatureRelationReport {
  ResidualReport full;
  ResidualReport ricci;
};
CurvatureRelationReport curvature_relation_residual(const MetricSpec& g, const MetricSpec& g_prime, const PsiField& psi,
                                                    const std::vector<Point>& points);

// W^a_bcd = R^a_bcd + ⅓(δ^a_d R_bc - δ^a_c R_bd).
Tensor4d weyl_projective_at(const PointFrame& frame);
// Max-abs |W - W'| per point (absolute).
ResidualReport weyl_projective_equal(const MetricSpec& g, const MetricSpec& g_prime, const std::vector<Point>& points);

struct Lemma1Report {
  double c = 0.0;             // best-fit constant in λ_a;b = c g_ab
  double residual_a = 0.0;    // |λ_a;b - c g_ab| / max(|λ_ab|, |c||g|)
  double residual_b = 0.0;    // |λ_d R^d_abc| / (max|λ| max|R|)
  double residual_c = 0.0;    // |a_ae R^e_bcd + a_be R^e_acd| / (max|a| max|R|)
  std::vector<CurvatureClass> classes;
  bool class_c_or_d = true;
  std::vector<SkippedPoint> skipped;
};
Lemma1Report lemma1_checks(const SinyukovPair& pair, const std::vector<Point>& points);

// --- pre-geodesic test ---------------------------------------------------------------------

struct GeodesicOptions {
  int trials = 20;
  int steps = 2000;
  double horizon = 1.0;
  std::uint64_t seed = 7;
  std::optional<SampleBox> box;
  double speed = 0.25;  // initial velocity components are uniform in ±speed·(box width)
};

struct GeodesicTrial {
  Point start = Point::Zero();
  Vector4d velocity = Vector4d::Zero();
  int steps_completed = 0;
  double score = 0.0;
  std::optional<std::string> truncated;  // reason, when the trial stopped early
};

struct GeodesicReport {
  double score = 0.0;
  std::vector<GeodesicTrial> trials;
};

// Integrates geodesics of g with RK4 and scores how far the g'-acceleration of each path is
// from being parallel to its velocity: |A'∧ẋ| / (|ẋ|(|ẍ| + |Γ'ẋẋ| + |ẋ|²/L) + ε), Euclidean
// norms, L the largest side of the sample box.
GeodesicReport pregeodesic_check(const MetricSpec& g, const MetricSpec& g_prime, const GeodesicOptions& options = {});

}  // namespace lorhol
