#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lorhol/bivector.hpp"
#include "lorhol/metric.hpp"

namespace lorhol {

// 1..15 are R1..R15 of the standard list of Lorentzian holonomy algebras.
enum class HolonomyType { R1 = 1, R2, R3, R4, R5, R6, R7, R8, R9, R10, R11, R12, R13, R14, R15, Unrecognized };
std::string to_string(HolonomyType t);

struct Direction {
  Vector4d vector;
  Causal causal = Causal::Null;
};

struct HolonomyOptions {
  double svd_tol = 1e-9;        // span decisions
  double generator_tol = 1e-10; // generators below this fraction of their order's largest are dropped
  double closure_tol = 1e-9;
};

struct HolonomyAlgebraReport {
  int dimension = 0;
  std::vector<Bivector> basis;       // canonical (2,0) basis
  std::vector<Matrix4d> mixed_basis; // the same as skew-self-adjoint F^a_b
  HolonomyType type = HolonomyType::R1;
  bool realizable = true;            // false for R5
  std::vector<Direction> constant;   // common annihilated directions
  std::vector<Direction> recurrent;  // common eigen-directions with a nonzero eigenvalue
  std::optional<double> omega;       // R12 parameter
  double skew_residual = 0.0;        // max |g F + (g F)^T| / |g F|
  double closure_residual = 0.0;     // max distance of [Fi, Fj] from the span, relative to |Fi||Fj|
  std::vector<std::string> diagnostics;
};

// Raw generators: R^a_bcd X^c Y^d (order 0), R^a_bcd;e X^c Y^d Z^e (order 1) and second
// covariant derivatives (order 2), over coordinate basis vectors X, Y, Z.
std::vector<Bivector> ihol_generators(const PointFrame& frame, int derivative_order);
std::vector<Bivector> ihol_generators(const MetricSpec& spec, const Point& x, int derivative_order);

// Matrix commutator of the mixed forms. Throws ConsistencyError for different metrics or a
// non-skew result.
Bivector lie_bracket(const Bivector& f, const Bivector& g);

// Smallest bracket-closed span containing the generators, as a canonical basis.
std::vector<Bivector> close_algebra(const std::vector<Bivector>& generators, const MetricContextPtr& ctx,
                                    const HolonomyOptions& options = {});

std::vector<Direction> constant_directions(const std::vector<Bivector>& basis, const MetricContextPtr& ctx,
                                           double tol = 1e-9);
std::vector<Direction> recurrent_directions(const std::vector<Bivector>& basis, const MetricContextPtr& ctx,
                                            double tol = 1e-8);

HolonomyAlgebraReport identify_type(const std::vector<Bivector>& basis, const MetricContextPtr& ctx,
                                    const HolonomyOptions& options = {});

// Pfaffian discriminant for 3-dimensional algebras without annihilator: Pf of the given
// representative after removing its component along the derived algebra [h, h].
double complement_pfaffian(const std::vector<Bivector>& basis, const Bivector& representative);

struct PointHolonomy {
  std::size_t index = 0;
  Point point = Point::Zero();
  std::vector<int> span_by_order;  // dimension of the generator span using orders 0..k
  HolonomyAlgebraReport report;
};

struct HolonomySurvey {
  HolonomyAlgebraReport aggregate;
  std::vector<PointHolonomy> points;
  bool types_differ = false;
  int derivative_order = 1;
  std::uint64_t seed = 7;
  std::string caveat;
};

// Per-point algebras plus the closed union of all generators (coordinate components, closed
// with the first sample point's metric).
HolonomySurvey holonomy_survey(const MetricSpec& spec, std::size_t count, std::uint64_t seed, int derivative_order = 1,
                               const std::optional<SampleBox>& box = {}, const HolonomyOptions& options = {});

}  // namespace lorhol
