#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lorhol/bivector.hpp"
#include "lorhol/metric.hpp"

namespace lorhol {

enum class CurvatureClass { A, B, C, D, O };
const char* to_string(CurvatureClass c);

struct ClassifyOptions {
  double svd_tol = 1e-9;
  double zero_tol = 1e-10;
  // Typical curvature magnitude (e.g. max |R| over the sampled points). 0: the frame's own.
  double curvature_scale = 0.0;
};

struct CurvatureClassReport {
  CurvatureClass cls = CurvatureClass::O;
  std::vector<Vector4d> kernel;   // {k : R_abcd k^d = 0}, orthonormal in the coordinate inner product
  std::vector<Bivector> range;    // B_m
  int range_dim = 0;
  std::optional<Bivector> d_bivector;                 // class D: F with R = α F⊗F
  std::optional<BivectorKind> d_kind;                 // its causal type (θ sign)
  std::optional<Vector4d> c_direction;                // class C: r
  std::optional<std::pair<Bivector, Bivector>> b_pair;  // class B: (F, *F), F simple timelike
  // Worst SVD decision ratio among the rank decisions made (near 1: fragile).
  double margin = 0.0;
};

// Basis of the kernel of k^d -> R_abcd k^d (24x4 system).
std::vector<Vector4d> kernel_vectors(const PointFrame& frame, double svd_tol = 1e-9, double* margin = nullptr);

// Throws ClassificationError when the rank structure fits no class.
CurvatureClassReport classify_curvature(const PointFrame& frame, const ClassifyOptions& options = {});

struct Theorem1Solution {
  std::vector<Matrix4d> basis;  // symmetric h_ab
  int dimension = 0;
  int expected_dimension = 0;
  double margin = 0.0;
  // Largest distance of a solution from the class's canonical span (relative).
  double canonical_residual = 0.0;
  CurvatureClass cls = CurvatureClass::O;
};

// Solves h_ae R^e_bcd + h_be R^e_acd = 0 over symmetric h (60x10 system) and compares the
// solution space with the canonical form of the point's class. Throws ClassificationError on
// a dimension mismatch.
Theorem1Solution solve_theorem1(const PointFrame& frame, const ClassifyOptions& options = {});
Theorem1Solution solve_theorem1(const PointFrame& frame, const CurvatureClassReport& report,
                                double svd_tol = 1e-9);

// Candidate canonical span of symmetric tensors for a classified point.
std::vector<Matrix4d> canonical_symmetric_span(const PointFrame& frame, const CurvatureClassReport& report);

}  // namespace lorhol
