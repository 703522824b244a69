#pragma once

// Curvature tensors of prescribed algebraic type at a point, built from a random null tetrad
// in a random (non-orthonormal) coordinate basis. The construction is the oracle.

#include <random>

#include "lorhol/bivector.hpp"
#include "lorhol/holonomy.hpp"
#include "lorhol/metric.hpp"
#include "oracles.hpp"

namespace oracle {

using lorhol::Bivector;
using lorhol::MetricContextPtr;
using lorhol::Vector4d;

struct Tetrad {
  Matrix4d g;
  MetricContextPtr ctx;
  Vector4d l, n, x, y;  // l·n = 1, x·x = y·y = 1, all other products 0
  Vector4d u() const;   // timelike unit (l - n)/√2 up to sign
  Vector4d z() const;   // spacelike unit (l + n)/√2
};

// Random Lorentz transformation Λ (Λᵀ η Λ = η) as the exponential of a random generator.
Matrix4d random_lorentz(std::mt19937_64& rng, double size = 0.6);

// Random coordinate basis (tetrad components = columns of a random well-conditioned matrix),
// optionally followed by a random Lorentz rotation of the orthonormal frame.
Tetrad random_tetrad(std::mt19937_64& rng, bool boost = true);
Tetrad minkowski_tetrad();

// R_abcd = Σ_k α_k F^k_ab F^k_cd
Tensor4d curvature_from_squares(const std::vector<std::pair<double, Bivector>>& terms);
// K (g_ac g_bd - g_ad g_bc)
Tensor4d constant_curvature(const Matrix4d& g, double k);

// Random magnitude in ±[0.5, 2].
double random_coefficient(std::mt19937_64& rng);

// random_tetrad with ε(l, n, x, y) > 0.
Tetrad oriented_tetrad(std::mt19937_64& rng);

// Basis of each table algebra R2..R15 in the tetrad, with the directions it must annihilate
// and its recurrent directions.
struct TableRow {
  lorhol::HolonomyType type;
  std::vector<Bivector> basis;
  std::vector<Vector4d> constant;
  std::vector<Vector4d> recurrent;
};
std::vector<TableRow> holonomy_table(const Tetrad& t, double omega);

}  // namespace oracle
