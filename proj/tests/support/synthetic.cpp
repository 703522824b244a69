#include "synthetic.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

namespace {
const Matrix4d kEta = Eigen::Vector4d(-1, 1, 1, 1).asDiagonal();
}

Vector4d Tetrad::u() const { return (l - n) / std::sqrt(2.0); }
Vector4d Tetrad::z() const { return (l + n) / std::sqrt(2.0); }

Matrix4d random_lorentz(std::mt19937_64& rng, double size) {
  Matrix4d a = Matrix4d::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      a(i, j) = uniform(rng, -size, size);
      a(j, i) = -a(i, j);
    }
  const Matrix4d k = kEta * a;
  return k.exp();
}

static Tetrad from_frame(const Matrix4d& t) {
  Tetrad out;
  const Matrix4d ti = t.inverse();
  out.g = ti.transpose() * kEta * ti;
  out.g = 0.5 * (out.g + out.g.transpose());
  out.ctx = lorhol::make_context(out.g);
  const Vector4d e0 = t.col(0), e1 = t.col(1);
  out.l = (e0 + e1) / std::sqrt(2.0);
  out.n = (e1 - e0) / std::sqrt(2.0);
  out.x = t.col(2);
  out.y = t.col(3);
  return out;
}

Tetrad random_tetrad(std::mt19937_64& rng, bool boost) {
  Matrix4d t;
  for (;;) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) t(i, j) = (i == j ? 1.0 : 0.0) + uniform(rng, -0.4, 0.4);
    Eigen::JacobiSVD<Matrix4d> svd(t);
    const auto s = svd.singularValues();
    if (s(3) > 0.2 && s(0) / s(3) < 12.0) break;
  }
  if (boost) t = t * random_lorentz(rng);
  return from_frame(t);
}

Tetrad minkowski_tetrad() { return from_frame(Matrix4d::Identity()); }

Tensor4d curvature_from_squares(const std::vector<std::pair<double, Bivector>>& terms) {
  Tensor4d r;
  r.setZero();
  for (const auto& [alpha, f] : terms) {
    const Matrix4d low = f.lower();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) r(a, b, c, d) += alpha * low(a, b) * low(c, d);
  }
  return r;
}

Tensor4d constant_curvature(const Matrix4d& g, double k) {
  Tensor4d r;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) r(a, b, c, d) = k * (g(a, c) * g(b, d) - g(a, d) * g(b, c));
  return r;
}

double random_coefficient(std::mt19937_64& rng) {
  const double m = uniform(rng, 0.5, 2.0);
  return (rng() & 1U) ? m : -m;
}

Tetrad oriented_tetrad(std::mt19937_64& rng) {
  auto t = random_tetrad(rng);
  Matrix4d m;
  m << t.l, t.n, t.x, t.y;
  if (m.determinant() < 0) t.y = -t.y;
  return t;
}

std::vector<TableRow> holonomy_table(const Tetrad& t, double omega) {
  using lorhol::HolonomyType;
  auto w = [&](const Vector4d& a, const Vector4d& b) { return Bivector::wedge(t.ctx, a, b); };
  const Vector4d &l = t.l, &n = t.n, &x = t.x, &y = t.y;
  const Vector4d u = t.u(), z = t.z();
  return {
      {HolonomyType::R2, {w(l, n)}, {x, y}, {l, n}},
      {HolonomyType::R3, {w(l, x)}, {l, y}, {}},
      {HolonomyType::R4, {w(x, y)}, {l, n}, {}},
      {HolonomyType::R5, {w(l, n) + omega * w(x, y)}, {}, {l, n}},
      {HolonomyType::R6, {w(l, n), w(l, x)}, {y}, {l}},
      {HolonomyType::R7, {w(l, n), w(x, y)}, {}, {l, n}},
      {HolonomyType::R8, {w(l, x), w(l, y)}, {l}, {}},
      {HolonomyType::R9, {w(l, n), w(l, x), w(l, y)}, {}, {l}},
      {HolonomyType::R10, {w(l, n), w(l, x), w(n, x)}, {y}, {}},
      {HolonomyType::R11, {w(l, x), w(l, y), w(x, y)}, {l}, {}},
      {HolonomyType::R12, {w(l, x), w(l, y), w(l, n) + omega * w(x, y)}, {}, {l}},
      {HolonomyType::R13, {w(x, y), w(y, z), w(x, z)}, {u}, {}},
      {HolonomyType::R14, {w(l, n), w(l, x), w(l, y), w(x, y)}, {}, {l}},
      {HolonomyType::R15, {w(l, n), w(l, x), w(l, y), w(n, x), w(n, y), w(x, y)}, {}, {}},
  };
}

}  // namespace oracle
