#include "lorhol/bivector.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "lorhol/errors.hpp"
#include "lorhol/linalg.hpp"

namespace lorhol {

MetricContextPtr make_context(const Matrix4d& g, int orientation) {
  check_nondegenerate(g);
  auto ctx = std::make_shared<MetricContext>();
  ctx->g = 0.5 * (g + g.transpose());
  ctx->g_inv = ctx->g.inverse();
  ctx->volume = std::sqrt(std::abs(ctx->g.determinant()));
  ctx->orientation = orientation >= 0 ? 1 : -1;
  return ctx;
}

MetricContextPtr context_of(const PointFrame& frame) { return make_context(frame.g); }

bool same_metric(const MetricContext& a, const MetricContext& b) {
  if (&a == &b) return true;
  const double scale = std::max(a.g.cwiseAbs().maxCoeff(), b.g.cwiseAbs().maxCoeff());
  return (a.g - b.g).cwiseAbs().maxCoeff() <= 1e-12 * scale && a.orientation == b.orientation;
}

Bivector::Bivector(MetricContextPtr ctx, const Vector6d& components) : ctx_(std::move(ctx)), c_(components) {
  if (!ctx_) throw std::invalid_argument("bivector without metric context");
}

Bivector Bivector::from_upper(MetricContextPtr ctx, const Matrix4d& f) {
  Vector6d c;
  for (int i = 0; i < 6; ++i) {
    const auto [a, b] = kBivectorBasis[static_cast<std::size_t>(i)];
    c[i] = 0.5 * (f(a, b) - f(b, a));
  }
  return Bivector(std::move(ctx), c);
}

Bivector Bivector::from_mixed(MetricContextPtr ctx, const Matrix4d& f) {
  const Matrix4d up = f * ctx->g_inv;
  return from_upper(std::move(ctx), up);
}

Bivector Bivector::wedge(MetricContextPtr ctx, const Vector4d& p, const Vector4d& q) {
  return from_upper(std::move(ctx), p * q.transpose() - q * p.transpose());
}

Matrix4d Bivector::upper() const {
  Matrix4d f = Matrix4d::Zero();
  for (int i = 0; i < 6; ++i) {
    const auto [a, b] = kBivectorBasis[static_cast<std::size_t>(i)];
    f(a, b) = c_[i];
    f(b, a) = -c_[i];
  }
  return f;
}

Matrix4d Bivector::lower() const { return ctx_->g * upper() * ctx_->g; }

Matrix4d Bivector::mixed() const { return upper() * ctx_->g; }

double pfaffian(const Bivector& f) {
  const Vector6d& c = f.components();
  return c[0] * c[5] - c[1] * c[4] + c[2] * c[3];
}

double inner(const Bivector& f, const Bivector& h) {
  if (!same_metric(*f.context(), *h.context())) throw std::invalid_argument("bivectors from different metric contexts");
  return f.lower().cwiseProduct(h.upper()).sum();
}

Bivector hodge_dual(const Bivector& f) {
  const MetricContext& m = *f.context();
  const Vector6d& c = f.components();
  // ½ ε_abcd F^cd summed over c<d: each lower pair picks up its complementary pair.
  const double s = m.orientation * m.volume;
  Matrix4d low = Matrix4d::Zero();
  auto set = [&](int a, int b, double v) {
    low(a, b) = v;
    low(b, a) = -v;
  };
  set(0, 1, s * c[5]);   // ε_0123 F^23
  set(0, 2, -s * c[4]);  // ε_0213 F^13
  set(0, 3, s * c[3]);   // ε_0312 F^12
  set(1, 2, s * c[2]);   // ε_1203 F^03
  set(1, 3, -s * c[1]);  // ε_1302 F^02
  set(2, 3, s * c[0]);   // ε_2301 F^01
  return Bivector::from_upper(f.context(), m.g_inv * low * m.g_inv);
}

const char* to_string(BivectorKind k) {
  switch (k) {
    case BivectorKind::Zero: return "zero";
    case BivectorKind::SimpleTimelike: return "simple-timelike";
    case BivectorKind::SimpleSpacelike: return "simple-spacelike";
    case BivectorKind::SimpleNull: return "simple-null";
    case BivectorKind::NonSimple: return "non-simple";
  }
  return "?";
}

const char* to_string(Causal c) {
  switch (c) {
    case Causal::Timelike: return "timelike";
    case Causal::Spacelike: return "spacelike";
    case Causal::Null: return "null";
  }
  return "?";
}

Causal causal_character(const Vector4d& k, const Matrix4d& g, double tol) {
  const double q = k.dot(g * k);
  const double scale = k.squaredNorm() * g.norm();
  if (std::abs(q) <= tol * scale) return Causal::Null;
  return q < 0 ? Causal::Timelike : Causal::Spacelike;
}

Causal subspace_character(const Eigen::Matrix<double, 4, Eigen::Dynamic>& b, const Matrix4d& g, double tol) {
  const Eigen::MatrixXd gram = b.transpose() * g * b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  bool degenerate = false, negative = false;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= tol * scale) degenerate = true;
    else if (ev[i] < 0) negative = true;
  }
  if (negative) return Causal::Timelike;
  if (degenerate) return Causal::Null;
  return Causal::Spacelike;
}

namespace {

// Canonical pair from the real eigenvectors of F^a_b: for non-simple F the mixed form has
// eigenvalues ±α (timelike blade) and ±iβ (spacelike blade).
std::optional<std::pair<Bivector, Bivector>> canonical_pair(const Bivector& f) {
  const MetricContext& m = *f.context();
  Eigen::EigenSolver<Matrix4d> es(f.mixed());
  const auto& ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  Eigen::Matrix<double, 4, 2> blade;
  int found = 0;
  for (int i = 0; i < 4 && found < 2; ++i) {
    if (std::abs(ev[i].imag()) > 1e-9 * scale || std::abs(ev[i].real()) <= 1e-9 * scale) continue;
    blade.col(found++) = es.eigenvectors().col(i).real();
  }
  if (found < 2) return std::nullopt;
  const Eigen::Matrix2d gram = blade.transpose() * m.g * blade;
  if (std::abs(gram.determinant()) <= 1e-12 * gram.cwiseAbs().maxCoeff() * gram.cwiseAbs().maxCoeff())
    return std::nullopt;
  const Matrix4d p = blade * gram.inverse() * blade.transpose() * m.g;  // g-orthogonal projector
  const Bivector g_part = Bivector::from_upper(f.context(), p * f.upper() * p.transpose());
  return std::make_pair(g_part, f - g_part);
}

}  // namespace

BivectorClass classify_bivector(const Bivector& f, double tol) {
  BivectorClass out;
  const double norm = f.components().norm();
  if (norm == 0.0) return out;
  out.theta = theta(f);
  out.pfaffian = pfaffian(f);
  const Matrix4d up = f.upper(), low = f.lower();
  if (std::abs(out.pfaffian) > tol * norm * norm) {
    out.kind = BivectorKind::NonSimple;
    out.canonical_pair = canonical_pair(f);
    return out;
  }
  const double scale = up.norm() * low.norm();
  if (std::abs(out.theta) <= tol * scale) out.kind = BivectorKind::SimpleNull;
  else out.kind = out.theta < 0 ? BivectorKind::SimpleTimelike : BivectorKind::SimpleSpacelike;
  // For simple F^{ab} = p^a q^b - q^a p^b the column space of the matrix is the blade.
  Eigen::JacobiSVD<Matrix4d> svd(up, Eigen::ComputeFullU);
  const Eigen::Matrix<double, 4, 2> top = svd.matrixU().leftCols(2);
  const auto c = canonical_basis(top);
  if (c.cols() == 2) out.blade = std::make_pair(Vector4d(c.col(0)), Vector4d(c.col(1)));
  return out;
}

CurvatureMap curvature_map_matrix(const PointFrame& frame, double svd_tol) {
  CurvatureMap out;
  const MetricContextPtr ctx = context_of(frame);
  // R^{ab}_{cd} = g^{be} R^a_{ecd}
  auto r_upup = [&](int a, int b, int c, int d) {
    double s = 0.0;
    for (int e = 0; e < 4; ++e) s += frame.g_inv(b, e) * frame.riemann_up(a, e, c, d);
    return s;
  };
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const auto [a, b] = kBivectorBasis[static_cast<std::size_t>(i)];
      const auto [c, d] = kBivectorBasis[static_cast<std::size_t>(j)];
      out.matrix(i, j) = 2.0 * r_upup(a, b, c, d);
    }
  if (out.matrix.cwiseAbs().maxCoeff() == 0.0) {
    for (int j = 0; j < 6; ++j) out.kernel.emplace_back(ctx, Vector6d::Unit(j));
    return out;
  }
  const auto split = svd_split(out.matrix, svd_tol);
  out.singular_values = split.singular_values;
  out.rank = split.rank;
  out.margin = split.margin;
  for (Eigen::Index j = 0; j < split.range.cols(); ++j) out.range.emplace_back(ctx, Vector6d(split.range.col(j)));
  for (Eigen::Index j = 0; j < split.kernel.cols(); ++j) out.kernel.emplace_back(ctx, Vector6d(split.kernel.col(j)));
  return out;
}

}  // namespace lorhol
