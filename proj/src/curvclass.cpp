#include "lorhol/curvclass.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lorhol/errors.hpp"
#include "lorhol/linalg.hpp"

namespace lorhol {

namespace {

// Relative tolerance for structural checks on already-decided spans (dual closure, etc.).
constexpr double kStructTol = 1e-6;

Eigen::MatrixXd columns(const std::vector<Bivector>& bs) {
  Eigen::MatrixXd m(6, static_cast<Eigen::Index>(bs.size()));
  for (std::size_t i = 0; i < bs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = bs[i].components();
  return m;
}

// Polarized Pfaffian: pf(P, Q) with pf(F, F) = Pf(F).
double pfaffian_pair(const Vector6d& p, const Vector6d& q) {
  return 0.5 * (p[0] * q[5] + q[0] * p[5] - p[1] * q[4] - q[1] * p[4] + p[2] * q[3] + q[2] * p[3]);
}

// Simple elements of a 2-dimensional span (zero set of the Pfaffian quadratic form).
std::vector<Bivector> simple_elements(const Bivector& p, const Bivector& q) {
  std::vector<Bivector> out;
  Eigen::Matrix2d form;
  form << pfaffian(p), pfaffian_pair(p.components(), q.components()), pfaffian_pair(p.components(), q.components()),
      pfaffian(q);
  const double scale = p.components().squaredNorm() + q.components().squaredNorm();
  if (form.cwiseAbs().maxCoeff() <= kStructTol * scale) {  // every element simple
    out.push_back(p);
    out.push_back(q);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(form);
  const double l1 = es.eigenvalues()[0], l2 = es.eigenvalues()[1];
  const double tol = kStructTol * std::max(std::abs(l1), std::abs(l2));
  if (l1 > tol || l2 < -tol) return out;  // definite: no simple element
  const Eigen::Vector2d e1 = es.eigenvectors().col(0), e2 = es.eigenvectors().col(1);
  const double a = std::sqrt(std::max(l2, 0.0)), b = std::sqrt(std::max(-l1, 0.0));
  for (const double sign : {1.0, -1.0}) {
    const Eigen::Vector2d w = a * e1 + sign * b * e2;
    if (w.norm() == 0.0) continue;
    out.push_back(w[0] * p + w[1] * q);
    if (b == 0.0) break;
  }
  return out;
}

Eigen::Matrix<double, 16, 1> flatten(const Matrix4d& m) { return Eigen::Map<const Eigen::Matrix<double, 16, 1>>(m.data()); }

int expected_theorem1_dimension(CurvatureClass c) {
  switch (c) {
    case CurvatureClass::A: return 1;
    case CurvatureClass::B: return 2;
    case CurvatureClass::C: return 2;
    case CurvatureClass::D: return 4;
    case CurvatureClass::O: return 10;
  }
  return -1;
}

std::string describe(const Eigen::VectorXd& sv) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < sv.size(); ++i) os << (i ? ", " : "") << sv[i];
  os << "]";
  return os.str();
}

}  // namespace

const char* to_string(CurvatureClass c) {
  switch (c) {
    case CurvatureClass::A: return "A";
    case CurvatureClass::B: return "B";
    case CurvatureClass::C: return "C";
    case CurvatureClass::D: return "D";
    case CurvatureClass::O: return "O";
  }
  return "?";
}

std::vector<Vector4d> kernel_vectors(const PointFrame& frame, double svd_tol, double* margin) {
  Eigen::Matrix<double, 24, 4> m;
  for (int i = 0; i < 6; ++i)
    for (int c = 0; c < 4; ++c)
      for (int d = 0; d < 4; ++d) {
        const auto [a, b] = kBivectorBasis[static_cast<std::size_t>(i)];
        m(4 * i + c, d) = frame.riemann_down(a, b, c, d);
      }
  const auto split = svd_split(m, svd_tol);
  if (margin) *margin = split.margin;
  std::vector<Vector4d> out;
  for (Eigen::Index j = 0; j < split.kernel.cols(); ++j) out.emplace_back(split.kernel.col(j));
  return out;
}

CurvatureClassReport classify_curvature(const PointFrame& frame, const ClassifyOptions& options) {
  CurvatureClassReport rep;
  const double rmax = max_abs<double, 4>(frame.riemann_down);
  const double gmax = frame.g.cwiseAbs().maxCoeff();
  const double scale = options.curvature_scale > 0 ? options.curvature_scale : 1.0;
  if (rmax < options.zero_tol * std::max(1.0, gmax * gmax * scale)) {
    rep.cls = CurvatureClass::O;
    for (int i = 0; i < 4; ++i) rep.kernel.push_back(Vector4d::Unit(i));
    return rep;
  }

  double kmargin = 0.0;
  rep.kernel = kernel_vectors(frame, options.svd_tol, &kmargin);
  const CurvatureMap map = curvature_map_matrix(frame, options.svd_tol);
  rep.range = map.range;
  rep.range_dim = map.rank;
  rep.margin = std::max(kmargin, map.margin);

  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << "curvature classification failed: " << what << " (kernel dim " << rep.kernel.size() << ", range dim "
       << rep.range_dim << ", curvature-map singular values " << describe(map.singular_values) << ")";
    throw ClassificationError(os.str());
  };

  switch (rep.kernel.size()) {
    case 2: {
      if (rep.range_dim != 1) fail("two kernel vectors need a one-dimensional range");
      const auto c = classify_bivector(rep.range[0]);
      if (c.kind == BivectorKind::NonSimple || c.kind == BivectorKind::Zero) fail("class D bivector is not simple");
      rep.cls = CurvatureClass::D;
      rep.d_bivector = rep.range[0];
      rep.d_kind = c.kind;
      return rep;
    }
    case 1:
      if (rep.range_dim < 2 || rep.range_dim > 3) fail("one kernel vector needs a range of dimension 2 or 3");
      rep.cls = CurvatureClass::C;
      rep.c_direction = rep.kernel[0];
      return rep;
    case 0: {
      rep.cls = CurvatureClass::A;
      if (rep.range_dim != 2) return rep;
      const Eigen::MatrixXd q = columns(rep.range);
      bool closed = true;
      for (const auto& f : rep.range) {
        const Vector6d d = hodge_dual(f).components();
        if (span_residual(q, d) > kStructTol * d.norm()) closed = false;
      }
      if (!closed) return rep;
      for (const auto& s : simple_elements(rep.range[0], rep.range[1])) {
        if (classify_bivector(s, kStructTol).kind != BivectorKind::SimpleTimelike) continue;
        rep.cls = CurvatureClass::B;
        const Bivector f = (1.0 / s.components().norm()) * s;
        rep.b_pair = std::make_pair(f, hodge_dual(f));
        break;
      }
      return rep;
    }
    default:
      fail("kernel dimension 3 or 4 with non-zero curvature");
  }
  return rep;
}

std::vector<Matrix4d> canonical_symmetric_span(const PointFrame& frame, const CurvatureClassReport& report) {
  const Matrix4d& g = frame.g;
  std::vector<Matrix4d> out{g};
  switch (report.cls) {
    case CurvatureClass::O:
      out.clear();
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
          Matrix4d e = Matrix4d::Zero();
          e(a, b) = e(b, a) = 1.0;
          out.push_back(e);
        }
      break;
    case CurvatureClass::A:
      break;
    case CurvatureClass::B: {
      const auto c = classify_bivector(report.b_pair->first, kStructTol);
      if (!c.blade) throw ClassificationError("class B bivector has no blade");
      Eigen::Matrix<double, 4, 2> bl;
      bl.col(0) = c.blade->first;
      bl.col(1) = c.blade->second;
      const Eigen::Matrix2d gram = bl.transpose() * g * bl;
      out.push_back(g * bl * gram.inverse() * bl.transpose() * g);
      break;
    }
    case CurvatureClass::C: {
      const Vector4d r = g * *report.c_direction;
      out.push_back(r * r.transpose());
      break;
    }
    case CurvatureClass::D: {
      const Vector4d u = g * report.kernel[0], v = g * report.kernel[1];
      out.push_back(u * u.transpose());
      out.push_back(v * v.transpose());
      out.push_back(u * v.transpose() + v * u.transpose());
      break;
    }
  }
  return out;
}

Theorem1Solution solve_theorem1(const PointFrame& frame, const CurvatureClassReport& report, double svd_tol) {
  Theorem1Solution sol;
  sol.cls = report.cls;
  sol.expected_dimension = expected_theorem1_dimension(report.cls);

  // Unknowns: orthonormal symmetric basis E_pq (off-diagonal scaled by 1/√2).
  std::vector<Matrix4d> unknowns;
  for (int p = 0; p < 4; ++p)
    for (int q = p; q < 4; ++q) {
      Matrix4d e = Matrix4d::Zero();
      const double w = p == q ? 1.0 : 1.0 / std::sqrt(2.0);
      e(p, q) = e(q, p) = w;
      unknowns.push_back(e);
    }
  Eigen::Matrix<double, 60, 10> m;
  for (int j = 0; j < 10; ++j) {
    const Matrix4d& h = unknowns[static_cast<std::size_t>(j)];
    int row = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b)
        for (int k = 0; k < 6; ++k) {
          const auto [c, d] = kBivectorBasis[static_cast<std::size_t>(k)];
          double s = 0.0;
          for (int e = 0; e < 4; ++e) s += h(a, e) * frame.riemann_up(e, b, c, d) + h(b, e) * frame.riemann_up(e, a, c, d);
          m(row++, j) = s;
        }
  }
  const auto split = report.cls == CurvatureClass::O ? svd_split(Eigen::Matrix<double, 60, 10>::Zero(), svd_tol)
                                                     : svd_split(m, svd_tol);
  sol.margin = split.margin;
  sol.dimension = static_cast<int>(split.kernel.cols());
  for (Eigen::Index k = 0; k < split.kernel.cols(); ++k) {
    Matrix4d h = Matrix4d::Zero();
    for (int j = 0; j < 10; ++j) h += split.kernel(j, k) * unknowns[static_cast<std::size_t>(j)];
    sol.basis.push_back(h);
  }
  if (sol.dimension != sol.expected_dimension) {
    std::ostringstream os;
    os << "constrained symmetric tensors: dimension " << sol.dimension << " but class " << to_string(report.cls)
       << " requires " << sol.expected_dimension << " (singular values " << describe(split.singular_values) << ")";
    throw ClassificationError(os.str());
  }

  const auto canon = canonical_symmetric_span(frame, report);
  Eigen::MatrixXd c(16, static_cast<Eigen::Index>(canon.size()));
  for (std::size_t i = 0; i < canon.size(); ++i) c.col(static_cast<Eigen::Index>(i)) = flatten(canon[i]);
  const auto cs = svd_split(c, 1e-12);
  for (const auto& h : sol.basis) {
    const auto v = flatten(h);
    sol.canonical_residual = std::max(sol.canonical_residual, span_residual(cs.range, v) / v.norm());
  }
  return sol;
}

Theorem1Solution solve_theorem1(const PointFrame& frame, const ClassifyOptions& options) {
  return solve_theorem1(frame, classify_curvature(frame, options), options.svd_tol);
}

}  // namespace lorhol
