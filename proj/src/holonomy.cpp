#include "lorhol/holonomy.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lorhol/errors.hpp"
#include "lorhol/linalg.hpp"
#include "lorhol/parallel.hpp"

namespace lorhol {

namespace {

Eigen::MatrixXd columns(const std::vector<Bivector>& bs) {
  Eigen::MatrixXd m(6, static_cast<Eigen::Index>(bs.size()));
  for (std::size_t i = 0; i < bs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = bs[i].components();
  return m;
}

std::vector<Bivector> as_bivectors(const Eigen::MatrixXd& m, const MetricContextPtr& ctx) {
  std::vector<Bivector> out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.emplace_back(ctx, Vector6d(m.col(j)));
  return out;
}

Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& m, double tol) {
  if (m.cols() == 0) return Eigen::MatrixXd(6, 0);
  return svd_split(m, tol).range;
}

// Generators grouped by derivative order.
std::vector<std::vector<Bivector>> generator_groups(const PointFrame& frame, int order) {
  const MetricContextPtr ctx = context_of(frame);
  std::vector<std::vector<Bivector>> groups(static_cast<std::size_t>(order) + 1);
  for (const auto& [c, d] : kBivectorBasis) {
    Matrix4d m;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) m(a, b) = frame.riemann_up(a, b, c, d);
    groups[0].push_back(Bivector::from_mixed(ctx, m));
    if (order >= 1) {
      for (int e = 0; e < 4; ++e) {
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) m(a, b) = (*frame.riemann_cov1)(a, b, c, d, e);
        groups[1].push_back(Bivector::from_mixed(ctx, m));
      }
    }
    if (order >= 2) {
      for (int e = 0; e < 4; ++e)
        for (int f = 0; f < 4; ++f) {
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) m(a, b) = (*frame.riemann_cov2)(a, b, c, d, e, f);
          groups[2].push_back(Bivector::from_mixed(ctx, m));
        }
    }
  }
  return groups;
}

// Per-order scaling: each group is divided by its largest member; members (or whole groups)
// that are negligible against the overall curvature scale are dropped as round-off.
std::vector<std::vector<Bivector>> normalize_groups(const std::vector<std::vector<Bivector>>& groups, double tol) {
  std::vector<double> maxima;
  double overall = 1.0;
  for (const auto& grp : groups) {
    double m = 0.0;
    for (const auto& b : grp) m = std::max(m, b.components().norm());
    maxima.push_back(m);
    overall = std::max(overall, m);
  }
  std::vector<std::vector<Bivector>> out(groups.size());
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const double m = maxima[k];
    if (m <= tol * overall) continue;
    for (const auto& b : groups[k])
      if (b.components().norm() > tol * m) out[k].push_back((1.0 / m) * b);
  }
  return out;
}

std::vector<Bivector> flatten_groups(const std::vector<std::vector<Bivector>>& groups) {
  std::vector<Bivector> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

double skew_residual(const Matrix4d& mixed, const Matrix4d& g) {
  const Matrix4d low = g * mixed;
  const double n = low.norm();
  return n == 0.0 ? 0.0 : (low + low.transpose()).norm() / n;
}

Bivector rebase(const Bivector& b, const MetricContextPtr& ctx) { return Bivector(ctx, b.components()); }

}  // namespace

std::string to_string(HolonomyType t) {
  if (t == HolonomyType::Unrecognized) return "unrecognized";
  return "R" + std::to_string(static_cast<int>(t));
}

std::vector<Bivector> ihol_generators(const PointFrame& frame, int derivative_order) {
  if (derivative_order < 0 || derivative_order > 2) throw std::invalid_argument("derivative order must be 0, 1 or 2");
  if (derivative_order >= 1 && !frame.riemann_cov1) throw std::invalid_argument("frame lacks covariant derivatives");
  if (derivative_order >= 2 && !frame.riemann_cov2) throw std::invalid_argument("frame lacks second derivatives");
  return flatten_groups(generator_groups(frame, derivative_order));
}

std::vector<Bivector> ihol_generators(const MetricSpec& spec, const Point& x, int derivative_order) {
  FrameOptions opt;
  opt.riemann_derivatives = derivative_order;
  return ihol_generators(frame_at(spec, x, opt), derivative_order);
}

Bivector lie_bracket(const Bivector& f, const Bivector& g) {
  if (!same_metric(*f.context(), *g.context())) throw ConsistencyError("bracket of bivectors from different metrics");
  const Matrix4d a = f.mixed(), b = g.mixed();
  const Matrix4d c = a * b - b * a;
  const Matrix4d& gm = f.context()->g;
  const double scale = a.norm() * b.norm();
  const Matrix4d low = gm * c;
  if ((low + low.transpose()).norm() > 1e-10 * std::max(scale * gm.norm(), 1e-300))
    throw ConsistencyError("commutator is not skew-self adjoint");
  return Bivector::from_mixed(f.context(), c);
}

std::vector<Bivector> close_algebra(const std::vector<Bivector>& generators, const MetricContextPtr& ctx,
                                    const HolonomyOptions& options) {
  std::vector<Bivector> gens;
  for (const auto& g : generators) gens.push_back(rebase(g, ctx));
  Eigen::MatrixXd q = orthonormal_span(columns(gens), options.svd_tol);
  const double bracket_scale = ctx->g.norm() * ctx->g_inv.norm();
  for (bool grew = true; grew && q.cols() < 6;) {
    grew = false;
    const auto basis = as_bivectors(q, ctx);
    Eigen::MatrixXd extra = q;
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = i + 1; j < basis.size(); ++j) {
        const Vector6d b = lie_bracket(basis[i], basis[j]).components();
        const Vector6d r = b - q * (q.transpose() * b);
        if (r.norm() > options.closure_tol * bracket_scale) {
          extra.conservativeResize(Eigen::NoChange, extra.cols() + 1);
          extra.col(extra.cols() - 1) = r / r.norm();
          grew = true;
        }
      }
    if (grew) q = orthonormal_span(extra, options.svd_tol);
  }
  return as_bivectors(canonical_basis(q), ctx);
}

std::vector<Direction> constant_directions(const std::vector<Bivector>& basis, const MetricContextPtr& ctx,
                                           double tol) {
  Eigen::MatrixXd stack(4 * static_cast<Eigen::Index>(basis.size()), 4);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Matrix4d m = rebase(basis[i], ctx).mixed();
    stack.block<4, 4>(4 * static_cast<Eigen::Index>(i), 0) = m / std::max(m.norm(), 1e-300);
  }
  const Eigen::MatrixXd k = basis.empty() ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(4, 4))
                                          : svd_split(stack, tol).kernel;
  std::vector<Direction> out;
  if (k.cols() == 0) return out;
  const Eigen::MatrixXd gram = k.transpose() * ctx->g * k;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double scale = ctx->g.norm();
  for (Eigen::Index i = 0; i < k.cols(); ++i) {
    Direction d;
    d.vector = k * es.eigenvectors().col(i);
    // sign convention: largest-magnitude component positive
    Eigen::Index piv;
    d.vector.cwiseAbs().maxCoeff(&piv);
    if (d.vector[piv] < 0) d.vector = -d.vector;
    const double ev = es.eigenvalues()[i];
    d.causal = std::abs(ev) <= tol * scale ? Causal::Null : (ev < 0 ? Causal::Timelike : Causal::Spacelike);
    out.push_back(d);
  }
  return out;
}

std::vector<Direction> recurrent_directions(const std::vector<Bivector>& basis, const MetricContextPtr& ctx,
                                            double tol) {
  std::vector<Direction> out;
  if (basis.empty()) return out;
  std::vector<Matrix4d> ms;
  // A fixed generic combination; its real eigenvectors are the only candidates.
  Bivector combo = Bivector::zero(ctx);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Bivector b = rebase(basis[i], ctx);
    const double n = std::max(b.mixed().norm(), 1e-300);
    ms.push_back(b.mixed() / n);
    combo = combo + ((1.0 + 0.5773502691896258 * static_cast<double>(i * i + i)) / (1.0 + static_cast<double>(i)) / n) * b;
  }
  // Real eigenvalues ±α of the mixed form from α² − β² = −θ/2 and α²β² = Pf² |det g|, both
  // accurate to round-off in the components, unlike eigenvalues near a nilpotent block.
  const double scale = std::max(combo.mixed().norm(), 1e-300);
  const Bivector unit = (1.0 / scale) * combo;
  const Matrix4d mm = unit.mixed();
  const double s = -0.5 * theta(unit), pf = pfaffian(unit);
  const double p = pf * pf * ctx->volume * ctx->volume;
  const double alpha2 = 0.5 * (s + std::sqrt(s * s + 4.0 * p));
  if (alpha2 <= 1e-12) return out;
  const double alpha = std::sqrt(alpha2);
  for (const double lam : {alpha, -alpha}) {
    Eigen::JacobiSVD<Matrix4d> svd(mm - lam * Matrix4d::Identity(), Eigen::ComputeFullV);
    Vector4d v = svd.matrixV().col(3).normalized();
    bool common = true;
    for (const auto& m : ms) {
      const Vector4d w = m * v;
      if ((w - v * v.dot(w)).norm() > tol * 10.0) common = false;
    }
    if (!common) continue;
    bool duplicate = false;
    for (const auto& d : out) duplicate = duplicate || std::abs(std::abs(d.vector.dot(v)) - 1.0) < 1e-8;
    if (duplicate) continue;
    Eigen::Index piv;
    v.cwiseAbs().maxCoeff(&piv);
    if (v[piv] < 0) v = -v;
    out.push_back({v, causal_character(v, ctx->g, 1e-7)});
  }
  return out;
}

double complement_pfaffian(const std::vector<Bivector>& basis, const Bivector& representative) {
  std::vector<Bivector> brackets;
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j) brackets.push_back(lie_bracket(basis[i], basis[j]));
  const Eigen::MatrixXd d = orthonormal_span(columns(brackets), 1e-9);
  const Vector6d c = representative.components();
  const Vector6d r = c - d * (d.transpose() * c);
  return pfaffian(Bivector(representative.context(), r));
}

HolonomyAlgebraReport identify_type(const std::vector<Bivector>& input, const MetricContextPtr& ctx,
                                    const HolonomyOptions& options) {
  HolonomyAlgebraReport rep;
  for (const auto& b : input) rep.basis.push_back(rebase(b, ctx));
  rep.dimension = static_cast<int>(rep.basis.size());
  for (const auto& b : rep.basis) {
    rep.mixed_basis.push_back(b.mixed());
    rep.skew_residual = std::max(rep.skew_residual, skew_residual(rep.mixed_basis.back(), ctx->g));
  }
  const Eigen::MatrixXd q = orthonormal_span(columns(rep.basis), options.svd_tol);
  if (q.cols() != rep.dimension) {
    rep.type = HolonomyType::Unrecognized;
    rep.diagnostics.push_back("basis is linearly dependent");
    return rep;
  }
  for (std::size_t i = 0; i < rep.basis.size(); ++i)
    for (std::size_t j = i + 1; j < rep.basis.size(); ++j) {
      const Vector6d b = lie_bracket(rep.basis[i], rep.basis[j]).components();
      const double s = rep.basis[i].components().norm() * rep.basis[j].components().norm();
      rep.closure_residual = std::max(rep.closure_residual, span_residual(q, b) / s);
    }
  if (rep.closure_residual > 1e-6) rep.diagnostics.push_back("basis is not bracket-closed");

  rep.constant = constant_directions(rep.basis, ctx, options.svd_tol);
  rep.recurrent = recurrent_directions(rep.basis, ctx);
  const std::size_t nconst = rep.constant.size();
  auto unrecognized = [&](const std::string& why) {
    rep.type = HolonomyType::Unrecognized;
    rep.diagnostics.push_back(why);
  };

  switch (rep.dimension) {
    case 0:
      rep.type = HolonomyType::R1;
      break;
    case 1: {
      const auto c = classify_bivector(rep.basis[0], 1e-7);
      switch (c.kind) {
        case BivectorKind::SimpleTimelike: rep.type = HolonomyType::R2; break;
        case BivectorKind::SimpleNull: rep.type = HolonomyType::R3; break;
        case BivectorKind::SimpleSpacelike: rep.type = HolonomyType::R4; break;
        case BivectorKind::NonSimple:
          rep.type = HolonomyType::R5;
          rep.realizable = false;
          rep.diagnostics.push_back("R5 cannot occur as a holonomy algebra (curvature would violate the Bianchi identity)");
          break;
        case BivectorKind::Zero: unrecognized("zero basis element"); break;
      }
      break;
    }
    case 2:
      if (nconst == 0) rep.type = HolonomyType::R7;
      else if (nconst == 1 && rep.constant[0].causal == Causal::Spacelike) rep.type = HolonomyType::R6;
      else if (nconst == 1 && rep.constant[0].causal == Causal::Null) rep.type = HolonomyType::R8;
      else unrecognized("two-dimensional algebra with unexpected annihilator");
      break;
    case 3:
      if (nconst == 1) {
        switch (rep.constant[0].causal) {
          case Causal::Spacelike: rep.type = HolonomyType::R10; break;
          case Causal::Null: rep.type = HolonomyType::R11; break;
          case Causal::Timelike: rep.type = HolonomyType::R13; break;
        }
      } else if (nconst == 0) {
        // Representative outside the derived algebra: the basis element with the largest
        // component off [h, h].
        std::vector<Bivector> brackets;
        for (std::size_t i = 0; i < 3; ++i)
          for (std::size_t j = i + 1; j < 3; ++j) brackets.push_back(lie_bracket(rep.basis[i], rep.basis[j]));
        const auto dsplit = svd_split(columns(brackets), options.svd_tol);
        if (dsplit.rank != 2) {
          unrecognized("three-dimensional algebra whose derived algebra is not two-dimensional");
          break;
        }
        const Eigen::MatrixXd d = dsplit.range;
        std::size_t best = 0;
        double best_off = -1;
        for (std::size_t i = 0; i < 3; ++i) {
          const Vector6d c = rep.basis[i].components();
          const double off = span_residual(d, c) / c.norm();
          if (off > best_off) best_off = off, best = i;
        }
        const Vector6d c = rep.basis[best].components();
        const Bivector f(ctx, c - d * (d.transpose() * c));
        const double pf = pfaffian(f);
        if (std::abs(pf) <= 1e-7 * f.components().squaredNorm()) {
          rep.type = HolonomyType::R9;
        } else {
          rep.type = HolonomyType::R12;
          if (rep.recurrent.size() != 1) {
            rep.diagnostics.push_back("R12 without a unique recurrent direction: omega not extracted");
            break;
          }
          const Vector4d& l = rep.recurrent[0].vector;
          const Vector4d fl = f.mixed() * l;
          const double lambda = fl.dot(l) / l.dot(l);
          const Bivector fn = (1.0 / lambda) * f;
          rep.omega = ctx->orientation * ctx->volume * pfaffian(fn);
        }
      } else {
        unrecognized("three-dimensional algebra with unexpected annihilator");
      }
      break;
    case 4: {
      bool null_eigen = false;
      for (const auto& d : rep.recurrent) null_eigen = null_eigen || d.causal == Causal::Null;
      if (null_eigen) rep.type = HolonomyType::R14;
      else unrecognized("four-dimensional algebra without a common null eigen-direction");
      break;
    }
    case 6:
      rep.type = HolonomyType::R15;
      break;
    default:
      unrecognized("no holonomy algebra of dimension 5");
  }
  return rep;
}

HolonomySurvey holonomy_survey(const MetricSpec& spec, std::size_t count, std::uint64_t seed, int derivative_order,
                               const std::optional<SampleBox>& box, const HolonomyOptions& options) {
  if (derivative_order < 0 || derivative_order > 2) throw std::invalid_argument("derivative order must be 0, 1 or 2");
  HolonomySurvey out;
  out.derivative_order = derivative_order;
  out.seed = seed;
  out.caveat = "algebra generated by curvature and its covariant derivatives at the sampled points; "
               "a subalgebra of the true holonomy algebra";
  const std::vector<Point> points = sample_points(spec, count, seed, box);
  out.points.resize(points.size());
  std::vector<std::vector<Bivector>> kept(points.size());
  std::vector<MetricContextPtr> contexts(points.size());

  parallel_for(points.size(), [&](std::size_t i) {
    FrameOptions fo;
    fo.riemann_derivatives = derivative_order;
    const PointFrame frame = frame_at(spec, points[i], fo);
    const MetricContextPtr ctx = context_of(frame);
    const auto groups = normalize_groups(generator_groups(frame, derivative_order), options.generator_tol);
    PointHolonomy& ph = out.points[i];
    ph.index = i;
    ph.point = points[i];
    std::vector<Bivector> acc;
    for (const auto& grp : groups) {
      acc.insert(acc.end(), grp.begin(), grp.end());
      ph.span_by_order.push_back(static_cast<int>(orthonormal_span(columns(acc), options.svd_tol).cols()));
    }
    ph.report = identify_type(close_algebra(acc, ctx, options), ctx, options);
    kept[i] = std::move(acc);
    contexts[i] = ctx;
  });

  std::vector<Bivector> all;
  for (const auto& k : kept) all.insert(all.end(), k.begin(), k.end());
  const MetricContextPtr ref = contexts.front();
  out.aggregate = identify_type(close_algebra(all, ref, options), ref, options);
  for (const auto& p : out.points) out.types_differ = out.types_differ || p.report.type != out.points.front().report.type;
  if (out.types_differ) out.aggregate.diagnostics.push_back("per-point holonomy types differ");
  return out;
}

}  // namespace lorhol
