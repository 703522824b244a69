#include "lorhol/projective.hpp"

#include <cmath>
#include <limits>

#include "lorhol/errors.hpp"
#include "lorhol/parallel.hpp"

namespace lorhol {

namespace {

ExprMatrix mirrored(const ExprMatrix& m) {
  ExprMatrix out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = i >= j ? m(i, j) : m(j, i);
  return out;
}

// Determinant of the square submatrix on the given rows and columns.
Expr minor_det(const ExprMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.size() == 1) return m(rows[0], cols[0]);
  Expr sum;
  std::vector<int> sub_rows(rows.begin() + 1, rows.end());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const Expr& entry = m(rows[0], cols[k]);
    if (entry.is_zero()) continue;
    std::vector<int> sub_cols;
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (j != k) sub_cols.push_back(cols[j]);
    const Expr term = entry * minor_det(m, sub_rows, sub_cols);
    sum = k % 2 == 0 ? sum + term : sum - term;
  }
  return sum;
}

bool is_domain_failure(const std::exception_ptr& e, std::string& reason) {
  try {
    std::rethrow_exception(e);
  } catch (const DomainError& err) {
    reason = err.what();
  } catch (const DegenerateMetricError& err) {
    reason = err.what();
  } catch (const SignatureError& err) {
    reason = err.what();
  } catch (...) {
    return false;
  }
  return true;
}

// Evaluates fn at every point in parallel. Points outside the domain of any of `specs`, or
// whose evaluation raises a domain-type error, are recorded as skipped.
ResidualReport per_point(const std::vector<Point>& points, const std::vector<const MetricSpec*>& specs,
                         const std::function<double(std::size_t, const Point&)>& fn) {
  ResidualReport out;
  const std::size_t n = points.size();
  out.per_point.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::exception_ptr> failures(n);
  std::vector<std::string> outside(n);
  parallel_for(n, [&](std::size_t i) {
    for (const MetricSpec* s : specs)
      if (!s->admissible(points[i])) {
        outside[i] = "point outside the metric's domain";
        return;
      }
    try {
      out.per_point[i] = fn(i, points[i]);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    std::string reason = outside[i];
    if (failures[i] && !is_domain_failure(failures[i], reason)) std::rethrow_exception(failures[i]);
    if (!reason.empty()) {
      out.skipped.push_back({i, reason});
      continue;
    }
    out.max = std::max(out.max, out.per_point[i]);
  }
  return out;
}

double max_abs(const Tensor4d& t) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) m = std::max(m, std::abs(t.data()[i]));
  return m;
}

double ratio(double num, double den) { return den > 0.0 ? num / den : (num > 0.0 ? num : 0.0); }

Vector4d to_vector(const std::vector<Jet<double>>& jets) {
  Vector4d v;
  for (int i = 0; i < 4; ++i) v[i] = jets[static_cast<std::size_t>(i)].value();
  return v;
}

std::vector<Expr> as_vector(const OneForm& f) { return {f.begin(), f.end()}; }

}  // namespace

Expr determinant(const ExprMatrix& m) { return minor_det(m, {0, 1, 2, 3}, {0, 1, 2, 3}); }

ExprMatrix adjugate(const ExprMatrix& m) {
  ExprMatrix adj;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      // adj(i, j) = (-1)^{i+j} M_ji
      std::vector<int> rows, cols;
      for (int k = 0; k < 4; ++k) {
        if (k != j) rows.push_back(k);
        if (k != i) cols.push_back(k);
      }
      const Expr c = minor_det(m, rows, cols);
      adj(i, j) = (i + j) % 2 == 0 ? c : -c;
    }
  return adj;
}

OneForm lambda_from_trace(const SinyukovPair& pair) {
  const ExprMatrix g = mirrored(pair.base.components());
  const ExprMatrix a = mirrored(pair.a);
  const ExprMatrix adj = adjugate(g);
  Expr trace;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (!a(i, j).is_zero() && !adj(i, j).is_zero()) trace += adj(i, j) * a(i, j);
  const Expr half_trace = Expr(0.5) * trace / determinant(g);
  OneForm out;
  const Coordinates& coords = pair.base.coordinates();
  for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)] = differentiate(half_trace, coords[static_cast<std::size_t>(i)]);
  return out;
}

OneForm resolved_lambda(const SinyukovPair& pair) { return pair.lambda ? *pair.lambda : lambda_from_trace(pair); }

SinyukovReport sinyukov_residual(const SinyukovPair& pair, const std::vector<Point>& points) {
  const MetricSpec& base = pair.base;
  const SymmetricField a(pair.a, base.coordinates(), base.parameters());
  const DerivativeTapes lambda(as_vector(resolved_lambda(pair)), base.coordinates(), base.parameters());
  std::vector<double> curl(points.size(), 0.0);
  SinyukovReport out;
  out.residual = per_point(points, {&base}, [&](std::size_t i, const Point& x) {
    const Matrix4d g = base.metric_jet(x, 0).value();
    const Tensor3d cov = cov_deriv_sym2_at(base, a, x);
    const auto lj = lambda.jets(x, 1);
    const Vector4d l = to_vector(lj);
    double worst = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) {
        for (int c = 0; c < 4; ++c) worst = std::max(worst, std::abs(cov(p, q, c) - g(p, c) * l[q] - g(q, c) * l[p]));
        // ∂_p λ_q - ∂_q λ_p
        const double d = lj[static_cast<std::size_t>(q)][MultiIndex().with(p)] - lj[static_cast<std::size_t>(p)][MultiIndex().with(q)];
        curl[i] = std::max(curl[i], std::abs(d));
      }
    return ratio(worst, a.value(x).cwiseAbs().maxCoeff());
  });
  for (double c : curl) out.curl = std::max(out.curl, c);
  return out;
}

ProjectivePair invert_pair(const SinyukovPair& pair, const std::vector<Point>& check_points, const InvertOptions& options) {
  const MetricSpec& base = pair.base;
  const ExprMatrix g = mirrored(base.components());
  const ExprMatrix a = mirrored(pair.a);
  const OneForm lambda = resolved_lambda(pair);

  const Expr det_a = determinant(a);
  const Expr det_g = determinant(g);
  const ExprMatrix adj = adjugate(a);
  const Expr r = det_a / det_g;
  const Expr chi = Expr(-0.25) * ln(r * r);
  const Expr e2chi = pow(r * r, Rational(-1, 2));

  // g adj(a) is shared by ψ and g'.
  ExprMatrix gadj;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Expr s;
      for (int k = 0; k < 4; ++k)
        if (!g(i, k).is_zero() && !adj(k, j).is_zero()) s += g(i, k) * adj(k, j);
      gadj(i, j) = s;
    }

  ProjectivePair out;
  out.g = base;
  out.chi = chi;
  for (int i = 0; i < 4; ++i) {
    Expr s;
    for (int k = 0; k < 4; ++k)
      if (!gadj(i, k).is_zero() && !lambda[static_cast<std::size_t>(k)].is_zero()) s += gadj(i, k) * lambda[static_cast<std::size_t>(k)];
    out.psi[static_cast<std::size_t>(i)] = s.is_zero() ? Expr() : -(s / det_a);
  }
  ExprMatrix gp;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j <= i; ++j) {
      Expr s;
      for (int k = 0; k < 4; ++k)
        if (!gadj(i, k).is_zero() && !g(k, j).is_zero()) s += gadj(i, k) * g(k, j);
      gp(i, j) = s.is_zero() ? Expr() : e2chi * s / det_a;
      gp(j, i) = gp(i, j);
    }
  out.g_prime = MetricSpec(base.coordinates(), gp, base.parameters(), base.constraints(), base.sample_box());

  // Consistency at the check points: dχ = ψ and ∇''a = 0.
  const SymmetricField afield(pair.a, base.coordinates(), base.parameters());
  const DerivativeTapes chi_tape({chi}, base.coordinates(), base.parameters());
  const DerivativeTapes psi_tape(as_vector(out.psi), base.coordinates(), base.parameters());
  std::vector<std::string> problems(check_points.size());
  parallel_for(check_points.size(), [&](std::size_t i) {
    const Point& x = check_points[i];
    const Matrix4d gv = base.metric_jet(x, 0).value();
    const Matrix4d av = afield.value(x);
    check_nondegenerate(av);
    const auto cj = chi_tape.jets(x, 1);
    const Vector4d psi = to_vector(psi_tape.jets(x, 0));
    double dchi_err = 0.0;
    for (int c = 0; c < 4; ++c) dchi_err = std::max(dchi_err, std::abs(cj[0][MultiIndex().with(c)] - psi[c]));
    if (dchi_err > options.tol * std::max(1.0, psi.cwiseAbs().maxCoeff())) {
      problems[i] = "dchi differs from psi by " + std::to_string(dchi_err);
      return;
    }
    const Vector4d apsi = av * gv.inverse() * psi;  // a_be ψ^e
    const Tensor3d cov = cov_deriv_sym2_at(base, afield, x);
    double err = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q)
        for (int c = 0; c < 4; ++c)
          err = std::max(err, std::abs(cov(p, q, c) + gv(p, c) * apsi[q] + gv(q, c) * apsi[p]));
    err = ratio(err, av.cwiseAbs().maxCoeff());
    if (err > options.tol) problems[i] = "a is not parallel for the auxiliary connection (residual " + std::to_string(err) + ")";
  });
  for (std::size_t i = 0; i < problems.size(); ++i)
    if (!problems[i].empty())
      throw ConsistencyError("pair (a, lambda) is not a Sinyukov solution at check point " + std::to_string(i) + ": " +
                             problems[i]);
  return out;
}

SinyukovValues forward_map(const ProjectivePair& pair, const Point& x) {
  const Matrix4d g = pair.g.metric_jet(x, 0).value();
  const Matrix4d gp = pair.g_prime.metric_jet(x, 0).value();
  double chi;
  if (pair.chi)
    chi = eval_expr(*pair.chi, pair.g.coordinates(), x, pair.g.parameters());
  else
    chi = std::log(std::abs(gp.determinant() / g.determinant())) / 10.0;
  Vector4d psi;
  for (int i = 0; i < 4; ++i) psi[i] = eval_expr(pair.psi[static_cast<std::size_t>(i)], pair.g.coordinates(), x, pair.g.parameters());
  SinyukovValues out;
  out.a = std::exp(2.0 * chi) * g * gp.inverse() * g;
  out.lambda = -out.a * g.inverse() * psi;
  return out;
}

PsiField::PsiField() : fn_([](const Point&) { return PsiSample{}; }) {}

PsiField PsiField::from_function(std::function<PsiSample(const Point&)> fn) {
  PsiField f;
  f.fn_ = std::move(fn);
  return f;
}

PsiField PsiField::from_exprs(const OneForm& psi, const Coordinates& coords, const ParamEnv& env) {
  const DerivativeTapes tapes(as_vector(psi), coords, env);
  return from_function([tapes](const Point& x) {
    const auto jets = tapes.jets(x, 1);
    PsiSample s;
    for (int a = 0; a < 4; ++a) {
      s.psi[a] = jets[static_cast<std::size_t>(a)].value();
      for (int b = 0; b < 4; ++b) s.dpsi(a, b) = jets[static_cast<std::size_t>(a)][MultiIndex().with(b)];
    }
    return s;
  });
}

PsiField PsiField::from_connections(const MetricSpec& g, const MetricSpec& g_prime) {
  return from_function([g, g_prime](const Point& x) {
    const Jet<Tensor3d> c = christoffel_jet(g.metric_jet(x, 2), 1);
    const Jet<Tensor3d> cp = christoffel_jet(g_prime.metric_jet(x, 2), 1);
    PsiSample s;
    for (int b = 0; b < 4; ++b) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += cp.value()(a, b, a) - c.value()(a, b, a);
      s.psi[b] = v / 5.0;
      for (int e = 0; e < 4; ++e) {
        const MultiIndex m = MultiIndex().with(e);
        double d = 0.0;
        for (int a = 0; a < 4; ++a) d += cp[m](a, b, a) - c[m](a, b, a);
        s.dpsi(b, e) = d / 5.0;
      }
    }
    return s;
  });
}

Vector4d psi_from_connections(const MetricSpec& g, const MetricSpec& g_prime, const Point& x) {
  const Tensor3d c = christoffel_jet(g.metric_jet(x, 1), 0).value();
  const Tensor3d cp = christoffel_jet(g_prime.metric_jet(x, 1), 0).value();
  Vector4d psi = Vector4d::Zero();
  for (int b = 0; b < 4; ++b)
    for (int a = 0; a < 4; ++a) psi[b] += (cp(a, b, a) - c(a, b, a)) / 5.0;
  return psi;
}

ResidualReport projective_residual(const MetricSpec& g, const MetricSpec& g_prime, const PsiField& psi,
                                   const std::vector<Point>& points) {
  return per_point(points, {&g, &g_prime}, [&](std::size_t, const Point& x) {
    const Matrix4d gp = g_prime.metric_jet(x, 0).value();
    check_nondegenerate(gp);
    const Tensor3d cov = cov_deriv_sym2_at(g, g_prime.field(), x);
    const Vector4d p = psi.at(x).psi;
    double worst = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          worst = std::max(worst, std::abs(cov(a, b, c) - 2.0 * gp(a, b) * p[c] - gp(a, c) * p[b] - gp(b, c) * p[a]));
    return ratio(worst, gp.cwiseAbs().maxCoeff());
  });
}

Matrix4d psi_ab(const PsiSample& s, const Tensor3d& christoffel) {
  Matrix4d out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double v = s.dpsi(a, b) - s.psi[a] * s.psi[b];
      for (int c = 0; c < 4; ++c) v -= christoffel(c, a, b) * s.psi[c];
      out(a, b) = v;
    }
  return out;
}

CurvatureRelationReport curvature_relation_residual(const MetricSpec& g, const MetricSpec& g_prime, const PsiField& psi,
                                                    const std::vector<Point>& points) {
  std::vector<double> ricci(points.size(), 0.0);
  CurvatureRelationReport out;
  out.full = per_point(points, {&g, &g_prime}, [&](std::size_t i, const Point& x) {
    const PointFrame f = frame_at(g, x, {0, true});
    const PointFrame fp = frame_at(g_prime, x, {0, false});
    const Matrix4d p = psi_ab(psi.at(x), f.christoffel);
    const double scale = std::max({max_abs(f.riemann_up), max_abs(fp.riemann_up), p.cwiseAbs().maxCoeff()});
    double worst = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) {
            const double v = fp.riemann_up(a, b, c, d) - f.riemann_up(a, b, c, d) - (a == d ? p(b, c) : 0.0) +
                             (a == c ? p(b, d) : 0.0);
            worst = std::max(worst, std::abs(v));
          }
    ricci[i] = ratio((fp.ricci - f.ricci + 3.0 * p).cwiseAbs().maxCoeff(), scale);
    return ratio(worst, scale);
  });
  out.ricci.per_point = ricci;
  out.ricci.skipped = out.full.skipped;
  for (const auto& s : out.full.skipped) out.ricci.per_point[s.index] = std::numeric_limits<double>::quiet_NaN();
  for (double r : out.ricci.per_point)
    if (!std::isnan(r)) out.ricci.max = std::max(out.ricci.max, r);
  return out;
}

Tensor4d weyl_projective_at(const PointFrame& frame) {
  Tensor4d w = frame.riemann_up;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double v = 0.0;
          if (a == d) v += frame.ricci(b, c);
          if (a == c) v -= frame.ricci(b, d);
          w(a, b, c, d) += v / 3.0;
        }
  return w;
}

ResidualReport weyl_projective_equal(const MetricSpec& g, const MetricSpec& g_prime, const std::vector<Point>& points) {
  return per_point(points, {&g, &g_prime}, [&](std::size_t, const Point& x) {
    const Tensor4d w = weyl_projective_at(frame_at(g, x, {0, false}));
    const Tensor4d wp = weyl_projective_at(frame_at(g_prime, x, {0, false}));
    const Tensor4d diff = w - wp;
    return max_abs(diff);
  });
}

Lemma1Report lemma1_checks(const SinyukovPair& pair, const std::vector<Point>& points) {
  const MetricSpec& base = pair.base;
  const SymmetricField a(pair.a, base.coordinates(), base.parameters());
  const DerivativeTapes lambda(as_vector(resolved_lambda(pair)), base.coordinates(), base.parameters());
  struct Sample {
    Matrix4d g, lab, a;
    Vector4d l;
    Tensor4d riemann;
    std::optional<CurvatureClass> cls;
  };
  std::vector<Sample> samples(points.size());
  const ResidualReport visited = per_point(points, {&base}, [&](std::size_t i, const Point& x) {
    const PointFrame f = frame_at(base, x, {0, true});
    const auto lj = lambda.jets(x, 1);
    Sample& s = samples[i];
    s.g = f.g;
    s.a = a.value(x);
    s.riemann = f.riemann_up;
    s.l = to_vector(lj);
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) {
        double v = lj[static_cast<std::size_t>(p)][MultiIndex().with(q)];
        for (int c = 0; c < 4; ++c) v -= f.christoffel(c, p, q) * s.l[c];
        s.lab(p, q) = v;
      }
    try {
      s.cls = classify_curvature(f).cls;
    } catch (const ClassificationError&) {
    }
    return 0.0;
  });

  Lemma1Report out;
  out.skipped = visited.skipped;
  std::vector<bool> used(points.size(), true);
  for (const auto& s : visited.skipped) used[s.index] = false;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (used[i]) {
      num += samples[i].lab.cwiseProduct(samples[i].g).sum();
      den += samples[i].g.cwiseProduct(samples[i].g).sum();
    }
  out.c = den > 0.0 ? num / den : 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!used[i]) continue;
    const Sample& s = samples[i];
    const double rmax = max_abs(s.riemann);
    out.residual_a = std::max(out.residual_a, ratio((s.lab - out.c * s.g).cwiseAbs().maxCoeff(),
                                                    std::max(s.lab.cwiseAbs().maxCoeff(), std::abs(out.c) * s.g.cwiseAbs().maxCoeff())));
    double rb = 0.0, rc = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q)
        for (int c = 0; c < 4; ++c) {
          double v = 0.0;
          for (int d = 0; d < 4; ++d) v += s.l[d] * s.riemann(d, p, q, c);
          rb = std::max(rb, std::abs(v));
          for (int d = 0; d < 4; ++d) {
            double w = 0.0;
            for (int e = 0; e < 4; ++e) w += s.a(p, e) * s.riemann(e, q, c, d) + s.a(q, e) * s.riemann(e, p, c, d);
            rc = std::max(rc, std::abs(w));
          }
        }
    out.residual_b = std::max(out.residual_b, ratio(rb, s.l.cwiseAbs().maxCoeff() * rmax));
    out.residual_c = std::max(out.residual_c, ratio(rc, s.a.cwiseAbs().maxCoeff() * rmax));
    if (s.cls) {
      out.classes.push_back(*s.cls);
      if (*s.cls != CurvatureClass::C && *s.cls != CurvatureClass::D) out.class_c_or_d = false;
    } else {
      out.class_c_or_d = false;
    }
  }
  return out;
}

}  // namespace lorhol
