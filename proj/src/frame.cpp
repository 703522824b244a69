#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "lorhol/metric.hpp"

namespace lorhol {

namespace {

void split(const MultiIndex& s, int mask, MultiIndex& t, MultiIndex& u) {
  t = MultiIndex{};
  u = MultiIndex{};
  for (int k = 0; k < s.size; ++k) {
    if (mask & (1 << k))
      t = t.with(s[k]);
    else
      u = u.with(s[k]);
  }
}

Jet<Matrix4d> inverse_jet(const Jet<Matrix4d>& g, int order) {
  Jet<Matrix4d> inv(order, Matrix4d::Zero());
  const Matrix4d g0inv = g.value().inverse();
  // ∂_S(g^-1) = -g^-1 Σ_{T≠∅} ∂_T g ∂_{S\T} g^-1, built up by increasing |S|.
  for_each_multi_index(order, [&](const MultiIndex& s) {
    if (s.size == 0) {
      inv[s] = g0inv;
      return;
    }
    Matrix4d acc = Matrix4d::Zero();
    MultiIndex t, u;
    for (int mask = 1; mask < (1 << s.size); ++mask) {
      split(s, mask, t, u);
      acc += g[t] * inv[u];
    }
    inv[s] = -g0inv * acc;
  });
  return inv;
}

// Γ_c as matrices, (Γ_c)(a, b) = Γ^a_{bc}.
std::array<Jet<Matrix4d>, 4> christoffel_matrices(const Jet<Matrix4d>& g, int order) {
  const Jet<Matrix4d> ginv = inverse_jet(g, order);
  std::array<Jet<Matrix4d>, 4> gamma;
  for (int c = 0; c < 4; ++c) {
    Jet<Matrix4d> first(order, Matrix4d::Zero());  // Γ_{dbc} at (d, b)
    for_each_multi_index(order, [&](const MultiIndex& s) {
      Matrix4d& m = first[s];
      const Matrix4d& gc = g[s.with(c)];
      for (int d = 0; d < 4; ++d)
        for (int b = 0; b < 4; ++b)
          m(d, b) = 0.5 * (g[s.with(b)](d, c) + gc(d, b) - g[s.with(d)](b, c));
    });
    gamma[static_cast<std::size_t>(c)] = Jet<Matrix4d>(order, Matrix4d::Zero());
    leibniz_accumulate(ginv, first, gamma[static_cast<std::size_t>(c)],
                       [](Matrix4d& acc, const Matrix4d& x, const Matrix4d& y) { acc.noalias() += x * y; });
  }
  return gamma;
}

// R_cd with (R_cd)(a, b) = R^a_{bcd} = ∂_cΓ_d - ∂_dΓ_c + [Γ_c, Γ_d].
std::array<std::array<Jet<Matrix4d>, 4>, 4> riemann_matrices(const std::array<Jet<Matrix4d>, 4>& gamma, int order) {
  std::array<std::array<Jet<Matrix4d>, 4>, 4> r;
  for (int c = 0; c < 4; ++c)
    for (int d = 0; d < 4; ++d) {
      auto& out = r[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
      out = Jet<Matrix4d>(order, Matrix4d::Zero());
      const auto& gc = gamma[static_cast<std::size_t>(c)];
      const auto& gd = gamma[static_cast<std::size_t>(d)];
      for_each_multi_index(order, [&](const MultiIndex& s) { out[s] = gd[s.with(c)] - gc[s.with(d)]; });
      leibniz_accumulate(gc, gd, out, [](Matrix4d& acc, const Matrix4d& x, const Matrix4d& y) { acc.noalias() += x * y; });
      leibniz_accumulate(gd, gc, out, [](Matrix4d& acc, const Matrix4d& x, const Matrix4d& y) { acc.noalias() -= x * y; });
    }
  return r;
}

Jet<Tensor3d> to_tensor_jet(const std::array<Jet<Matrix4d>, 4>& gamma, int order) {
  Tensor3d zero;
  zero.setZero();
  Jet<Tensor3d> out(order, zero);
  for_each_multi_index(order, [&](const MultiIndex& s) {
    Tensor3d& t = out[s];
    for (int c = 0; c < 4; ++c) {
      const Matrix4d& m = gamma[static_cast<std::size_t>(c)][s];
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) t(a, b, c) = m(a, b);
    }
  });
  return out;
}

Jet<Tensor4d> to_tensor_jet(const std::array<std::array<Jet<Matrix4d>, 4>, 4>& r, int order) {
  Tensor4d zero;
  zero.setZero();
  Jet<Tensor4d> out(order, zero);
  for_each_multi_index(order, [&](const MultiIndex& s) {
    Tensor4d& t = out[s];
    for (int c = 0; c < 4; ++c)
      for (int d = 0; d < 4; ++d) {
        const Matrix4d& m = r[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)][s];
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) t(a, b, c, d) = m(a, b);
      }
  });
  return out;
}

constexpr int pow4(int r) { return r == 0 ? 1 : 4 * pow4(r - 1); }

void fill_curvature_derived(PointFrame& f) {
  const Matrix4d& g = f.g;
  const Matrix4d& gi = f.g_inv;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double s = 0.0;
          for (int e = 0; e < 4; ++e) s += g(a, e) * f.riemann_up(e, b, c, d);
          f.riemann_down(a, b, c, d) = s;
        }
  f.ricci.setZero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) f.ricci(a, b) += f.riemann_up(c, a, c, b);
  f.ricci_scalar = (gi.cwiseProduct(f.ricci)).sum();
  f.ricci_tracefree = f.ricci - 0.25 * f.ricci_scalar * g;
  const Matrix4d tf_mixed = gi * f.ricci_tracefree;  // R̃^a_c
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const double dac = a == c ? 1.0 : 0.0, dad = a == d ? 1.0 : 0.0;
          f.e_tensor(a, b, c, d) = 0.5 * (tf_mixed(a, c) * g(b, d) - tf_mixed(a, d) * g(b, c) +
                                          dac * f.ricci_tracefree(b, d) - dad * f.ricci_tracefree(b, c));
          f.weyl(a, b, c, d) = f.riemann_up(a, b, c, d) - f.e_tensor(a, b, c, d) -
                               f.ricci_scalar / 12.0 * (dac * g(b, d) - dad * g(b, c));
        }
}

}  // namespace

template <int Rank>
Jet<Tensor<double, Rank + 1>> covariant_derivative(const Jet<Tensor<double, Rank>>& t, const std::array<bool, Rank>& upper,
                                                   const Jet<Tensor3d>& gamma) {
  using Out = Tensor<double, Rank + 1>;
  constexpr int n_in = pow4(Rank);
  const int order = t.order() - 1;
  Out zero;
  zero.setZero();
  Jet<Out> out(order, zero);
  for_each_multi_index(order, [&](const MultiIndex& s) {
    double* o = out[s].data();
    for (int e = 0; e < 4; ++e) {
      const double* te = t[s.with(e)].data();
      for (int i = 0; i < n_in; ++i) o[i + n_in * e] = te[i];
    }
    MultiIndex tt, uu;
    for (int mask = 0; mask < (1 << s.size); ++mask) {
      split(s, mask, tt, uu);
      const double* G = gamma[tt].data();  // G[a + 4b + 16c] = Γ^a_bc
      const double* tu = t[uu].data();
      for (int e = 0; e < 4; ++e)
        for (int i = 0; i < n_in; ++i) {
          double acc = 0.0;
          int stride = 1;
          for (int slot = 0; slot < Rank; ++slot, stride *= 4) {
            const int a = (i / stride) % 4;
            const int base = i - a * stride;
            if (upper[static_cast<std::size_t>(slot)]) {
              for (int f = 0; f < 4; ++f) acc += G[a + 4 * e + 16 * f] * tu[base + f * stride];
            } else {
              for (int f = 0; f < 4; ++f) acc -= G[f + 4 * e + 16 * a] * tu[base + f * stride];
            }
          }
          o[i + n_in * e] += acc;
        }
    }
  });
  return out;
}

template Jet<Tensor<double, 3>> covariant_derivative<2>(const Jet<Tensor<double, 2>>&, const std::array<bool, 2>&,
                                                        const Jet<Tensor3d>&);
template Jet<Tensor<double, 5>> covariant_derivative<4>(const Jet<Tensor<double, 4>>&, const std::array<bool, 4>&,
                                                        const Jet<Tensor3d>&);
template Jet<Tensor<double, 6>> covariant_derivative<5>(const Jet<Tensor<double, 5>>&, const std::array<bool, 5>&,
                                                        const Jet<Tensor3d>&);

Jet<Tensor3d> christoffel_jet(const Jet<Matrix4d>& metric, int order) {
  return to_tensor_jet(christoffel_matrices(metric, order), order);
}

void check_nondegenerate(const Matrix4d& g) {
  const double scale = g.cwiseAbs().maxCoeff();
  const double det = g.determinant();
  if (!(std::abs(det) >= 1e-12 * std::pow(scale, 4)) || scale == 0.0)
    throw DegenerateMetricError("degenerate metric (det g = " + std::to_string(det) + ")");
}

Signature signature_of(const Matrix4d& g) {
  check_nondegenerate(g);
  Eigen::SelfAdjointEigenSolver<Matrix4d> es(g, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  Signature s;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(ev[i]) <= 1e-12 * scale) throw DegenerateMetricError("metric has a zero eigenvalue");
    s.signs[static_cast<std::size_t>(i)] = ev[i] < 0 ? -1 : 1;
  }
  std::sort(s.signs.begin(), s.signs.end());
  return s;
}

Signature signature_at(const MetricSpec& spec, const Point& x) { return signature_of(spec.field().value(x)); }

PointFrame frame_at(const MetricSpec& spec, const Point& x, const FrameOptions& options) {
  const int nd = std::clamp(options.riemann_derivatives, 0, 2);
  const int gamma_order = nd + 1;
  const Jet<Matrix4d> g = spec.metric_jet(x, gamma_order + 1);

  PointFrame f;
  f.point = x;
  f.g = g.value();
  const Signature sig = signature_of(f.g);
  if (options.require_lorentz && !sig.lorentz()) throw SignatureError("metric is not of Lorentz signature (-,+,+,+)");
  f.g_inv = f.g.inverse();
  f.det_g = f.g.determinant();
  for (int c = 0; c < 4; ++c) {
    const Matrix4d& m = g[MultiIndex{}.with(c)];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) f.dg(a, b, c) = m(a, b);
  }

  const auto gamma_m = christoffel_matrices(g, gamma_order);
  const auto riem_m = riemann_matrices(gamma_m, gamma_order - 1);
  const Jet<Tensor3d> gamma = to_tensor_jet(gamma_m, gamma_order);
  const Jet<Tensor4d> riem = to_tensor_jet(riem_m, gamma_order - 1);

  f.christoffel = gamma.value();
  for (int e = 0; e < 4; ++e) {
    const Tensor3d& d = gamma[MultiIndex{}.with(e)];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) f.christoffel_d(a, b, c, e) = d(a, b, c);
  }
  f.riemann_up = riem.value();
  fill_curvature_derived(f);

  if (nd >= 1) {
    const auto cov1 = covariant_derivative<4>(riem, {true, false, false, false}, gamma);
    f.riemann_cov1 = cov1.value();
    if (nd >= 2) f.riemann_cov2 = covariant_derivative<5>(cov1, {true, false, false, false, false}, gamma).value();
  }
  return f;
}

PointFrame frame_from_curvature(const Matrix4d& g, const Tensor4d& riemann_down) {
  PointFrame f;
  f.g = g;
  check_nondegenerate(g);
  f.g_inv = g.inverse();
  f.det_g = g.determinant();
  f.dg.setZero();
  f.christoffel.setZero();
  f.christoffel_d.setZero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double s = 0.0;
          for (int e = 0; e < 4; ++e) s += f.g_inv(a, e) * riemann_down(e, b, c, d);
          f.riemann_up(a, b, c, d) = s;
        }
  fill_curvature_derived(f);
  return f;
}

Tensor4d weyl_conformal_at(const PointFrame& frame) { return frame.weyl; }

Tensor5d cov_deriv_riemann_at(const MetricSpec& spec, const Point& x) {
  FrameOptions opt;
  opt.riemann_derivatives = 1;
  opt.require_lorentz = false;
  return *frame_at(spec, x, opt).riemann_cov1;
}

Tensor3d cov_deriv_sym2_at(const MetricSpec& spec, const SymmetricField& field, const Point& x) {
  const Jet<Tensor3d> gamma = christoffel_jet(spec.metric_jet(x, 1), 0);
  const Jet<Matrix4d> a = field.jet(x, 1);
  Tensor<double, 2> zero;
  zero.setZero();
  Jet<Tensor<double, 2>> t(1, zero);
  for_each_multi_index(1, [&](const MultiIndex& m) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) t[m](i, j) = a[m](i, j);
  });
  return covariant_derivative<2>(t, {false, false}, gamma).value();
}

}  // namespace lorhol
