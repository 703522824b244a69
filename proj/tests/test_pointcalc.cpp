#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "lorhol/metric.hpp"
#include "oracles.hpp"

using namespace lorhol;

namespace {

MetricSpec minkowski() {
  return make_metric({"t", "x", "y", "z"}, {}, {{{"-1", "", "", ""}, {"0", "1", "", ""}, {"0", "0", "1", ""}, {"0", "0", "0", "1"}}});
}

// 2 du dv + b sqrt(v) du^2 + u^2 e^f (dx^2 + dy^2)
MetricSpec metric_a1(const std::string& b, const std::string& f) {
  const std::string h = "u^2*exp(" + f + ")";
  return make_metric({"u", "v", "x", "y"}, {},
                     {{{"(" + b + ")*sqrt(v)", "", "", ""}, {"1", "0", "", ""}, {"0", "0", h, ""}, {"0", "0", "0", h}}},
                     {"v", "u"});
}

double rel_max_diff(const Tensor4d& a, const Tensor4d& b) {
  const Tensor4d d = a - b;
  return max_abs<double, 4>(d) / std::max(1.0, max_abs<double, 4>(b));
}

void check_frame_invariants(const PointFrame& f) {
  const double scale = std::max(1.0, max_abs<double, 4>(f.riemann_down));
  double sym = 0.0, bianchi = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const double r = f.riemann_down(a, b, c, d);
          sym = std::max({sym, std::abs(r + f.riemann_down(b, a, c, d)), std::abs(r + f.riemann_down(a, b, d, c)),
                          std::abs(r - f.riemann_down(c, d, a, b))});
          bianchi = std::max(bianchi, std::abs(r + f.riemann_down(a, c, d, b) + f.riemann_down(a, d, b, c)));
        }
  CHECK(sym <= 1e-9 * scale);
  CHECK(bianchi <= 1e-9 * scale);
  CHECK((f.g_inv * f.g - Matrix4d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs((f.g_inv.cwiseProduct(f.ricci_tracefree)).sum()) <= 1e-10 * std::max(1.0, std::abs(f.ricci_scalar)));
  double weyl_trace = 0.0;
  for (int b = 0; b < 4; ++b)
    for (int d = 0; d < 4; ++d) {
      double s = 0.0;
      for (int a = 0; a < 4; ++a) s += f.weyl(a, b, a, d);
      weyl_trace = std::max(weyl_trace, std::abs(s));
    }
  CHECK(weyl_trace <= 1e-10 * scale);
}

}  // namespace

TEST_CASE("Minkowski space is flat") {
  const PointFrame f = frame_at(minkowski(), Point(0.1, 0.2, 0.3, 0.4));
  CHECK(max_abs<double, 3>(f.christoffel) == 0.0);
  CHECK(max_abs<double, 4>(f.riemann_up) == 0.0);
  CHECK(max_abs<double, 5>(*f.riemann_cov1) == 0.0);
  CHECK(max_abs<double, 4>(weyl_conformal_at(f)) == 0.0);
  CHECK(signature_at(minkowski(), Point::Zero()).lorentz());
}

TEST_CASE("Christoffel symbols of the null-coordinate metric family") {
  const std::string h = "u^2*exp(x*y)";
  const MetricSpec g = make_metric({"u", "v", "x", "y"}, {}, {{{"0", "", "", ""}, {"1", "0", "", ""}, {"0", "0", h, ""}, {"0", "0", "0", h}}});
  const PointFrame f = frame_at(g, Point(1, 0, 0, 0));
  for (int a = 2; a < 4; ++a)
    for (int b = 2; b < 4; ++b) CHECK(f.christoffel(1, a, b) == doctest::Approx(-f.g(a, b) / 1.0));
  const PointFrame f2 = frame_at(g, Point(1.7, 0.3, 0.2, -0.4));
  for (int a = 2; a < 4; ++a)
    for (int b = 2; b < 4; ++b) CHECK(f2.christoffel(1, a, b) == doctest::Approx(-f2.g(a, b) / 1.7));
}

TEST_CASE("Riemann tensor matches a finite-difference oracle") {
  const MetricSpec g = metric_a1("1", "x*y");
  const Point x(1, 1, 0, 0);
  const PointFrame f = frame_at(g, x);
  const Tensor4d fd = oracle::riemann_fd(g, x);
  CHECK(rel_max_diff(f.riemann_up, fd) < 1e-6);
  CHECK(max_abs<double, 4>(f.riemann_up) > 1e-2);

  // and at a generic point of a less symmetric metric
  const MetricSpec g2 = metric_a1("1+u^2", "x^2");
  const Point x2(0.8, 1.4, 0.3, -0.6);
  CHECK(rel_max_diff(frame_at(g2, x2).riemann_up, oracle::riemann_fd(g2, x2)) < 1e-6);

  const Tensor3d gamma_fd = oracle::christoffel_fd(g2, x2);
  const Tensor3d diff = frame_at(g2, x2).christoffel - gamma_fd;
  CHECK(max_abs<double, 3>(diff) < 1e-8);
}

TEST_CASE("covariant derivative of Riemann matches finite differences and satisfies Bianchi") {
  const MetricSpec g = metric_a1("1+u^2", "x*y");
  const Point x(1.2, 0.9, 0.2, 0.5);
  const PointFrame f = frame_at(g, x);
  const Tensor5d& cov = *f.riemann_cov1;

  std::array<Tensor4d, 4> dr;
  const double h = 1e-3;
  for (int e = 0; e < 4; ++e)
    dr[static_cast<std::size_t>(e)] = oracle::central_difference(
        [&](const Point& p) -> Tensor4d { return frame_at(g, p, {0, true}).riemann_up; }, x, e, h);
  double worst = 0.0, bianchi = 0.0;
  const double scale = std::max(1.0, max_abs<double, 5>(cov));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d)
          for (int e = 0; e < 4; ++e) {
            double ref = dr[static_cast<std::size_t>(e)](a, b, c, d);
            for (int k = 0; k < 4; ++k)
              ref += f.christoffel(a, e, k) * f.riemann_up(k, b, c, d) - f.christoffel(k, e, b) * f.riemann_up(a, k, c, d) -
                     f.christoffel(k, e, c) * f.riemann_up(a, b, k, d) - f.christoffel(k, e, d) * f.riemann_up(a, b, c, k);
            worst = std::max(worst, std::abs(ref - cov(a, b, c, d, e)));
            bianchi = std::max(bianchi, std::abs(cov(a, b, c, d, e) + cov(a, b, d, e, c) + cov(a, b, e, c, d)));
          }
  CHECK(worst / scale < 1e-6);
  CHECK(bianchi / scale < 1e-8);
}

TEST_CASE("where the Christoffel symbols vanish the covariant derivative is the partial derivative") {
  // eta + cubic perturbation: Γ = 0 at the origin, ∂Riem nonzero there
  const MetricSpec g = make_metric({"t", "x", "y", "z"}, {},
                                   {{{"-1 + 0.1*x^3", "", "", ""},
                                     {"0.05*t*y^2", "1 + 0.2*y^3", "", ""},
                                     {"0", "0.1*x*z*t", "1 + 0.07*t^3", ""},
                                     {"0", "0", "0.03*x^2*y", "1 + 0.1*t*x*y"}}});
  const Point o = Point::Zero();
  const PointFrame f = frame_at(g, o);
  CHECK(max_abs<double, 3>(f.christoffel) < 1e-15);
  const double h = 1e-3;
  double worst = 0.0;
  for (int e = 0; e < 4; ++e) {
    const Tensor4d dr = oracle::central_difference(
        [&](const Point& p) -> Tensor4d { return frame_at(g, p, {0, true}).riemann_up; }, o, e, h);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) worst = std::max(worst, std::abs(dr(a, b, c, d) - (*f.riemann_cov1)(a, b, c, d, e)));
  }
  CHECK(max_abs<double, 5>(*f.riemann_cov1) > 0.1);
  CHECK(worst < 1e-8);
}

TEST_CASE("frame invariants hold at random points of several metrics") {
  std::mt19937_64 rng(5);
  const std::vector<MetricSpec> metrics{metric_a1("1+u^2", "x*y"), metric_a1("1+u^2", "x^2"), metric_a1("0", "x^2+y^2"),
                                        metric_a1("1", "x*y")};
  for (const auto& g : metrics) {
    const auto pts = sample_points(g, 100, rng());
    REQUIRE(pts.size() == 100);
    for (const auto& x : pts) {
      const PointFrame f = frame_at(g, x);
      check_frame_invariants(f);
      const Tensor3d dg = cov_deriv_sym2_at(g, g.field(), x);
      CHECK(max_abs<double, 3>(dg) < 1e-10 * std::max(1.0, f.g.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("second covariant derivative is consistent with the first") {
  const MetricSpec g = metric_a1("1+u^2", "x^2");
  const Point x(1.1, 0.7, 0.3, -0.2);
  FrameOptions opt;
  opt.riemann_derivatives = 2;
  const PointFrame f = frame_at(g, x, opt);
  const double h = 1e-3;
  double worst = 0.0;
  const double scale = std::max(1.0, max_abs<double, 6>(*f.riemann_cov2));
  for (int q = 0; q < 4; ++q) {
    const Tensor5d d = oracle::central_difference([&](const Point& p) -> Tensor5d { return *frame_at(g, p).riemann_cov1; },
                                                  x, q, h);
    for (int i = 0; i < 1024; ++i) {
      int idx[5];
      for (int s = 0, r = i; s < 5; ++s, r /= 4) idx[s] = r % 4;
      double ref = d.data()[i];
      const Tensor5d& c1 = *f.riemann_cov1;
      for (int k = 0; k < 4; ++k) {
        ref += f.christoffel(idx[0], q, k) * c1(k, idx[1], idx[2], idx[3], idx[4]);
        ref -= f.christoffel(k, q, idx[1]) * c1(idx[0], k, idx[2], idx[3], idx[4]);
        ref -= f.christoffel(k, q, idx[2]) * c1(idx[0], idx[1], k, idx[3], idx[4]);
        ref -= f.christoffel(k, q, idx[3]) * c1(idx[0], idx[1], idx[2], k, idx[4]);
        ref -= f.christoffel(k, q, idx[4]) * c1(idx[0], idx[1], idx[2], idx[3], k);
      }
      worst = std::max(worst, std::abs(ref - (*f.riemann_cov2)(idx[0], idx[1], idx[2], idx[3], idx[4], q)));
    }
  }
  CHECK(worst / scale < 1e-6);
}

TEST_CASE("signature and degeneracy detection") {
  const MetricSpec g = metric_a1("1+u^2", "x*y");
  CHECK(signature_at(g, Point(1, 1, 0, 0)).signs == std::array<int, 4>{-1, 1, 1, 1});
  const MetricSpec euclid = make_metric({"a", "b", "c", "d"}, {}, {{{"1", "", "", ""}, {"0", "1", "", ""}, {"0", "0", "1", ""}, {"0", "0", "0", "1"}}});
  CHECK_FALSE(signature_at(euclid, Point::Zero()).lorentz());
  CHECK_THROWS_AS(frame_at(euclid, Point::Zero()), SignatureError);
  CHECK_THROWS_AS(frame_at(g, Point(0, 1, 0, 0)), DegenerateMetricError);  // u = 0
  CHECK_THROWS_AS(frame_at(g, Point(1, -1, 0, 0)), DomainError);           // sqrt(v), v < 0
  CHECK_FALSE(g.admissible(Point(1, -1, 0, 0)));
}

TEST_CASE("Einstein spaces have vanishing E") {
  const MetricSpec ds = make_metric({"t", "x", "y", "z"}, {},
                                    {{{"-1", "", "", ""}, {"0", "exp(2*t)", "", ""}, {"0", "0", "exp(2*t)", ""}, {"0", "0", "0", "exp(2*t)"}}});
  const PointFrame f = frame_at(ds, Point(0.3, 0.1, 0.2, 0.3));
  CHECK(max_abs<double, 4>(f.e_tensor) < 1e-12);
  CHECK(max_abs<double, 4>(f.weyl) < 1e-12);
  CHECK(f.ricci_scalar == doctest::Approx(12.0));
}

TEST_CASE("frame construction is bitwise deterministic") {
  const MetricSpec g = metric_a1("1+u^2", "x^2");
  const Point x(0.9, 1.3, 0.2, 0.1);
  const PointFrame a = frame_at(g, x), b = frame_at(g, x);
  CHECK(std::memcmp(a.riemann_up.data(), b.riemann_up.data(), sizeof(double) * 256) == 0);
  CHECK(std::memcmp(a.riemann_cov1->data(), b.riemann_cov1->data(), sizeof(double) * 1024) == 0);
}

TEST_CASE("synthetic frames take the curvature as given") {
  Tensor4d r;
  r.setZero();
  r(0, 1, 0, 1) = 1;
  r(1, 0, 1, 0) = 1;
  r(0, 1, 1, 0) = -1;
  r(1, 0, 0, 1) = -1;
  const Matrix4d eta = Eigen::Vector4d(-1, 1, 1, 1).asDiagonal();
  const PointFrame f = frame_from_curvature(eta, r);
  CHECK(f.riemann_up(0, 1, 0, 1) == -1.0);
  check_frame_invariants(f);
}
