#include <cmath>
#include <random>

#include "doctest.h"
#include "lorhol/errors.hpp"
#include "lorhol/fixtures.hpp"
#include "oracles.hpp"

using namespace lorhol;

namespace {

struct Closure {
  double sinyukov = 0.0, chi = 0.0, g_prime = 0.0;
  bool lorentz = true;
};

Closure closure(const FixtureBundle& b, std::size_t n, std::uint64_t seed) {
  const auto pts = sample_points(b.g, n, seed);
  Closure out;
  out.sinyukov = sinyukov_residual(b.pair, pts).residual.max;
  const ProjectivePair p = invert_pair(b.pair, pts);
  for (const Point& x : pts) {
    out.chi = std::max(out.chi, std::abs(eval_expr(*p.chi, b.g.coordinates(), x, b.parameters) -
                                         eval_expr(b.expected_chi, b.g.coordinates(), x, b.parameters)));
    const Matrix4d gp = p.g_prime.metric_jet(x, 0).value(), ex = b.expected_g_prime.metric_jet(x, 0).value();
    out.g_prime = std::max(out.g_prime, (gp - ex).cwiseAbs().maxCoeff() / ex.cwiseAbs().maxCoeff());
    if (!signature_of(ex).lorentz()) out.lorentz = false;
  }
  return out;
}

bool mentions_only_declared(const Expr& e, const FixtureBundle& b) {
  for (const auto& c : coordinates_in(e))
    if (std::find(b.g.coordinates().begin(), b.g.coordinates().end(), c) == b.g.coordinates().end()) return false;
  for (const auto& p : parameters_in(e))
    if (!b.parameters.count(p)) return false;
  return true;
}

}  // namespace

TEST_CASE("shipped fixtures close at 100 points") {
  for (const auto& name : fixture_names()) {
    CAPTURE(name);
    const FixtureBundle b = fixture_by_name(name);
    const Closure c = closure(b, 100, 7);
    CHECK(c.sinyukov < 1e-9);
    CHECK(c.chi <= 1e-9);
    CHECK(c.g_prime <= 1e-8);
    CHECK(c.lorentz);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j <= i; ++j) {
        CHECK(mentions_only_declared(b.g.components()(i, j), b));
        CHECK(mentions_only_declared(b.pair.a(i, j), b));
        CHECK(mentions_only_declared(b.expected_g_prime.components()(i, j), b));
      }
    for (const Expr& e : *b.pair.lambda) CHECK(mentions_only_declared(e, b));
    CHECK(mentions_only_declared(b.expected_chi, b));
  }
}

TEST_CASE("random parameter draws close for every family") {
  std::mt19937_64 rng(2024);
  auto u = [&](double lo, double hi) { return oracle::uniform(rng, lo, hi); };

  SUBCASE("r11") {
    int accepted = 0;
    while (accepted < 50) {
      const double c = u(-1, 1), e1 = u(-0.5, 1), e2 = u(-1, 1), phi = u(0.5, 2);
      FixtureBundle b;
      try {
        b = fixture_r11(c, e1, e2, HChoice::ExpX2Y2, phi);
      } catch (const FixtureError&) {
        continue;
      }
      ++accepted;
      CAPTURE(c);
      CAPTURE(e1);
      CAPTURE(e2);
      const Closure cl = closure(b, 40, static_cast<std::uint64_t>(accepted));
      CHECK(cl.sinyukov < 1e-9);
      CHECK(cl.chi <= 1e-9);
      CHECK(cl.g_prime <= 1e-8);
      CHECK(lemma1_checks(b.pair, sample_points(b.g, 20, 9)).c == doctest::Approx(phi * c).epsilon(1e-8).scale(1e-8));
    }
  }
  SUBCASE("r10_r13") {
    int accepted = 0;
    while (accepted < 50) {
      const int eps1 = rng() % 2 ? 1 : -1;
      const double c = u(-1, 1), c2 = u(-0.5, 0.5), c3 = u(-0.5, 0.5), phi = u(0.5, 2);
      FixtureBundle b;
      try {
        b = fixture_r10_r13(eps1, -eps1, c, c2, c3, HChoice::Delta, phi);
      } catch (const FixtureError&) {
        continue;
      }
      ++accepted;
      CAPTURE(eps1);
      CAPTURE(c);
      const Closure cl = closure(b, 40, static_cast<std::uint64_t>(accepted));
      CHECK(cl.sinyukov < 1e-9);
      CHECK(cl.chi <= 1e-9);
      CHECK(cl.g_prime <= 1e-8);
      CHECK(lemma1_checks(b.pair, sample_points(b.g, 20, 9)).c == doctest::Approx(phi * c).epsilon(1e-8).scale(1e-8));
    }
  }
  SUBCASE("r9_r14") {
    const char* bs[] = {"1+u^2", "u", "3-u", "2*u^3"};
    const char* fs[] = {"x*y", "x^2", "x^2+y^2", "x^2-y^2", "sin(x)*exp(y)"};
    int accepted = 0;
    while (accepted < 50) {
      const double phi = u(0.5, 2), xi = u(-0.4, 1);
      FixtureBundle b;
      try {
        b = fixture_r9_r14(bs[rng() % 4], fs[rng() % 5], phi, xi);
      } catch (const FixtureError&) {
        continue;
      }
      ++accepted;
      CAPTURE(xi);
      const Closure cl = closure(b, 40, static_cast<std::uint64_t>(accepted));
      CHECK(cl.sinyukov < 1e-9);
      CHECK(cl.chi <= 1e-9);
      CHECK(cl.g_prime <= 1e-8);
    }
  }
}

TEST_CASE("special parameter values") {
  SUBCASE("all deformation terms off") {
    const FixtureBundle b = fixture_r11(0.0, 0.0, 0.0);
    for (const Point& x : sample_points(b.g, 10, 1)) {
      const Matrix4d g = b.g.metric_jet(x, 0).value();
      CHECK((SymmetricField(b.pair.a, b.g.coordinates(), b.parameters).value(x) - g).cwiseAbs().maxCoeff() == 0.0);
      CHECK((b.expected_g_prime.metric_jet(x, 0).value() - g).cwiseAbs().maxCoeff() <= 1e-15);
      for (const Expr& e : *b.pair.lambda) CHECK(eval_expr(e, b.g.coordinates(), x, b.parameters) == 0.0);
    }
    const FixtureBundle d = fixture_r10_r13(-1, 1, 0.0, 0.0, 0.0);
    const Point x(0.1, 1.0, 0.2, 0.3);
    CHECK((d.expected_g_prime.metric_jet(x, 0).value() - d.g.metric_jet(x, 0).value()).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("c = 0 makes lambda a constant multiple of du") {
    const FixtureBundle b = fixture_by_name("r11_c0");
    for (const Point& x : sample_points(b.g, 10, 1)) {
      CHECK(eval_expr((*b.pair.lambda)[0], b.g.coordinates(), x, b.parameters) == 1.0);
      for (int i = 1; i < 4; ++i) CHECK(eval_expr((*b.pair.lambda)[static_cast<std::size_t>(i)], b.g.coordinates(), x, b.parameters) == 0.0);
    }
  }
}

TEST_CASE("invalid fixture parameters") {
  CHECK_THROWS_AS(fixture_r11(1.0, 0.3, 0.1, HChoice::Delta), FixtureError);
  CHECK_THROWS_AS(fixture_r11(1.0, 0.3, 0.1, HChoice::ExpXY), FixtureError);
  CHECK_THROWS_AS(fixture_r11(-2.0, 0.0, 0.0), FixtureError);  // determinant factor changes sign
  CHECK_THROWS_AS(fixture_r10_r13(1, 1, 0.5, 0.1, 0.0), FixtureError);
  CHECK_THROWS_AS(fixture_r10_r13(-1, -1, 0.5, 0.1, 0.0), FixtureError);
  CHECK_THROWS_AS(fixture_r10_r13(2, 1, 0.5, 0.1, 0.0), FixtureError);
  CHECK_THROWS_AS(fixture_r9_r14("1+u^2", "x*y", 1.0, -1.0), FixtureError);
  CHECK_THROWS_AS(fixture_r9_r14("1+v", "x*y", 1.0, 0.5), FixtureError);
  CHECK_THROWS_AS(fixture_r9_r14("1+u^2", "x*y", -1.0, 0.5), FixtureError);
  CHECK_THROWS_AS(fixture_by_name("r99"), FixtureError);
}

TEST_CASE("fixture curvature classes and holonomy") {
  for (const auto& name : fixture_names()) {
    CAPTURE(name);
    const FixtureBundle b = fixture_by_name(name);
    for (const Point& x : sample_points(b.g, 12, 5)) {
      const CurvatureClassReport r = classify_curvature(frame_at(b.g, x, {0, true}));
      CHECK(r.cls == b.expected_class);
      if (r.cls == CurvatureClass::D && b.name != "minkowski") {
        REQUIRE(r.d_bivector);
        CHECK(theta(*r.d_bivector) > 0.0);  // spacelike blade
      }
    }
    const HolonomySurvey s = holonomy_survey(b.g, 12, 5, 1);
    CHECK(std::find(b.expected_holonomy.begin(), b.expected_holonomy.end(), s.aggregate.type) != b.expected_holonomy.end());
    if (b.constant_direction) {
      REQUIRE(s.aggregate.constant.size() == 1);
      CHECK(s.aggregate.constant[0].causal == *b.constant_direction);
    }
  }
}

TEST_CASE("Minkowski baseline") {
  const FixtureBundle m = fixture_minkowski();
  const Point x(0.1, -0.2, 0.3, 0.4);
  const PointFrame f = frame_at(m.g, x);
  CHECK(classify_curvature(f).cls == CurvatureClass::O);
  const Tensor4d w = weyl_projective_at(f);
  for (Eigen::Index i = 0; i < w.size(); ++i) CHECK(w.data()[i] == 0.0);
  CHECK(holonomy_survey(m.g, 4, 1, 1).aggregate.type == HolonomyType::R1);
}
