#include "lorhol/fixtures.hpp"

#include <cmath>
#include <functional>

#include "lorhol/errors.hpp"

namespace lorhol {

namespace {

using Entries = std::array<std::array<std::string, 4>, 4>;

Entries zero_entries() {
  Entries e;
  for (auto& row : e) row.fill("0");
  return e;
}

ExprMatrix parse_entries(const Entries& e, const SymbolTable& symbols) { return parse_symmetric(e, symbols); }

OneForm parse_form(const std::array<std::string, 4>& f, const SymbolTable& symbols) {
  OneForm out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = parse_expr(f[i], symbols);
  return out;
}

// Minimum of fn over an n×n grid of the (i, j) coordinate ranges of the box.
double grid_min(const SampleBox& box, int i, int j, const std::function<double(double, double)>& fn, int n = 41) {
  double m = INFINITY;
  const auto [ilo, ihi] = box.ranges[static_cast<std::size_t>(i)];
  const auto [jlo, jhi] = box.ranges[static_cast<std::size_t>(j)];
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const double s = ilo + (ihi - ilo) * p / (n - 1), t = jlo + (jhi - jlo) * q / (n - 1);
      m = std::min(m, fn(s, t));
    }
  return m;
}

void reject_flat(const MetricSpec& g, const std::string& name) {
  for (const Point& x : sample_points(g, 6, 1)) {
    const PointFrame f = frame_at(g, x, {0, true});
    double m = 0.0;
    for (Eigen::Index i = 0; i < f.riemann_up.size(); ++i) m = std::max(m, std::abs(f.riemann_up.data()[i]));
    if (m > 1e-10) return;
  }
  throw FixtureError(name + ": this choice of h gives a flat metric");
}

std::string h_factor(HChoice h) {
  switch (h) {
    case HChoice::Delta: return "1";
    case HChoice::ExpXY: return "exp(x*y)";
    case HChoice::ExpX2Y2: return "exp(x^2+y^2)";
  }
  return "1";
}

FixtureBundle assemble(std::string name, const Coordinates& coords, const ParamEnv& params, const Entries& g,
                       const Entries& a, const std::array<std::string, 4>& lambda, const std::string& chi,
                       const Entries& g_prime, const std::vector<std::string>& constraints, const SampleBox& box) {
  FixtureBundle b;
  b.name = std::move(name);
  b.parameters = params;
  b.g = make_metric(coords, params, g, constraints, box);
  const SymbolTable symbols = b.g.symbols();
  b.pair.base = b.g;
  b.pair.a = parse_entries(a, symbols);
  b.pair.lambda = parse_form(lambda, symbols);
  b.expected_chi = parse_expr(chi, symbols);
  b.expected_g_prime = make_metric(coords, params, g_prime, constraints, box);
  return b;
}

}  // namespace

std::string f_expression(HChoice h) {
  switch (h) {
    case HChoice::Delta: return "0";
    case HChoice::ExpXY: return "x*y";
    case HChoice::ExpX2Y2: return "x^2+y^2";
  }
  return "0";
}

SampleBox fixture_box_uvxy() { return SampleBox{{{{0.5, 2.0}, {0.5, 2.0}, {-0.5, 0.5}, {-0.5, 0.5}}}}; }
SampleBox fixture_box_tzxy() { return SampleBox{{{{-0.5, 0.5}, {0.5, 2.0}, {-0.5, 0.5}, {-0.5, 0.5}}}}; }

FixtureBundle fixture_r11(double c, double e1, double e2, HChoice h, double phi) {
  if (!(phi > 0.0)) throw FixtureError("r11: phi must be positive");
  const SampleBox box = fixture_box_uvxy();
  const double lo = grid_min(box, 0, 1, [&](double u, double v) {
    return 1 + 2 * c * u * v + 2 * e1 * u + (e1 * e1 - c * e2) * u * u;
  });
  if (!(lo > 0.0)) throw FixtureError("r11: 1 + 2cuv + 2e1 u + (e1^2 - c e2)u^2 is not positive on the sample box");

  const std::string hx = "u^2*" + h_factor(h);
  const std::string br = "(1+2*c*u*v+2*e1*u+(e1^2-c*e2)*u^2)";
  const std::string F = "(1/(phi^4*" + br + "))";
  const std::string k3F2 = "phi^3*" + F + "^2";

  Entries g = zero_entries(), a = zero_entries(), gp = zero_entries();
  g[1][0] = "1";
  g[2][2] = g[3][3] = hx;
  a[0][0] = "phi*(c*v^2+2*e1*v+e2)";
  a[1][1] = "phi*c*u^2";
  a[1][0] = "phi*(1+e1*u+c*u*v)";
  a[2][2] = a[3][3] = "phi*" + hx;
  gp[0][0] = "-" + k3F2 + "*(c*v^2+2*e1*v+e2)";
  gp[1][1] = "-" + k3F2 + "*c*u^2";
  gp[1][0] = F + "/phi-" + k3F2 + "*u*(c*v+e1+(e1^2-c*e2)*u)";
  gp[2][2] = gp[3][3] = F + "/phi*" + hx;

  FixtureBundle b = assemble("r11", {"u", "v", "x", "y"}, {{"c", c}, {"e1", e1}, {"e2", e2}, {"phi", phi}}, g, a,
                             {"phi*(c*v+e1)", "phi*c*u", "0", "0"}, "0.5*ln" + F, gp, {"u", br}, box);
  reject_flat(b.g, "r11");
  b.expected_class = CurvatureClass::D;
  b.expected_holonomy = {HolonomyType::R3, HolonomyType::R8, HolonomyType::R11};
  b.constant_direction = Causal::Null;
  return b;
}

FixtureBundle fixture_r10_r13(int eps1, int eps2, double c, double c2, double c3, HChoice h, double phi) {
  // h is positive definite, so Lorentz signature needs exactly one negative sign.
  if ((eps1 != 1 && eps1 != -1) || (eps2 != 1 && eps2 != -1) || eps1 == eps2)
    throw FixtureError("r10_r13: (eps1, eps2) must be (-1, 1) or (1, -1)");
  if (!(phi > 0.0)) throw FixtureError("r10_r13: phi must be positive");
  const SampleBox box = fixture_box_tzxy();
  const double e1 = eps1, e2 = eps2;
  const double lo = grid_min(box, 0, 1, [&](double t, double z) {
    return 1 + e2 * (c + e1 * (c3 * c - c2 * c2)) * z * z + e1 * (c * t * t + 2 * c2 * t + c3);
  });
  if (!(lo > 0.0)) throw FixtureError("r10_r13: the determinant factor of a is not positive on the sample box");

  const std::string hx = "z^2*" + h_factor(h);
  const std::string B = "(c*t^2+2*c2*t+c3)";
  const std::string br = "(1+eps2*(c+eps1*(c3*c-c2^2))*z^2+eps1*" + B + ")";
  const std::string F = "(1/(phi^4*" + br + "))";
  const std::string k3F2 = "phi^3*" + F + "^2";

  Entries g = zero_entries(), a = zero_entries(), gp = zero_entries();
  g[0][0] = "eps1";
  g[1][1] = "eps2";
  g[2][2] = g[3][3] = hx;
  a[0][0] = "phi*(eps1+" + B + ")";
  a[1][1] = "phi*(eps2+c*z^2)";
  a[1][0] = "phi*eps1*eps2*(c*t*z+c2*z)";
  a[2][2] = a[3][3] = "phi*" + hx;
  gp[0][0] = F + "/phi*eps1-" + k3F2 + "*(" + B + "+eps2*(c*c3-c2^2)*z^2)";
  gp[1][1] = F + "/phi*eps2-" + k3F2 + "*(c+eps1*(c*c3-c2^2))*z^2";
  gp[1][0] = "-" + k3F2 + "*eps1*eps2*(c*t+c2)*z";
  gp[2][2] = gp[3][3] = F + "/phi*" + hx;

  const ParamEnv params{{"eps1", e1}, {"eps2", e2}, {"c", c}, {"c2", c2}, {"c3", c3}, {"phi", phi}};
  FixtureBundle b = assemble(eps1 < 0 ? "r13" : "r10", {"t", "z", "x", "y"}, params, g, a,
                             {"phi*eps1*(c*t+c2)", "phi*eps2*c*z", "0", "0"}, "0.5*ln" + F, gp, {"z", br}, box);
  reject_flat(b.g, b.name);
  b.expected_class = CurvatureClass::D;
  b.expected_holonomy = {eps1 < 0 ? HolonomyType::R13 : HolonomyType::R10};
  b.constant_direction = eps1 < 0 ? Causal::Timelike : Causal::Spacelike;
  return b;
}

FixtureBundle fixture_r9_r14(const std::string& b_src, const std::string& f_src, double phi, double xi) {
  if (!(phi > 0.0)) throw FixtureError("r9_r14: phi must be positive");
  const SampleBox box = fixture_box_uvxy();
  const auto [ulo, uhi] = box.ranges[0];
  if (!(1 + xi * ulo > 0.0) || !(1 + xi * uhi > 0.0))
    throw FixtureError("r9_r14: 1 + xi*u vanishes on the sample box");

  const SymbolTable symbols{{"u", "v", "x", "y"}, {"phi", "xi"}};
  const Expr b_expr = parse_expr(b_src, symbols);
  const Expr f_expr = parse_expr(f_src, symbols);
  for (const auto& s : coordinates_in(b_expr))
    if (s != "u") throw FixtureError("r9_r14: b may depend on u only");
  for (const auto& s : coordinates_in(f_expr))
    if (s != "x" && s != "y") throw FixtureError("r9_r14: f may depend on x and y only");

  const std::string b = "(" + b_src + ")", hx = "u^2*exp(" + f_src + ")";
  const std::string F = "(1/(phi^4*(1+xi*u)^2))";
  const std::string k3F2 = "phi^3*" + F + "^2";
  Entries g = zero_entries(), a = zero_entries(), gp = zero_entries();
  g[0][0] = b + "*sqrt(v)";
  g[1][0] = "1";
  g[2][2] = g[3][3] = hx;
  a[0][0] = "phi*(" + b + "*sqrt(v)+xi*(2*v+u*" + b + "*sqrt(v)))";
  a[1][0] = "phi*(1+xi*u)";
  a[2][2] = a[3][3] = "phi*" + hx;
  gp[0][0] = F + "/phi*" + b + "*sqrt(v)-" + k3F2 + "*xi*(u*(1+xi*u)*" + b + "*sqrt(v)+2*v)";
  gp[1][0] = F + "/phi-" + k3F2 + "*xi*u*(1+xi*u)";
  gp[2][2] = gp[3][3] = F + "/phi*" + hx;

  FixtureBundle out = assemble("r9_r14", {"u", "v", "x", "y"}, {{"phi", phi}, {"xi", xi}}, g, a,
                               {"phi*xi", "0", "0", "0"}, "0.5*ln" + F, gp, {"u", "v", "1+xi*u"}, box);

  // b ≡ 0 reduces to the class D family; otherwise R9 exactly when f is harmonic.
  bool b_zero = true, harmonic = true;
  const Expr lap = differentiate(differentiate(f_expr, "x"), "x") + differentiate(differentiate(f_expr, "y"), "y");
  for (const Point& x : sample_points(out.g, 8, 3)) {
    if (std::abs(eval_expr(b_expr, out.g.coordinates(), x, out.parameters)) > 1e-14) b_zero = false;
    if (std::abs(eval_expr(lap, out.g.coordinates(), x, out.parameters)) > 1e-12) harmonic = false;
  }
  if (b_zero) {
    out.name = "r9_b0";
    out.expected_class = CurvatureClass::D;
    out.expected_holonomy = {HolonomyType::R3, HolonomyType::R8, HolonomyType::R11};
    out.constant_direction = Causal::Null;
  } else {
    out.name = harmonic ? "r9" : "r14";
    out.expected_class = CurvatureClass::A;
    out.expected_holonomy = {harmonic ? HolonomyType::R9 : HolonomyType::R14};
  }
  reject_flat(out.g, out.name);
  return out;
}

FixtureBundle fixture_minkowski() {
  Entries g = zero_entries();
  g[0][0] = "-1";
  g[1][1] = g[2][2] = g[3][3] = "1";
  FixtureBundle b = assemble("minkowski", {"t", "x", "y", "z"}, {}, g, g, {"0", "0", "0", "0"}, "0", g, {},
                             SampleBox{{{{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}}}});
  b.expected_class = CurvatureClass::O;
  b.expected_holonomy = {HolonomyType::R1};
  return b;
}

std::vector<std::string> fixture_names() {
  return {"minkowski", "r11", "r11_c0", "r13", "r10", "r9", "r14", "r9_b0"};
}

FixtureBundle fixture_by_name(const std::string& name) {
  FixtureBundle b;
  if (name == "minkowski") return fixture_minkowski();
  if (name == "r11") return fixture_r11(1.0, 0.3, 0.1, HChoice::ExpX2Y2);
  if (name == "r11_c0") {
    b = fixture_r11(0.0, 1.0, 0.0, HChoice::ExpX2Y2);
    b.name = name;
    return b;
  }
  if (name == "r13") return fixture_r10_r13(-1, 1, 1.0, 0.0, 0.2, HChoice::Delta);
  if (name == "r10") return fixture_r10_r13(1, -1, -0.2, 0.1, 0.0, HChoice::Delta);
  if (name == "r9") return fixture_r9_r14("1+u^2", "x*y", 1.0, 0.5);
  if (name == "r14") return fixture_r9_r14("1+u^2", "x^2", 2.0, 0.25);
  if (name == "r9_b0") return fixture_r9_r14("0", "x^2+y^2", 1.0, 0.5);
  throw FixtureError("unknown fixture '" + name + "'");
}

}  // namespace lorhol
