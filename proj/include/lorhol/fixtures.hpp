#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lorhol/bivector.hpp"
#include "lorhol/curvclass.hpp"
#include "lorhol/holonomy.hpp"
#include "lorhol/projective.hpp"

namespace lorhol {

// Conformal factor of the 2-metric h = e^f (dx² + dy²).
enum class HChoice { Delta, ExpXY, ExpX2Y2 };
std::string f_expression(HChoice h);  // "0", "x*y", "x^2+y^2"

struct FixtureBundle {
  std::string name;
  MetricSpec g;
  SinyukovPair pair;  // λ given explicitly
  Expr expected_chi;
  MetricSpec expected_g_prime;
  ParamEnv parameters;
  CurvatureClass expected_class = CurvatureClass::D;
  std::vector<HolonomyType> expected_holonomy;     // acceptable labels
  std::optional<Causal> constant_direction;        // causal character of the annihilated direction
};

// g = 2 du dv + u² e^f (dx² + dy²) with coordinates (u, v, x, y), and its three-parameter
// Sinyukov family. Requires 1 + 2cuv + 2e1 u + (e1² - c e2)u² > 0 on the sample box.
FixtureBundle fixture_r11(double c, double e1, double e2, HChoice h = HChoice::ExpX2Y2, double phi = 1.0);

// g = ε1 dt² + ε2 dz² + z² e^f (dx² + dy²) with coordinates (t, z, x, y).
FixtureBundle fixture_r10_r13(int eps1, int eps2, double c, double c2, double c3, HChoice h = HChoice::Delta,
                              double phi = 1.0);

// g = 2 du dv + b(u) √v du² + u² e^{f(x,y)} (dx² + dy²), coordinates (u, v, x, y); b and f are
// expression strings.
FixtureBundle fixture_r9_r14(const std::string& b, const std::string& f, double phi, double xi);

FixtureBundle fixture_minkowski();

// Named parameter choices used by the command line and the acceptance checks.
std::vector<std::string> fixture_names();
FixtureBundle fixture_by_name(const std::string& name);  // FixtureError for unknown names

SampleBox fixture_box_uvxy();  // u, v in [0.5, 2]; x, y in [-0.5, 0.5]
SampleBox fixture_box_tzxy();  // t in [-0.5, 0.5]; z in [0.5, 2]; x, y in [-0.5, 0.5]

}  // namespace lorhol
