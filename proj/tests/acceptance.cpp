// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when all pass.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "lorhol/errors.hpp"
#include "lorhol/fixtures.hpp"
#include "lorhol/specfile.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace lorhol;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr double kSinyukovTol = 1e-9;
constexpr double kChiTol = 1e-9;
constexpr double kGPrimeRelTol = 1e-8;
constexpr double kConcircularTol = 1e-8;
constexpr double kWeylTol = 1e-8;
constexpr double kCurvatureTol = 1e-8;
constexpr double kOmegaTol = 1e-9;
constexpr double kProjectiveTol = 1e-8;
constexpr double kGeodesicTol = 1e-6;
constexpr double kGeodesicFloor = 1e-10;
constexpr double kGeodesicControl = 1e-2;
constexpr double kTime1 = 5.0, kTime4 = 10.0, kTime6 = 30.0, kTime8 = 60.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      detail << "FAILED " << what;
      pass = false;
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string secs(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f s", v);
  return buf;
}

double now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

struct Closure {
  double sinyukov = 0.0, chi = 0.0, g_prime = 0.0;
};

// Residual, χ and g' agreement of a fixture bundle at the given points.
Closure closure(const FixtureBundle& b, const std::vector<Point>& pts) {
  Closure out;
  out.sinyukov = sinyukov_residual(b.pair, pts).residual.max;
  const ProjectivePair p = invert_pair(b.pair, pts);
  for (const Point& x : pts) {
    out.chi = std::max(out.chi, std::abs(eval_expr(*p.chi, b.g.coordinates(), x, b.parameters) -
                                         eval_expr(b.expected_chi, b.g.coordinates(), x, b.parameters)));
    const Matrix4d gp = p.g_prime.metric_jet(x, 0).value(), ex = b.expected_g_prime.metric_jet(x, 0).value();
    out.g_prime = std::max(out.g_prime, (gp - ex).cwiseAbs().maxCoeff() / ex.cwiseAbs().maxCoeff());
  }
  return out;
}

void merge(Closure& into, const Closure& c) {
  into.sinyukov = std::max(into.sinyukov, c.sinyukov);
  into.chi = std::max(into.chi, c.chi);
  into.g_prime = std::max(into.g_prime, c.g_prime);
}

void require_closure(Outcome& o, const Closure& c) {
  o.require(c.sinyukov < kSinyukovTol, "sinyukov residual " + sci(c.sinyukov));
  o.require(c.chi <= kChiTol, "chi error " + sci(c.chi));
  o.require(c.g_prime <= kGPrimeRelTol, "g' relative error " + sci(c.g_prime));
}

// --- criteria ------------------------------------------------------------------------------

void criterion1(Outcome& o) {
  const double t0 = now();
  const FixtureBundle b = fixture_r9_r14("1+u^2", "x*y", 2.0, 0.25);
  const auto pts = sample_points(b.g, 100, 1);
  const Closure c = closure(b, pts);
  // χ in closed form, independently of the bundle's own expression; κ = 1/φ.
  double chi_closed = 0.0;
  const ProjectivePair p = invert_pair(b.pair, pts);
  for (const Point& x : pts) {
    const double kappa = 0.5, xi = 0.25, u = x[0];
    const double expected = 0.5 * std::log(std::pow(kappa, 4) / ((1 + xi * u) * (1 + xi * u)));
    chi_closed = std::max(chi_closed, std::abs(eval_expr(*p.chi, b.g.coordinates(), x, b.parameters) - expected));
  }
  const double dt = now() - t0;
  require_closure(o, c);
  o.require(chi_closed <= kChiTol, "closed-form chi error " + sci(chi_closed));
  o.require(dt < kTime1, "runtime " + secs(dt));
  o.detail << (o.pass ? "" : "; ") << "residual " << sci(c.sinyukov) << ", chi " << sci(std::max(c.chi, chi_closed))
           << ", g' rel " << sci(c.g_prime) << ", " << secs(dt);
}

void criterion2(Outcome& o) {
  std::mt19937_64 rng(101);
  auto u = [&](double lo, double hi) { return oracle::uniform(rng, lo, hi); };
  Closure worst;
  double c_err = 0.0;
  int draws[3] = {0, 0, 0};
  auto lemma_c = [&](const FixtureBundle& b, double c) {
    const double got = lemma1_checks(b.pair, sample_points(b.g, 20, 9)).c;
    c_err = std::max(c_err, std::abs(got - c) / std::max(1.0, std::abs(c)));
  };
  while (draws[0] < 50) {
    const double c = u(-1, 1), e1 = u(-0.5, 1), e2 = u(-1, 1);
    FixtureBundle b;
    try {
      b = fixture_r11(c, e1, e2);
    } catch (const FixtureError&) {
      continue;
    }
    merge(worst, closure(b, sample_points(b.g, 100, static_cast<std::uint64_t>(++draws[0]))));
    lemma_c(b, c);
  }
  while (draws[1] < 50) {
    const int eps1 = rng() % 2 ? 1 : -1;
    const double c = u(-1, 1), c2 = u(-0.5, 0.5), c3 = u(-0.5, 0.5);
    FixtureBundle b;
    try {
      b = fixture_r10_r13(eps1, -eps1, c, c2, c3);
    } catch (const FixtureError&) {
      continue;
    }
    merge(worst, closure(b, sample_points(b.g, 100, static_cast<std::uint64_t>(++draws[1]))));
    lemma_c(b, c);
  }
  const char* bs[] = {"1+u^2", "u", "3-u", "2*u^3"};
  const char* fs_[] = {"x*y", "x^2", "x^2+y^2", "x^2-y^2", "sin(x)*exp(y)"};
  while (draws[2] < 50) {
    const double phi = u(0.5, 2), xi = u(-0.4, 1);
    const char* b_ = bs[rng() % 4];
    const char* f_ = fs_[rng() % 5];
    FixtureBundle b;
    try {
      b = fixture_r9_r14(b_, f_, phi, xi);
    } catch (const FixtureError&) {
      continue;
    }
    merge(worst, closure(b, sample_points(b.g, 100, static_cast<std::uint64_t>(++draws[2]))));
  }
  require_closure(o, worst);
  o.require(c_err <= kConcircularTol, "concircular constant error " + sci(c_err));
  o.detail << (o.pass ? "" : "; ") << "3x50 draws: residual " << sci(worst.sinyukov) << ", chi " << sci(worst.chi)
           << ", g' rel " << sci(worst.g_prime) << ", c " << sci(c_err);
}

void criterion3(Outcome& o) {
  double weyl = 0.0, full = 0.0, ricci = 0.0;
  for (const char* name : {"r11", "r13", "r10", "r9", "r14"}) {
    const FixtureBundle b = fixture_by_name(name);
    const auto pts = sample_points(b.g, 100, 3);
    const ProjectivePair p = invert_pair(b.pair, pts);
    const PsiField psi = PsiField::from_exprs(p.psi, b.g.coordinates(), b.parameters);
    const auto w = weyl_projective_equal(b.g, p.g_prime, pts);
    const auto r = curvature_relation_residual(b.g, p.g_prime, psi, pts);
    o.require(w.skipped.empty() && r.full.skipped.empty(), std::string(name) + " skipped points");
    weyl = std::max(weyl, w.max);
    full = std::max(full, r.full.max);
    ricci = std::max(ricci, r.ricci.max);
  }
  o.require(weyl < kWeylTol, "|W - W'| " + sci(weyl));
  o.require(full < kCurvatureTol, "curvature relation " + sci(full));
  o.require(ricci < kCurvatureTol, "Ricci relation " + sci(ricci));
  o.detail << (o.pass ? "" : "; ") << "|W - W'| " << sci(weyl) << ", curvature " << sci(full) << ", Ricci " << sci(ricci);
}

void criterion4(Outcome& o) {
  const double t0 = now();
  std::mt19937_64 rng(404);
  int correct = 0, total = 0;
  for (int i = 0; i < 200; ++i) {
    const auto t = oracle::random_tetrad(rng);
    const double alpha = oracle::random_coefficient(rng), beta = oracle::random_coefficient(rng);
    ++total;
    try {
      if (i % 2 == 0) {
        const Bivector f = Bivector::wedge(t.ctx, t.l, t.n);
        const auto r = classify_curvature(
            frame_from_curvature(t.g, oracle::curvature_from_squares({{alpha, f}, {beta, hodge_dual(f)}})));
        if (r.cls == CurvatureClass::B && r.kernel.empty()) ++correct;
      } else {
        const Vector4d* pairs[3][2] = {{&t.x, &t.y}, {&t.l, &t.n}, {&t.l, &t.x}};
        const BivectorKind kinds[3] = {BivectorKind::SimpleSpacelike, BivectorKind::SimpleTimelike, BivectorKind::SimpleNull};
        const int k = (i / 2) % 3;
        const Bivector f = Bivector::wedge(t.ctx, *pairs[k][0], *pairs[k][1]);
        const auto r = classify_curvature(frame_from_curvature(t.g, oracle::curvature_from_squares({{alpha, f}})));
        if (r.cls == CurvatureClass::D && r.kernel.size() == 2 && r.d_kind && *r.d_kind == kinds[k]) ++correct;
      }
    } catch (const ClassificationError&) {
    }
  }
  int t1_ok = 0, t1_total = 0;
  for (int i = 0; i < 25; ++i) {
    const auto t = oracle::random_tetrad(rng);
    const Bivector ln = Bivector::wedge(t.ctx, t.l, t.n), lx = Bivector::wedge(t.ctx, t.l, t.x),
                   xy = Bivector::wedge(t.ctx, t.x, t.y);
    const std::pair<Tensor4d, int> cases[] = {
        {oracle::constant_curvature(t.g, oracle::random_coefficient(rng)), 1},
        {oracle::curvature_from_squares({{oracle::random_coefficient(rng), ln}, {oracle::random_coefficient(rng), hodge_dual(ln)}}), 2},
        {oracle::curvature_from_squares({{oracle::random_coefficient(rng), ln}, {oracle::random_coefficient(rng), lx}}), 2},
        {oracle::curvature_from_squares({{oracle::random_coefficient(rng), xy}}), 4},
    };
    for (const auto& [r, dim] : cases) {
      ++t1_total;
      try {
        if (solve_theorem1(frame_from_curvature(t.g, r)).dimension == dim) ++t1_ok;
      } catch (const ClassificationError&) {
      }
    }
  }
  const double dt = now() - t0;
  o.require(correct == total, std::to_string(total - correct) + " synthetic tensors misclassified");
  o.require(t1_ok == t1_total, std::to_string(t1_total - t1_ok) + " symmetric-solution dimensions wrong");
  o.require(dt < kTime4, "runtime " + secs(dt));
  o.detail << (o.pass ? "" : "; ") << correct << "/" << total << " classified, " << t1_ok << "/" << t1_total
           << " solution dimensions {A:1, B:2, C:2, D:4}, " << secs(dt);
}

bool span_contains(const std::vector<Direction>& dirs, const std::vector<Vector4d>& expected) {
  if (dirs.size() != expected.size()) return false;
  Eigen::MatrixXd m(4, static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t i = 0; i < dirs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = dirs[i].vector.normalized();
  for (const auto& e : expected) {
    const Eigen::VectorXd coef = m.colPivHouseholderQr().solve(e.normalized());
    if ((m * coef - e.normalized()).norm() > 1e-8) return false;
  }
  return true;
}

void criterion5(Outcome& o) {
  const auto type_of = [](const std::string& name) { return holonomy_survey(fixture_by_name(name).g, 8, 5, 1).aggregate; };
  const auto r9 = type_of("r9"), r14 = type_of("r14"), flat = type_of("minkowski"), b0 = type_of("r9_b0");
  o.require(r9.type == HolonomyType::R9, "harmonic example gave " + to_string(r9.type));
  o.require(r14.type == HolonomyType::R14, "non-harmonic example gave " + to_string(r14.type));
  o.require(flat.type == HolonomyType::R1, "Minkowski gave " + to_string(flat.type));
  const bool b0_label = b0.type == HolonomyType::R3 || b0.type == HolonomyType::R8 || b0.type == HolonomyType::R11;
  o.require(b0_label, "b = 0 example gave " + to_string(b0.type));
  o.require(b0.constant.size() == 1 && b0.constant[0].causal == Causal::Null, "b = 0 example has no null constant direction");

  std::mt19937_64 rng(505);
  int rows_ok = 0, rows = 0;
  double omega_err = 0.0;
  bool r5_flagged = true;
  for (int trial = 0; trial < 10; ++trial) {
    const auto t = oracle::oriented_tetrad(rng);
    const double omega = oracle::random_coefficient(rng);
    for (const auto& row : oracle::holonomy_table(t, omega)) {
      ++rows;
      const auto rep = identify_type(close_algebra(row.basis, t.ctx), t.ctx);
      bool ok = rep.type == row.type && span_contains(rep.constant, row.constant) && rep.recurrent.size() == row.recurrent.size();
      if (row.type == HolonomyType::R5) r5_flagged = r5_flagged && !rep.realizable;
      if (row.type == HolonomyType::R12) {
        ok = ok && rep.omega.has_value();
        if (rep.omega) omega_err = std::max(omega_err, std::abs(*rep.omega - omega) / std::max(1.0, std::abs(omega)));
        else omega_err = INFINITY;
      }
      if (ok) ++rows_ok;
    }
  }
  o.require(rows_ok == rows, std::to_string(rows - rows_ok) + " table bases misidentified");
  o.require(r5_flagged, "R5 not flagged non-realizable");
  o.require(omega_err <= kOmegaTol, "R12 omega error " + sci(omega_err));
  o.detail << (o.pass ? "" : "; ") << "R9/R14/R1 examples, b = 0 -> " << to_string(b0.type) << " (null constant), " << rows_ok
           << "/" << rows << " table bases, omega " << sci(omega_err);
}

struct Cli {
  std::string binary;  // empty: run in process
  fs::path dir;

  int run(const std::vector<std::string>& args, std::string* out = nullptr, const std::string& env = {}) const {
    if (binary.empty()) {
      std::ostringstream so, se;
      const int code = cli::run_cli(args, so, se);
      if (out) *out = so.str();
      return code;
    }
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += "'" + binary + "'";
    for (const auto& a : args) cmd += " '" + a + "'";
    const fs::path capture = dir / "stdout.txt";
    cmd += " > '" + capture.string() + "' 2> '" + (dir / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    if (out) *out = read_text_file(capture.string());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

void criterion6(Outcome& o, const Cli& cli) {
  const double t0 = now();
  double proj = 0.0, geo = 0.0, floor = 0.0, control = INFINITY;
  std::size_t truncated = 0;
  for (const auto& name : fixture_names()) {
    if (name == "minkowski") continue;
    const int emitted = cli.run({"fixtures", "emit", name, "-o", cli.dir.string()});
    const std::string out = cli.path(name + ".derived.json");
    const int derived = cli.run({"derive-partner", "-m", cli.path(name + ".metric.json"), "-a", cli.path(name + ".sinyukov.json"),
                                 "-o", out, "--samples", "100"});
    o.require(emitted == 0 && derived == 0, name + " emit/derive-partner exit codes");
    if (emitted != 0 || derived != 0) continue;
    const MetricSpec g = parse_metric_json(read_text_file(cli.path(name + ".metric.json")));
    const MetricSpec gp = parse_metric_json(read_text_file(out));
    const auto pts = sample_points(g, 100, 6);
    const ResidualReport r = projective_residual(g, gp, PsiField::from_connections(g, gp), pts);
    o.require(r.skipped.empty(), name + " skipped points");
    proj = std::max(proj, r.max);

    GeodesicOptions go;  // 20 trials x 2000 steps
    const GeodesicReport pair = pregeodesic_check(g, gp, go);
    for (const auto& t : pair.trials) truncated += t.truncated ? 1 : 0;
    geo = std::max(geo, pair.score);
    floor = std::max(floor, pregeodesic_check(g, g, go).score);
    const MetricSpec flat = make_metric(g.coordinates(), {},
                                        {{{"-1", "", "", ""}, {"0", "1", "", ""}, {"0", "0", "1", ""}, {"0", "0", "0", "1"}}});
    control = std::min(control, pregeodesic_check(g, flat, go).score);
  }
  const double dt = now() - t0;
  o.require(proj < kProjectiveTol, "projective residual " + sci(proj));
  o.require(geo < kGeodesicTol, "pre-geodesic score " + sci(geo));
  o.require(floor <= kGeodesicFloor, "g' = g score " + sci(floor));
  o.require(control > kGeodesicControl, "Minkowski control score " + sci(control));
  o.require(dt < kTime6, "runtime " + secs(dt));
  o.detail << (o.pass ? "" : "; ") << "projective " << sci(proj) << ", score " << sci(geo) << " (" << truncated
           << " truncated trials), g'=g " << sci(floor) << ", control min " << sci(control) << ", " << secs(dt);
}

void criterion7(Outcome& o, const Cli& cli) {
  const auto m = [&](const std::string& n) { return cli.path(n + ".metric.json"); };
  const auto a = [&](const std::string& n) { return cli.path(n + ".sinyukov.json"); };
  const auto p = [&](const std::string& n) { return cli.path(n + ".partner.json"); };
  for (const char* n : {"r11", "r13", "r10", "r9", "r14", "minkowski"}) cli.run({"fixtures", "emit", n, "-o", cli.dir.string()});
  const std::vector<std::vector<std::string>> commands = {
      {"classify", "-m", m("r11")},
      {"classify", "-m", m("r9"), "--seed", "3", "--samples", "10"},
      {"holonomy", "-m", m("r14"), "--samples", "8"},
      {"holonomy", "-m", m("r13"), "--samples", "6", "--order", "2"},
      {"sinyukov-check", "-m", m("r10"), "-a", a("r10")},
      {"derive-partner", "-m", m("r9"), "-a", a("r9")},
      {"projective-check", "-m", m("r13"), "-M", p("r13"), "--auto-psi"},
      {"projective-check", "-m", m("r11"), "-M", p("r11"), "-a", a("r11")},
      {"geodesic-check", "-m", m("r14"), "-M", p("r14"), "--trials", "6", "--steps", "500"},
      {"geodesic-check", "-m", m("r14"), "-M", m("minkowski"), "--trials", "4", "--steps", "500"},
      {"weyl-projective", "-m", m("r9"), "-M", p("r9")},
      {"fixtures", "list"},
      {"fixtures", "emit", "r9_b0", "-o", cli.dir.string()},
  };
  int identical = 0, total = 0;
  for (auto args : commands) {
    args.push_back("--json");
    for (const char* env : {"", "LORHOL_SEED=11"}) {
      std::string first, second;
      const int c1 = cli.run(args, &first, env), c2 = cli.run(args, &second, env);
      ++total;
      const bool same = c1 == c2 && c1 != 2 && !first.empty() && first == second;
      if (same) ++identical;
      else o.require(false, args[0] + " differs between runs");
    }
  }
  o.detail << (o.pass ? "" : "; ") << identical << "/" << total << " repeated reports byte-identical"
           << (cli.binary.empty() ? " (in process)" : "");
}

void criterion8(Outcome& o, const std::vector<std::string>& suite, double criteria_time) {
  const double t0 = now();
  int failed = 0;
  for (const auto& bin : suite) {
    const std::string cmd = "'" + bin + "' > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) ++failed;
  }
  const double total = criteria_time + (now() - t0);
  o.require(failed == 0, std::to_string(failed) + " unit test binaries failed");
  o.require(total < kTime8, "wall-clock " + secs(total));
  o.detail << (o.pass ? "" : "; ") << suite.size() << " unit binaries + criteria 1-7: " << secs(total);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance checks");
  std::string binary;
  std::vector<std::string> suite;
  app.add_option("--cli", binary, "lorhol executable (default: run commands in process)");
  app.add_option("--suite", suite, "unit test executables timed by criterion 8");
  CLI11_PARSE(app, argc, argv);

  Cli cli{binary, fs::temp_directory_path() / ("lorhol_acceptance_" + std::to_string(::getpid()))};
  fs::remove_all(cli.dir);
  fs::create_directories(cli.dir);

  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"fixture reproduction, harmonic example", criterion1},
      {"fixture families, random draws", criterion2},
      {"projective Weyl invariance and curvature relation", criterion3},
      {"curvature classifier on synthetic tensors", criterion4},
      {"holonomy identification", criterion5},
      {"projective verification end to end", [&](Outcome& o) { criterion6(o, cli); }},
      {"CLI determinism", [&](Outcome& o) { criterion7(o, cli); }},
  };
  bool all = true;
  const double start = now();
  int n = 0;
  auto report = [&](int index, const char* title, Outcome& o, double dt) {
    std::cout << "criterion " << index << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title << ": " << o.detail.str() << " ["
              << secs(dt) << "]" << std::endl;
    all = all && o.pass;
  };
  for (const auto& [title, fn] : criteria) {
    Outcome o;
    const double t0 = now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    report(++n, title, o, now() - t0);
  }
  Outcome o8;
  const double t8 = now();
  try {
    criterion8(o8, suite, t8 - start);
  } catch (const std::exception& e) {
    o8.require(false, std::string("exception: ") + e.what());
  }
  report(8, "full suite wall-clock", o8, now() - t8);

  fs::remove_all(cli.dir);
  std::cout << (all ? "all criteria pass" : "some criteria FAIL") << std::endl;
  return all ? 0 : 1;
}
