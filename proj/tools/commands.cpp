#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "lorhol/errors.hpp"
#include "lorhol/fixtures.hpp"
#include "lorhol/specfile.hpp"

namespace lorhol::cli {

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

using json = nlohmann::ordered_json;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string metric, metric2, sinyukov, point, out, fixture;
  std::size_t samples = 20;
  std::optional<std::uint64_t> seed;
  int order = 1;
  double tol = 1e-8, svd_tol = 1e-9, geo_tol = 1e-6;
  bool json = false, auto_psi = false;
  int trials = 20, steps = 2000;
  double horizon = 1.0;
};

json vec(const Vector4d& v) { return json::array({v[0], v[1], v[2], v[3]}); }

// JSON has no NaN; skipped points carry null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Point parse_point(const std::string& text) {
  Point p;
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t comma = text.find(',', start);
    if ((i < 3) != (comma != std::string::npos)) throw UsageError("--point needs 4 comma-separated numbers");
    const std::string tok = text.substr(start, i < 3 ? comma - start : std::string::npos);
    std::size_t used = 0;
    try {
      p[i] = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || tok.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(p[i]))
      throw UsageError("bad coordinate '" + tok + "' in --point");
    start = comma + 1;
  }
  return p;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// One command invocation: inputs read so far (hashed into the digest), options echoed in the
// report, and the checks that make up the verdict.
class Run {
 public:
  Run(std::string command, const Options& opt) : command_(std::move(command)), opt_(opt) {
    seed_ = opt.seed ? *opt.seed : default_seed();
    digest_ = fnv1a(command_);
  }

  const Options& opt() const { return opt_; }
  std::uint64_t seed() const { return seed_; }

  std::string input(const std::string& path) {
    const std::string text = read_text_file(path);
    digest_ = fnv1a(text, fnv1a(std::string(1, '\0'), digest_));
    return text;
  }
  MetricSpec metric(const std::string& path) { return parse_metric_json(input(path)); }
  SinyukovPair sinyukov(const std::string& path, const MetricSpec& base) { return parse_sinyukov_json(input(path), base); }

  std::vector<Point> points(const MetricSpec& g) {
    if (!opt_.point.empty()) {
      const Point p = parse_point(opt_.point);
      if (!g.admissible(p)) throw UsageError("--point lies outside the metric's domain");
      options["point"] = vec(p);
      return {p};
    }
    if (opt_.samples == 0) throw UsageError("--samples must be positive");
    options["samples"] = opt_.samples;
    return sample_points(g, opt_.samples, seed_);
  }

  void check(const std::string& name, double value, double limit) {
    const bool ok = std::isfinite(value) && value <= limit;
    checks[name] = {{"value", num(value)}, {"limit", limit}, {"pass", ok}};
    pass_ = pass_ && ok;
  }
  void require(const std::string& name, bool ok, const std::string& detail = {}) {
    checks[name] = {{"pass", ok}};
    if (!detail.empty()) checks[name]["detail"] = detail;
    pass_ = pass_ && ok;
  }
  void tolerance(const std::string& name, double v) { tolerances[name] = v; }

  bool pass() const { return pass_; }

  json document() const {
    json doc;
    doc["schema"] = "lorhol-report";
    doc["version"] = 1;
    doc["command"] = command_;
    doc["inputs_digest"] = hex64(fnv1a(options.dump(), digest_));
    doc["seed"] = seed_;
    doc["options"] = options;
    doc["tolerances"] = tolerances;
    doc["points"] = points_json;
    doc["aggregate"] = aggregate;
    doc["checks"] = checks;
    doc["verdict"] = pass_ ? "pass" : "fail";
    return doc;
  }

  json options = json::object();
  json tolerances = json::object();
  json points_json = json::array();
  json aggregate = json::object();
  json checks = json::object();

 private:
  std::string command_;
  Options opt_;
  std::uint64_t seed_ = 7;
  std::uint64_t digest_ = 0;
  bool pass_ = true;
};

json skipped_json(const std::vector<SkippedPoint>& skipped) {
  json out = json::array();
  for (const auto& s : skipped) out.push_back({{"index", s.index}, {"reason", s.reason}});
  return out;
}

json directions_json(const std::vector<Direction>& ds) {
  json out = json::array();
  for (const auto& d : ds) out.push_back({{"causal", to_string(d.causal)}, {"vector", vec(d.vector)}});
  return out;
}

json algebra_json(const HolonomyAlgebraReport& r) {
  json out;
  out["type"] = to_string(r.type);
  out["dimension"] = r.dimension;
  out["realizable"] = r.realizable;
  out["constant"] = directions_json(r.constant);
  out["recurrent"] = directions_json(r.recurrent);
  if (r.omega) out["omega"] = *r.omega;
  out["skew_residual"] = r.skew_residual;
  out["closure_residual"] = r.closure_residual;
  out["diagnostics"] = r.diagnostics;
  return out;
}

// Coordinates are matched by position; differing names are only noted.
void same_coordinates(Run& r, const MetricSpec& g, const MetricSpec& gp) {
  if (g.coordinates() != gp.coordinates()) r.aggregate["note"] = "coordinate names differ; matched by position";
}

// --- commands ------------------------------------------------------------------------------

void cmd_classify(Run& r) {
  const MetricSpec g = r.metric(r.opt().metric);
  const auto pts = r.points(g);
  r.tolerance("svd_tol", r.opt().svd_tol);
  ClassifyOptions co;
  co.svd_tol = r.opt().svd_tol;
  std::map<std::string, int> counts;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    json p = {{"index", i}, {"point", vec(pts[i])}};
    const PointFrame f = frame_at(g, pts[i], {0, true});
    try {
      const CurvatureClassReport c = classify_curvature(f, co);
      p["class"] = to_string(c.cls);
      p["kernel_dim"] = c.kernel.size();
      p["range_dim"] = c.range_dim;
      p["margin"] = c.margin;
      if (c.d_bivector) {
        p["d_kind"] = to_string(*c.d_kind);
        p["theta"] = theta(*c.d_bivector);
      }
      if (c.c_direction) p["c_direction"] = vec(*c.c_direction);
      ++counts[to_string(c.cls)];
    } catch (const ClassificationError& e) {
      p["error"] = e.what();
      ++failed;
    }
    r.points_json.push_back(p);
  }
  r.aggregate["classes"] = counts;
  r.aggregate["uniform"] = counts.size() == 1 && failed == 0;
  r.require("classified", failed == 0, failed ? std::to_string(failed) + " points fit no class" : "");
}

void cmd_holonomy(Run& r) {
  const Options& o = r.opt();
  if (o.order < 0 || o.order > 2) throw UsageError("--order must be 0, 1 or 2");
  const MetricSpec g = r.metric(o.metric);
  r.options["order"] = o.order;
  r.tolerance("svd_tol", o.svd_tol);
  HolonomyOptions ho;
  ho.svd_tol = o.svd_tol;
  HolonomyAlgebraReport agg;
  if (!o.point.empty()) {
    const Point x = r.points(g).front();
    const auto ctx = make_context(g.metric_jet(x, 0).value());
    agg = identify_type(close_algebra(ihol_generators(g, x, o.order), ctx, ho), ctx, ho);
    r.points_json.push_back({{"index", 0}, {"point", vec(x)}, {"type", to_string(agg.type)}, {"dimension", agg.dimension}});
    r.aggregate = algebra_json(agg);
  } else {
    if (o.samples == 0) throw UsageError("--samples must be positive");
    r.options["samples"] = o.samples;
    const HolonomySurvey s = holonomy_survey(g, o.samples, r.seed(), o.order, {}, ho);
    for (const auto& p : s.points)
      r.points_json.push_back({{"index", p.index},
                               {"point", vec(p.point)},
                               {"type", to_string(p.report.type)},
                               {"dimension", p.report.dimension},
                               {"span_by_order", p.span_by_order}});
    agg = s.aggregate;
    r.aggregate = algebra_json(agg);
    r.aggregate["types_differ"] = s.types_differ;
    if (!s.caveat.empty()) r.aggregate["caveat"] = s.caveat;
  }
  r.require("recognized", agg.type != HolonomyType::Unrecognized);
}

void per_point_values(Run& r, const std::vector<Point>& pts, const std::vector<std::pair<std::string, const ResidualReport*>>& cols,
                      const std::vector<SkippedPoint>& skipped) {
  std::map<std::size_t, std::string> reasons;
  for (const auto& s : skipped) reasons.emplace(s.index, s.reason);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    json p = {{"index", i}, {"point", vec(pts[i])}};
    for (const auto& [name, rep] : cols) p[name] = num(rep->per_point[i]);
    if (auto it = reasons.find(i); it != reasons.end()) p["skipped"] = it->second;
    r.points_json.push_back(p);
  }
  r.aggregate["skipped"] = skipped_json(skipped);
  r.require("evaluated", skipped.size() < pts.size(), skipped.size() == pts.size() ? "every point was skipped" : "");
}

void cmd_sinyukov_check(Run& r) {
  const MetricSpec g = r.metric(r.opt().metric);
  const SinyukovPair pair = r.sinyukov(r.opt().sinyukov, g);
  const auto pts = r.points(g);
  r.tolerance("tol", r.opt().tol);
  const SinyukovReport s = sinyukov_residual(pair, pts);
  r.aggregate["lambda_source"] = pair.lambda ? "file" : "trace";
  per_point_values(r, pts, {{"residual", &s.residual}}, s.residual.skipped);
  r.check("sinyukov_residual", s.residual.max, r.opt().tol);
  r.check("lambda_curl", s.curl, r.opt().tol);
}

void cmd_derive_partner(Run& r) {
  const Options& o = r.opt();
  const MetricSpec g = r.metric(o.metric);
  const SinyukovPair pair = r.sinyukov(o.sinyukov, g);
  const auto pts = r.points(g);
  r.tolerance("tol", o.tol);
  if (!o.out.empty()) r.options["out"] = o.out;
  const SinyukovReport s = sinyukov_residual(pair, pts);
  per_point_values(r, pts, {{"sinyukov_residual", &s.residual}}, s.residual.skipped);
  r.check("sinyukov_residual", s.residual.max, o.tol);
  try {
    InvertOptions io;
    io.tol = o.tol;
    const ProjectivePair p = invert_pair(pair, pts, io);
    r.require("inversion", true);
    r.aggregate["chi"] = to_string(*p.chi);
    json psi = json::array();
    for (const Expr& e : p.psi) psi.push_back(to_string(e));
    r.aggregate["psi"] = psi;
    std::size_t non_lorentz = 0;
    for (const Point& x : pts)
      if (p.g_prime.admissible(x) && !signature_of(p.g_prime.metric_jet(x, 0).value()).lorentz()) ++non_lorentz;
    r.require("partner_lorentz", non_lorentz == 0,
              non_lorentz ? std::to_string(non_lorentz) + " points with non-Lorentz signature" : "");
    const std::string text = metric_to_json(p.g_prime);
    if (o.out.empty()) {
      r.aggregate["partner"] = json::parse(text);
    } else {
      write_text_file(o.out, text);
      r.aggregate["written"] = o.out;
    }
  } catch (const ConsistencyError& e) {
    r.require("inversion", false, e.what());
  }
}

void cmd_projective_check(Run& r) {
  const Options& o = r.opt();
  const MetricSpec g = r.metric(o.metric);
  const MetricSpec gp = r.metric(o.metric2);
  same_coordinates(r, g, gp);
  if (o.auto_psi == !o.sinyukov.empty()) throw UsageError("projective-check needs exactly one of -a or --auto-psi");
  const auto pts = r.points(g);
  r.tolerance("tol", o.tol);
  PsiField psi;
  if (o.auto_psi) {
    r.aggregate["psi_source"] = "connections";
    psi = PsiField::from_connections(g, gp);
  } else {
    r.aggregate["psi_source"] = "sinyukov";
    const SinyukovPair pair = r.sinyukov(o.sinyukov, g);
    try {
      InvertOptions io;
      io.tol = o.tol;
      const ProjectivePair p = invert_pair(pair, pts, io);
      psi = PsiField::from_exprs(p.psi, g.coordinates(), g.parameters());
    } catch (const ConsistencyError& e) {
      r.require("inversion", false, e.what());
      return;
    }
  }
  const ResidualReport proj = projective_residual(g, gp, psi, pts);
  const CurvatureRelationReport curv = curvature_relation_residual(g, gp, psi, pts);
  per_point_values(r, pts, {{"projective", &proj}, {"curvature", &curv.full}, {"ricci", &curv.ricci}}, proj.skipped);
  r.check("projective_residual", proj.max, o.tol);
  r.check("curvature_relation", curv.full.max, o.tol);
  r.check("ricci_relation", curv.ricci.max, o.tol);
}

void cmd_geodesic_check(Run& r) {
  const Options& o = r.opt();
  const MetricSpec g = r.metric(o.metric);
  const MetricSpec gp = r.metric(o.metric2);
  same_coordinates(r, g, gp);
  r.options["trials"] = o.trials;
  r.options["steps"] = o.steps;
  r.options["horizon"] = o.horizon;
  r.tolerance("geo_tol", o.geo_tol);
  GeodesicOptions go;
  go.trials = o.trials;
  go.steps = o.steps;
  go.horizon = o.horizon;
  go.seed = r.seed();
  const GeodesicReport rep = pregeodesic_check(g, gp, go);
  std::size_t complete = 0;
  for (std::size_t i = 0; i < rep.trials.size(); ++i) {
    const GeodesicTrial& t = rep.trials[i];
    json p = {{"index", i}, {"start", vec(t.start)}, {"velocity", vec(t.velocity)}, {"steps_completed", t.steps_completed},
              {"score", t.score}};
    if (t.truncated) p["truncated"] = *t.truncated;
    else ++complete;
    r.points_json.push_back(p);
  }
  r.aggregate["complete_trials"] = complete;
  r.check("pregeodesic_score", rep.score, o.geo_tol);
  r.require("integrated", complete > 0, complete ? "" : "every trial was truncated");
}

void cmd_weyl_projective(Run& r) {
  const MetricSpec g = r.metric(r.opt().metric);
  const MetricSpec gp = r.metric(r.opt().metric2);
  same_coordinates(r, g, gp);
  const auto pts = r.points(g);
  r.tolerance("tol", r.opt().tol);
  const ResidualReport w = weyl_projective_equal(g, gp, pts);
  per_point_values(r, pts, {{"weyl_difference", &w}}, w.skipped);
  r.check("weyl_difference", w.max, r.opt().tol);
}

void cmd_fixtures_list(Run& r) {
  json names = json::array();
  for (const auto& n : fixture_names()) {
    const FixtureBundle b = fixture_by_name(n);
    json labels = json::array();
    for (const HolonomyType t : b.expected_holonomy) labels.push_back(to_string(t));
    r.points_json.push_back({{"name", n}, {"class", to_string(b.expected_class)}, {"holonomy", labels}});
    names.push_back(n);
  }
  r.aggregate["names"] = names;
}

void cmd_fixtures_emit(Run& r) {
  const Options& o = r.opt();
  r.options["name"] = o.fixture;
  const std::string dir = o.out.empty() ? "." : o.out;
  r.options["out"] = dir;
  const FixtureBundle b = fixture_by_name(o.fixture);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw SpecFileError("cannot create directory '" + dir + "': " + ec.message());
  const std::filesystem::path base = std::filesystem::path(dir) / b.name;
  const std::vector<std::pair<std::string, std::string>> files = {
      {base.string() + ".metric.json", metric_to_json(b.g)},
      {base.string() + ".sinyukov.json", sinyukov_to_json(b.pair)},
      {base.string() + ".partner.json", metric_to_json(b.expected_g_prime)},
  };
  json written = json::array();
  for (const auto& [path, text] : files) {
    write_text_file(path, text);
    written.push_back(path);
  }
  r.aggregate["written"] = written;
  r.aggregate["expected_chi"] = to_string(b.expected_chi);
}

// --- output --------------------------------------------------------------------------------

void render_text(const json& doc, std::ostream& out) {
  out << doc["command"].get<std::string>() << ": " << (doc["verdict"] == "pass" ? "PASS" : "FAIL") << "\n";
  out << "  inputs " << doc["inputs_digest"].get<std::string>() << ", seed " << doc["seed"].dump() << "\n";
  for (const auto& [k, v] : doc["checks"].items()) {
    out << "  check " << k << ": " << (v["pass"].get<bool>() ? "pass" : "FAIL");
    if (v.contains("value")) out << " (" << v["value"].dump() << " <= " << v["limit"].dump() << ")";
    if (v.contains("detail")) out << " - " << v["detail"].get<std::string>();
    out << "\n";
  }
  for (const auto& [k, v] : doc["aggregate"].items()) out << "  " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  for (const auto& p : doc["points"]) out << "  " << p.dump() << "\n";
}

void add_metric(CLI::App* c, Options& o, bool second) {
  c->add_option("-m,--metric", o.metric, "metric file")->required();
  if (second) c->add_option("-M,--metric2", o.metric2, "second metric file")->required();
}
void add_points(CLI::App* c, Options& o) {
  c->add_option("-p,--point", o.point, "single point, comma-separated coordinates");
  c->add_option("--samples", o.samples, "number of sample points")->capture_default_str();
  c->add_option("--seed", o.seed, "sampling seed (default: LORHOL_SEED, else 7)");
}
void add_json(CLI::App* c, Options& o) { c->add_flag("--json", o.json, "print the report as JSON"); }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Curvature, holonomy and projective structure of 4-dimensional Lorentz metrics", "lorhol");
  app.require_subcommand(1);
  Options o;

  auto* classify = app.add_subcommand("classify", "pointwise curvature class");
  add_metric(classify, o, false);
  add_points(classify, o);
  classify->add_option("--svd-tol", o.svd_tol, "rank threshold")->capture_default_str();
  add_json(classify, o);

  auto* holonomy = app.add_subcommand("holonomy", "infinitesimal holonomy algebra type");
  add_metric(holonomy, o, false);
  add_points(holonomy, o);
  holonomy->add_option("--order", o.order, "covariant derivative order of the generators")->capture_default_str();
  holonomy->add_option("--svd-tol", o.svd_tol, "span threshold")->capture_default_str();
  add_json(holonomy, o);

  auto* sinyukov = app.add_subcommand("sinyukov-check", "residual of the linear Sinyukov equation");
  auto* derive = app.add_subcommand("derive-partner", "projectively related metric from Sinyukov data");
  for (auto* c : {sinyukov, derive}) {
    add_metric(c, o, false);
    c->add_option("-a,--sinyukov", o.sinyukov, "Sinyukov tensor file")->required();
    add_points(c, o);
    c->add_option("--tol", o.tol, "residual tolerance")->capture_default_str();
    add_json(c, o);
  }
  derive->add_option("-o,--out", o.out, "write the partner metric here");

  auto* projective = app.add_subcommand("projective-check", "projective relation between two metrics");
  add_metric(projective, o, true);
  projective->add_option("-a,--sinyukov", o.sinyukov, "take psi from this Sinyukov tensor file");
  projective->add_flag("--auto-psi", o.auto_psi, "take psi from the two connections");
  add_points(projective, o);
  projective->add_option("--tol", o.tol, "residual tolerance")->capture_default_str();
  add_json(projective, o);

  auto* geodesic = app.add_subcommand("geodesic-check", "geodesics of the first metric as pre-geodesics of the second");
  add_metric(geodesic, o, true);
  geodesic->add_option("--seed", o.seed, "trial seed (default: LORHOL_SEED, else 7)");
  geodesic->add_option("--trials", o.trials, "number of geodesics")->capture_default_str();
  geodesic->add_option("--steps", o.steps, "RK4 steps per geodesic")->capture_default_str();
  geodesic->add_option("--horizon", o.horizon, "affine parameter length")->capture_default_str();
  geodesic->add_option("--geo-tol", o.geo_tol, "score tolerance")->capture_default_str();
  add_json(geodesic, o);

  auto* weyl = app.add_subcommand("weyl-projective", "compare projective Weyl tensors");
  add_metric(weyl, o, true);
  add_points(weyl, o);
  weyl->add_option("--tol", o.tol, "absolute tolerance")->capture_default_str();
  add_json(weyl, o);

  auto* fixtures = app.add_subcommand("fixtures", "built-in example metrics");
  fixtures->require_subcommand(1);
  auto* list = fixtures->add_subcommand("list", "list fixture names");
  add_json(list, o);
  auto* emit = fixtures->add_subcommand("emit", "write a fixture's metric, Sinyukov and partner files");
  emit->add_option("name", o.fixture, "fixture name")->required();
  emit->add_option("-o,--out", o.out, "output directory (default: current)");
  add_json(emit, o);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  std::string command;
  void (*handler)(Run&) = nullptr;
  const std::pair<CLI::App*, void (*)(Run&)> table[] = {
      {classify, cmd_classify},          {holonomy, cmd_holonomy},         {sinyukov, cmd_sinyukov_check},
      {derive, cmd_derive_partner},      {projective, cmd_projective_check}, {geodesic, cmd_geodesic_check},
      {weyl, cmd_weyl_projective},       {list, cmd_fixtures_list},        {emit, cmd_fixtures_emit},
  };
  for (const auto& [sub, fn] : table)
    if (sub->parsed()) {
      command = (sub == list || sub == emit ? "fixtures " : "") + sub->get_name();
      handler = fn;
    }

  try {
    Run run(command, o);
    handler(run);
    const json doc = run.document();
    if (o.json) {
      out << doc.dump(2) << "\n";
    } else if (list->parsed()) {
      for (const auto& n : doc["aggregate"]["names"]) out << n.get<std::string>() << "\n";
    } else {
      render_text(doc, out);
    }
    return run.pass() ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace lorhol::cli
