#include <cmath>
#include <limits>
#include <random>

#include "lorhol/errors.hpp"
#include "lorhol/parallel.hpp"
#include "lorhol/projective.hpp"

namespace lorhol {

namespace {

Vector4d contract(const Tensor3d& gamma, const Vector4d& v) {
  Vector4d out = Vector4d::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) out[a] += gamma(a, b, c) * v[b] * v[c];
  return out;
}

Vector4d gamma_vv(const MetricSpec& spec, const Point& x, const Vector4d& v) {
  return contract(christoffel_jet(spec.metric_jet(x, 1), 0).value(), v);
}

double wedge_norm(const Vector4d& p, const Vector4d& q) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const double w = p[a] * q[b] - p[b] * q[a];
      s += w * w;
    }
  return std::sqrt(s);
}

GeodesicTrial run_trial(const MetricSpec& g, const MetricSpec& gp, const Point& x0, const Vector4d& v0,
                        const GeodesicOptions& opt, double length) {
  GeodesicTrial trial;
  trial.start = x0;
  trial.velocity = v0;
  const double h = opt.horizon / opt.steps;
  std::vector<Point> xs{x0};
  std::vector<Vector4d> vs{v0};
  auto accel = [&](const Point& x, const Vector4d& v) -> Vector4d { return -gamma_vv(g, x, v); };
  try {
    for (int n = 0; n < opt.steps; ++n) {
      const Point x = xs.back();
      const Vector4d v = vs.back();
      const Vector4d k1x = v, k1v = accel(x, v);
      const Vector4d k2x = v + 0.5 * h * k1v, k2v = accel(x + 0.5 * h * k1x, k2x);
      const Vector4d k3x = v + 0.5 * h * k2v, k3v = accel(x + 0.5 * h * k2x, k3x);
      const Vector4d k4x = v + h * k3v, k4v = accel(x + h * k3x, k4x);
      const Point xn = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      const Vector4d vn = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      if (!g.admissible(xn) || !gp.admissible(xn) || !xn.allFinite() || !vn.allFinite()) {
        trial.truncated = "left the domain after " + std::to_string(n) + " steps";
        break;
      }
      xs.push_back(xn);
      vs.push_back(vn);
    }
  } catch (const DomainError& e) {
    trial.truncated = std::string("domain error after ") + std::to_string(xs.size() - 1) + " steps: " + e.what();
  }
  trial.steps_completed = static_cast<int>(xs.size()) - 1;

  // Accelerations by the five-point central difference of the velocities.
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 2; i + 2 < xs.size(); ++i) {
    const Vector4d xdd = (-vs[i + 2] + 8.0 * vs[i + 1] - 8.0 * vs[i - 1] + vs[i - 2]) / (12.0 * h);
    Vector4d gvv;
    try {
      gvv = gamma_vv(gp, xs[i], vs[i]);
    } catch (const DomainError& e) {
      if (!trial.truncated) trial.truncated = std::string("g' not evaluable along the path: ") + e.what();
      break;
    }
    const Vector4d a = xdd + gvv;
    // |ẋ|²/L keeps stencil rounding in ẍ from dominating when both accelerations vanish.
    const double speed = vs[i].norm();
    const double score = wedge_norm(a, vs[i]) / (speed * (xdd.norm() + gvv.norm() + speed * speed / length) + eps);
    trial.score = std::max(trial.score, score);
  }
  return trial;
}

}  // namespace

GeodesicReport pregeodesic_check(const MetricSpec& g, const MetricSpec& g_prime, const GeodesicOptions& options) {
  if (options.trials <= 0 || options.steps < 5 || !(options.horizon > 0.0))
    throw std::invalid_argument("pregeodesic_check needs trials > 0, steps >= 5 and a positive horizon");
  const SampleBox box = options.box ? *options.box : g.sample_box() ? *g.sample_box() : default_box();
  std::vector<Point> starts;
  for (const Point& x : sample_points(g, 4 * static_cast<std::size_t>(options.trials), options.seed, box))
    if (g_prime.admissible(x) && starts.size() < static_cast<std::size_t>(options.trials)) starts.push_back(x);
  if (starts.size() < static_cast<std::size_t>(options.trials))
    throw Error("not enough starting points admissible for both metrics");

  std::mt19937_64 rng(options.seed ^ 0x6a09e667f3bcc909ULL);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  std::vector<Vector4d> velocities(starts.size());
  for (auto& v : velocities)
    for (int a = 0; a < 4; ++a) {
      const auto [lo, hi] = box.ranges[static_cast<std::size_t>(a)];
      v[a] = options.speed * (hi - lo) * uniform();
    }

  double length = 0.0;
  for (const auto& [lo, hi] : box.ranges) length = std::max(length, hi - lo);

  GeodesicReport out;
  out.trials.resize(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { out.trials[i] = run_trial(g, g_prime, starts[i], velocities[i], options, length); });
  for (const auto& t : out.trials) out.score = std::max(out.score, t.score);
  return out;
}

}  // namespace lorhol
