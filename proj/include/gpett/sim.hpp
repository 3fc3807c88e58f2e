#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "gpett/angles.hpp"
#include "gpett/errors.hpp"
#include "gpett/geometry.hpp"
#include "gpett/pipeline.hpp"
#include "gpett/tracker.hpp"

namespace gpett {

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

struct Circle {
  double radius = 1.0;
};

struct Ellipse {
  double semi_major = 2.0;  ///< along the local x axis
  double semi_minor = 1.0;
};

/// Rectangle with half extents along local x/y; corner_radius = 0 gives sharp corners.
struct RoundedRectangle {
  double half_length = 1.0;
  double half_width = 1.0;
  double corner_radius = 0.0;
};

/// Union of two centered, perpendicular bars.
struct Cross {
  double arm_length = 2.0;      ///< center to bar end
  double arm_half_width = 0.5;
};

/// r(theta) = mean_radius * (1 + amplitude * cos(lobes * theta)).
struct Star {
  double mean_radius = 2.0;
  double amplitude = 0.25;
  int lobes = 5;
};

/// Periodic piecewise-linear radius table.
struct RadialTable {
  std::vector<double> angles;  ///< strictly increasing, in [0, 2pi)
  std::vector<double> radii;
};

using ShapeForm = std::variant<Circle, Ellipse, RoundedRectangle, Cross, Star, RadialTable>;

namespace detail {

inline double rectangle_radius(double hl, double hw, double rc, double theta) {
  const double c = std::abs(std::cos(theta));
  const double s = std::abs(std::sin(theta));
  // flat sides
  if (c > 0.0) {
    const double t = hl / c;
    if (t * s <= hw - rc + 1e-15) return t;
  }
  if (s > 0.0) {
    const double t = hw / s;
    if (t * c <= hl - rc + 1e-15) return t;
  }
  // rounded corner: |t*u - (a, b)| = rc, larger root
  const double a = hl - rc;
  const double b = hw - rc;
  const double half_p = c * a + s * b;
  const double q = a * a + b * b - rc * rc;
  return half_p + std::sqrt(std::max(0.0, half_p * half_p - q));
}

inline double table_radius(const RadialTable& t, double theta) {
  const double x = wrap_two_pi(theta);
  const auto& a = t.angles;
  const auto& r = t.radii;
  const std::size_t n = a.size();
  if (n == 1) return r[0];
  auto it = std::upper_bound(a.begin(), a.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - a.begin());
  double x0, x1, r0, r1;
  if (hi == 0 || hi == n) {
    // wrap-around segment between the last and first entries
    x0 = a[n - 1];
    r0 = r[n - 1];
    x1 = a[0] + kTwoPi;
    r1 = r[0];
    const double xx = hi == 0 ? x + kTwoPi : x;
    return r0 + (r1 - r0) * (xx - x0) / (x1 - x0);
  }
  x0 = a[hi - 1];
  x1 = a[hi];
  r0 = r[hi - 1];
  r1 = r[hi];
  return r0 + (r1 - r0) * (x - x0) / (x1 - x0);
}

}  // namespace detail

/// Ground-truth star-convex extent as a radial function of the local angle.
struct ShapeModel {
  std::string id;
  ShapeForm form;

  double radius(double theta_local) const {
    return std::visit(
        [theta_local](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          const double th = theta_local;
          if constexpr (std::is_same_v<T, Circle>) {
            return s.radius;
          } else if constexpr (std::is_same_v<T, Ellipse>) {
            const double bc = s.semi_minor * std::cos(th);
            const double as = s.semi_major * std::sin(th);
            return s.semi_major * s.semi_minor / std::sqrt(bc * bc + as * as);
          } else if constexpr (std::is_same_v<T, RoundedRectangle>) {
            return detail::rectangle_radius(s.half_length, s.half_width, s.corner_radius, th);
          } else if constexpr (std::is_same_v<T, Cross>) {
            return std::max(detail::rectangle_radius(s.arm_length, s.arm_half_width, 0.0, th),
                            detail::rectangle_radius(s.arm_half_width, s.arm_length, 0.0, th));
          } else if constexpr (std::is_same_v<T, Star>) {
            return s.mean_radius * (1.0 + s.amplitude * std::cos(s.lobes * th));
          } else {
            return detail::table_radius(s, th);
          }
        },
        form);
  }

  void validate() const {
    std::visit(
        [](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Circle>) {
            if (!(s.radius > 0.0)) throw InvalidArgument("circle: radius must be > 0");
          } else if constexpr (std::is_same_v<T, Ellipse>) {
            if (!(s.semi_major > 0.0 && s.semi_minor > 0.0)) throw InvalidArgument("ellipse: axes must be > 0");
          } else if constexpr (std::is_same_v<T, RoundedRectangle>) {
            if (!(s.half_length > 0.0 && s.half_width > 0.0 && s.corner_radius >= 0.0 &&
                  s.corner_radius <= std::min(s.half_length, s.half_width)))
              throw InvalidArgument("rectangle: invalid dimensions");
          } else if constexpr (std::is_same_v<T, Cross>) {
            if (!(s.arm_half_width > 0.0 && s.arm_length >= s.arm_half_width))
              throw InvalidArgument("cross: invalid dimensions");
          } else if constexpr (std::is_same_v<T, Star>) {
            if (!(s.mean_radius > 0.0 && s.amplitude >= 0.0 && s.amplitude < 1.0 && s.lobes >= 0))
              throw InvalidArgument("star: invalid parameters");
          } else {
            if (s.angles.empty() || s.angles.size() != s.radii.size())
              throw InvalidArgument("radial table: angles and radii must be non-empty and equal length");
            for (std::size_t i = 0; i < s.angles.size(); ++i) {
              if (!(s.radii[i] > 0.0)) throw InvalidArgument("radial table: radii must be > 0");
              if (s.angles[i] < 0.0 || s.angles[i] >= kTwoPi)
                throw InvalidArgument("radial table: angle outside [0, 2pi)");
              if (i > 0 && !(s.angles[i] > s.angles[i - 1]))
                throw InvalidArgument("radial table: angles not strictly increasing");
            }
          }
        },
        form);
  }
};

inline double shape_radius(const ShapeModel& shape, double theta_local) { return shape.radius(theta_local); }

/// Stand-ins for the five benchmark shapes S1..S5.
inline ShapeModel library_shape(const std::string& id) {
  if (id == "S1") return {id, Star{2.0, 0.25, 5}};
  if (id == "S2") return {id, Cross{2.5, 0.8}};
  if (id == "S3") return {id, Ellipse{2.5, 1.25}};
  if (id == "S4") return {id, RoundedRectangle{2.5, 1.25, 0.4}};
  if (id == "S5") return {id, Star{2.0, 0.15, 3}};
  if (id == "circle") return {id, Circle{2.0}};
  if (id == "ellipse") return {id, Ellipse{2.5, 1.25}};
  throw InvalidArgument("unknown library shape '" + id + "'");
}

// ---------------------------------------------------------------------------
// Scenarios and ground truth
// ---------------------------------------------------------------------------

struct Waypoint {
  double time = 0.0;
  Point2 position = Point2::Zero();
};

struct PointsPerScan {
  enum class Kind { Fixed, Poisson };
  Kind kind = Kind::Fixed;
  double value = 20.0;  ///< count, or Poisson mean
};

struct Scenario {
  std::string name;
  ShapeModel shape;
  std::vector<Waypoint> waypoints;
  double orientation = 0.0;
  double scan_rate = 1.0;  ///< Hz
  PointsPerScan points;
  double noise_std = 0.1;  ///< true measurement noise [m]
  double duration = 1.0;   ///< s

  void validate() const {
    shape.validate();
    if (waypoints.size() < 2) throw InvalidArgument("scenario '" + name + "': need at least two waypoints");
    for (std::size_t i = 1; i < waypoints.size(); ++i)
      if (!(waypoints[i].time > waypoints[i - 1].time))
        throw InvalidArgument("scenario '" + name + "': waypoint times not strictly increasing");
    if (!(scan_rate > 0.0)) throw InvalidArgument("scenario '" + name + "': scan_rate must be > 0");
    if (!(duration > 0.0)) throw InvalidArgument("scenario '" + name + "': duration must be > 0");
    if (!(noise_std >= 0.0)) throw InvalidArgument("scenario '" + name + "': noise_std must be >= 0");
    if (!(points.value >= 1.0) && points.kind == PointsPerScan::Kind::Fixed)
      throw InvalidArgument("scenario '" + name + "': need at least one point per scan");
    if (!(points.value > 0.0)) throw InvalidArgument("scenario '" + name + "': points_per_scan must be > 0");
  }
};

/// A lap around a 40 m x 30 m rectangle at roughly 1 m/s, fixed orientation.
inline std::vector<Waypoint> default_waypoints() {
  return {{0.0, {0.0, 0.0}}, {40.0, {40.0, 0.0}}, {70.0, {40.0, 30.0}}, {110.0, {0.0, 30.0}},
          {140.0, {0.0, 0.0}}, {180.0, {40.0, 0.0}}, {210.0, {40.0, 30.0}}, {250.0, {0.0, 30.0}}};
}

inline Scenario library_scenario(const std::string& shape_id, double duration = 229.0) {
  Scenario s;
  s.name = shape_id;
  s.shape = library_shape(shape_id);
  s.waypoints = default_waypoints();
  s.duration = duration;
  return s;
}

struct GroundTruthFrame {
  double time = 0.0;
  Point2 center = Point2::Zero();
  Point2 velocity = Point2::Zero();
  double psi = 0.0;
  Polygon contour;
};

inline constexpr std::size_t kTruthContourVertices = 360;

inline Polygon shape_contour(const ShapeModel& shape, const Point2& center, double psi,
                             std::size_t vertices = kTruthContourVertices) {
  Polygon poly(vertices);
  for (std::size_t i = 0; i < vertices; ++i) {
    const double th = kTwoPi * static_cast<double>(i) / static_cast<double>(vertices);
    const double r = shape.radius(th);
    poly[i] = center + r * Point2(std::cos(psi + th), std::sin(psi + th));
  }
  return poly;
}

inline std::size_t frame_count(const Scenario& sc) {
  return static_cast<std::size_t>(std::floor(sc.duration * sc.scan_rate + 1e-9)) + 1;
}

/// Piecewise-linear motion through the waypoints, sampled at the scan times.
inline std::vector<GroundTruthFrame> generate_trajectory(const Scenario& sc) {
  sc.validate();
  const double t0 = sc.waypoints.front().time;
  const double t_end = sc.waypoints.back().time;
  if (t0 + sc.duration > t_end + 1e-9)
    throw InvalidArgument("generate_trajectory: duration exceeds waypoint span");

  const std::size_t n = frame_count(sc);
  std::vector<GroundTruthFrame> frames(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) / sc.scan_rate;
    while (seg + 2 < sc.waypoints.size() && t >= sc.waypoints[seg + 1].time) ++seg;
    const Waypoint& a = sc.waypoints[seg];
    const Waypoint& b = sc.waypoints[seg + 1];
    const Point2 vel = (b.position - a.position) / (b.time - a.time);
    GroundTruthFrame& f = frames[k];
    f.time = t;
    f.velocity = vel;
    f.center = a.position + vel * (t - a.time);
    f.psi = sc.orientation;
    f.contour = shape_contour(sc.shape, f.center, f.psi);
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Measurements and seeding
// ---------------------------------------------------------------------------

/// splitmix64 finalizer over (master, index): distinct, well-mixed child seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Points drawn uniformly in local angle on the true contour plus isotropic noise.
inline Scan generate_scan(const GroundTruthFrame& frame, const Scenario& sc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t count = 0;
  if (sc.points.kind == PointsPerScan::Kind::Fixed) {
    count = static_cast<std::size_t>(std::llround(sc.points.value));
  } else {
    std::poisson_distribution<long> pois(sc.points.value);
    count = static_cast<std::size_t>(std::max(1L, pois(rng)));
  }
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Scan scan;
  scan.time = frame.time;
  scan.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double th = angle(rng);
    const double r = sc.shape.radius(th);
    Point2 p = frame.center + r * Point2(std::cos(frame.psi + th), std::sin(frame.psi + th));
    if (sc.noise_std > 0.0) {
      const double nx = gauss(rng);
      const double ny = gauss(rng);
      p += sc.noise_std * Point2(nx, ny);
    }
    scan.points.push_back(p);
  }
  return scan;
}

struct SimulatedRun {
  std::vector<GroundTruthFrame> truth;
  std::vector<Scan> scans;
};

inline SimulatedRun simulate_run(const Scenario& sc, std::uint64_t run_seed) {
  SimulatedRun run;
  run.truth = generate_trajectory(sc);
  run.scans.reserve(run.truth.size());
  for (std::size_t k = 0; k < run.truth.size(); ++k)
    run.scans.push_back(generate_scan(run.truth[k], sc, derive_seed(run_seed, k)));
  return run;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  SimulatedRun sim;
  TrackOutput track;
};

/// Runs `task(i)` for i in [0, n) on a worker pool and returns the results in
/// index order, independent of scheduling.
template <class Task>
auto parallel_indexed(std::size_t n, std::size_t threads, Task&& task) {
  using Result = std::invoke_result_t<Task&, std::size_t>;
  std::vector<std::optional<Result>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        slots[i].emplace(task(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  std::vector<Result> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

/// Independent seeded runs of one scenario. Each finished RunRecord is handed
/// to `reduce`, whose results are returned in run order; run i uses
/// derive_seed(master_seed, i). Tracker failures mark the record as failed
/// instead of aborting the batch.
template <class Reduce>
auto run_monte_carlo(const Scenario& sc, const TrackerConfig& cfg, std::size_t n_runs, std::uint64_t master_seed,
                     std::size_t threads, Reduce&& reduce) {
  if (n_runs < 1) throw InvalidArgument("run_monte_carlo: n_runs must be >= 1");
  sc.validate();
  cfg.validate();
  return parallel_indexed(n_runs, threads, [&](std::size_t i) {
    RunRecord rec;
    rec.index = i;
    rec.seed = derive_seed(master_seed, i);
    rec.sim = simulate_run(sc, rec.seed);
    try {
      rec.track = run_tracker(rec.sim.scans, cfg);
    } catch (const NumericalFailure& e) {
      rec.failed = true;
      rec.error = e.what();
    } catch (const DegenerateGeometry& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    return reduce(std::move(rec));
  });
}

inline std::vector<RunRecord> run_monte_carlo(const Scenario& sc, const TrackerConfig& cfg, std::size_t n_runs,
                                              std::uint64_t master_seed, std::size_t threads = 0) {
  return run_monte_carlo(sc, cfg, n_runs, master_seed, threads, [](RunRecord&& r) { return std::move(r); });
}

}  // namespace gpett
