#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gpett/errors.hpp"
#include "gpett/geometry.hpp"
#include "gpett/sim.hpp"
#include "gpett/tracker.hpp"

namespace gpett {

inline constexpr double kDefaultRasterResolution = 100.0;  // cells per metre
inline constexpr std::size_t kEstimateContourVertices = 360;

namespace detail {

struct Interval {
  double lo;
  double hi;
};

/// Active-edge scanline sweep over one polygon. Rows must be visited in
/// non-decreasing y.
class ScanlineSweep {
 public:
  explicit ScanlineSweep(const Polygon& poly) {
    const std::size_t n = poly.size();
    edges_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = poly[i];
      const Point2& b = poly[(i + 1) % n];
      if (a.y() == b.y()) continue;
      const Point2& lo = a.y() < b.y() ? a : b;
      const Point2& hi = a.y() < b.y() ? b : a;
      edges_.push_back({lo.y(), hi.y(), lo.x(), (hi.x() - lo.x()) / (hi.y() - lo.y())});
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& l, const Edge& r) { return l.y_lo < r.y_lo; });
  }

  /// Even-odd inside intervals along the horizontal line at height y.
  void intervals_at(double y, std::vector<Interval>& out) {
    while (next_ < edges_.size() && edges_[next_].y_lo <= y) active_.push_back(next_++);
    std::erase_if(active_, [&](std::size_t e) { return edges_[e].y_hi <= y; });
    xs_.clear();
    for (std::size_t e : active_) xs_.push_back(edges_[e].x_lo + (y - edges_[e].y_lo) * edges_[e].slope);
    std::sort(xs_.begin(), xs_.end());
    out.clear();
    for (std::size_t i = 0; i + 1 < xs_.size(); i += 2) out.push_back({xs_[i], xs_[i + 1]});
  }

 private:
  struct Edge {
    double y_lo, y_hi, x_lo, slope;
  };
  std::vector<Edge> edges_;
  std::vector<std::size_t> active_;
  std::vector<double> xs_;
  std::size_t next_ = 0;
};

inline double total_length(const std::vector<Interval>& v) {
  double len = 0.0;
  for (const auto& i : v) len += i.hi - i.lo;
  return len;
}

inline double overlap_length(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  double len = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (hi > lo) len += hi - lo;
    if (a[i].hi < b[j].hi)
      ++i;
    else
      ++j;
  }
  return len;
}

struct Box {
  double x0, y0, x1, y1;
};

inline Box bounding_box(const Polygon& p) {
  Box b{p[0].x(), p[0].y(), p[0].x(), p[0].y()};
  for (const auto& v : p) {
    b.x0 = std::min(b.x0, v.x());
    b.y0 = std::min(b.y0, v.y());
    b.x1 = std::max(b.x1, v.x());
    b.y1 = std::max(b.y1, v.y());
  }
  return b;
}

inline void require_polygon(const Polygon& p, const char* what) {
  if (p.size() < 3) throw InvalidArgument(std::string(what) + ": polygon needs at least 3 vertices");
  for (const auto& v : p)
    if (!v.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite vertex");
}

}  // namespace detail

/// Area of a ∩ b sampled on horizontal scanlines spaced 1/resolution apart
/// (one line through the middle of each raster row). Error is
/// O(perimeter / resolution).
inline double polygon_intersection_area(const Polygon& a, const Polygon& b,
                                        double resolution = kDefaultRasterResolution) {
  detail::require_polygon(a, "polygon_intersection_area");
  detail::require_polygon(b, "polygon_intersection_area");
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw InvalidArgument("polygon_intersection_area: resolution must be > 0");

  const detail::Box ba = detail::bounding_box(a);
  const detail::Box bb = detail::bounding_box(b);
  const double y0 = std::max(ba.y0, bb.y0);
  const double y1 = std::min(ba.y1, bb.y1);
  if (!(y1 > y0) || std::min(ba.x1, bb.x1) <= std::max(ba.x0, bb.x0)) return 0.0;

  const double dy = 1.0 / resolution;
  const auto rows = static_cast<std::size_t>(std::ceil((y1 - y0) * resolution));
  detail::ScanlineSweep sa(a);
  detail::ScanlineSweep sb(b);
  std::vector<detail::Interval> ia;
  std::vector<detail::Interval> ib;
  double area = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = y0 + (static_cast<double>(r) + 0.5) * dy;
    sa.intervals_at(y, ia);
    sb.intervals_at(y, ib);
    area += detail::overlap_length(ia, ib) * dy;
  }
  return area;
}

/// Areas of a, b and a ∩ b from one raster over the union of their extents.
struct OverlapAreas {
  double first = 0.0;
  double second = 0.0;
  double intersection = 0.0;
};

inline OverlapAreas polygon_overlap_areas(const Polygon& a, const Polygon& b,
                                          double resolution = kDefaultRasterResolution) {
  detail::require_polygon(a, "polygon_overlap_areas");
  detail::require_polygon(b, "polygon_overlap_areas");
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw InvalidArgument("polygon_overlap_areas: resolution must be > 0");
  const detail::Box ba = detail::bounding_box(a);
  const detail::Box bb = detail::bounding_box(b);
  const double y0 = std::min(ba.y0, bb.y0);
  const double y1 = std::max(ba.y1, bb.y1);
  OverlapAreas out;
  if (!(y1 > y0)) return out;
  const double dy = 1.0 / resolution;
  const auto rows = static_cast<std::size_t>(std::ceil((y1 - y0) * resolution));
  detail::ScanlineSweep sa(a);
  detail::ScanlineSweep sb(b);
  std::vector<detail::Interval> ia;
  std::vector<detail::Interval> ib;
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = y0 + (static_cast<double>(r) + 0.5) * dy;
    sa.intervals_at(y, ia);
    sb.intervals_at(y, ib);
    out.first += detail::total_length(ia) * dy;
    out.second += detail::total_length(ib) * dy;
    out.intersection += detail::overlap_length(ia, ib) * dy;
  }
  return out;
}

inline double polygon_area(const Polygon& p, double resolution = kDefaultRasterResolution) {
  return polygon_intersection_area(p, p, resolution);
}

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// P = |est ∩ truth| / |est|, R = |est ∩ truth| / |truth|, all areas from one raster.
inline PrecisionRecall precision_recall_frame(const Polygon& est, const Polygon& truth,
                                              double resolution = kDefaultRasterResolution) {
  const OverlapAreas areas = polygon_overlap_areas(est, truth, resolution);
  const double est_area = areas.first;
  const double truth_area = areas.second;
  if (!(est_area > 0.0)) throw DegenerateEstimate("precision_recall_frame: estimate has zero area");
  if (!(truth_area > 0.0)) throw DegenerateEstimate("precision_recall_frame: truth has zero area");
  const double inter = areas.intersection;
  return {std::clamp(inter / est_area, 0.0, 1.0), std::clamp(inter / truth_area, 0.0, 1.0)};
}

/// Center of the object: area centroid of the closed contour.
inline Point2 coo_from_contour(const Polygon& contour) {
  detail::require_polygon(contour, "coo_from_contour");
  const Point2 origin = vertex_mean(contour);
  double twice_area = 0.0;
  Point2 acc = Point2::Zero();
  const std::size_t n = contour.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = contour[i] - origin;
    const Point2 q = contour[(i + 1) % n] - origin;
    const double cross = p.x() * q.y() - q.x() * p.y();
    twice_area += cross;
    acc += (p + q) * cross;
  }
  if (std::abs(twice_area) <= 1e-15) throw DegenerateEstimate("coo_from_contour: zero-area contour");
  return origin + acc / (3.0 * twice_area);
}

inline double rmse_series(std::span<const double> errors) {
  if (errors.empty()) throw InvalidArgument("rmse_series: empty series");
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

enum class MetricKind { ErrorLike, ScoreLike };

/// Positive when `method` beats `baseline`.
inline double mean_percentage_improvement(double baseline, double method, MetricKind kind) {
  if (!(baseline > 0.0)) throw InvalidArgument("mean_percentage_improvement: baseline must be > 0");
  return kind == MetricKind::ErrorLike ? 100.0 * (baseline - method) / baseline
                                       : 100.0 * (method - baseline) / baseline;
}

// ---------------------------------------------------------------------------
// Per-frame and per-run evaluation
// ---------------------------------------------------------------------------

struct FrameEval {
  double time = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  Point2 coo_est = Point2::Zero();
  Point2 coo_true = Point2::Zero();
  Point2 vel_est = Point2::Zero();
  Point2 vel_true = Point2::Zero();
};

/// A collapsed estimate (zero area) scores P = R = 0 and falls back to the
/// tracked position as its CoO.
inline FrameEval evaluate_frame(const TrackState& est, const GroundTruthFrame& truth,
                                double resolution = kDefaultRasterResolution) {
  FrameEval fe;
  fe.time = truth.time;
  fe.vel_est = est.velocity();
  fe.vel_true = truth.velocity;
  fe.coo_true = coo_from_contour(truth.contour);
  const Polygon contour = contour_estimate(est, kEstimateContourVertices);
  try {
    const PrecisionRecall pr = precision_recall_frame(contour, truth.contour, resolution);
    fe.precision = pr.precision;
    fe.recall = pr.recall;
    fe.coo_est = coo_from_contour(contour);
  } catch (const DegenerateEstimate&) {
    fe.precision = 0.0;
    fe.recall = 0.0;
    fe.coo_est = est.center();
  }
  return fe;
}

inline std::vector<FrameEval> evaluate_track(std::span<const TrackState> estimates,
                                             std::span<const GroundTruthFrame> truth,
                                             double resolution = kDefaultRasterResolution) {
  if (estimates.size() != truth.size()) throw InvalidArgument("evaluate_track: estimate/truth length mismatch");
  std::vector<FrameEval> out;
  out.reserve(estimates.size());
  for (std::size_t k = 0; k < estimates.size(); ++k) out.push_back(evaluate_frame(estimates[k], truth[k], resolution));
  return out;
}

/// Mean P/R and CoO RMSE values of one run (or their average over runs).
struct RunMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double rmse_x = 0.0;
  double rmse_y = 0.0;
  double rmse_vx = 0.0;
  double rmse_vy = 0.0;
};

inline RunMetrics summarize_run(std::span<const FrameEval> frames) {
  if (frames.empty()) throw InvalidArgument("summarize_run: no frames");
  RunMetrics m;
  std::vector<double> ex, ey, evx, evy;
  for (const auto& f : frames) {
    m.precision += f.precision;
    m.recall += f.recall;
    ex.push_back(f.coo_est.x() - f.coo_true.x());
    ey.push_back(f.coo_est.y() - f.coo_true.y());
    evx.push_back(f.vel_est.x() - f.vel_true.x());
    evy.push_back(f.vel_est.y() - f.vel_true.y());
  }
  const auto n = static_cast<double>(frames.size());
  m.precision /= n;
  m.recall /= n;
  m.rmse_x = rmse_series(ex);
  m.rmse_y = rmse_series(ey);
  m.rmse_vx = rmse_series(evx);
  m.rmse_vy = rmse_series(evy);
  return m;
}

/// Field-wise mean over runs.
inline RunMetrics average_runs(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw InvalidArgument("average_runs: no runs");
  RunMetrics m;
  for (const auto& r : runs) {
    m.precision += r.precision;
    m.recall += r.recall;
    m.rmse_x += r.rmse_x;
    m.rmse_y += r.rmse_y;
    m.rmse_vx += r.rmse_vx;
    m.rmse_vy += r.rmse_vy;
  }
  const auto n = static_cast<double>(runs.size());
  m.precision /= n;
  m.recall /= n;
  m.rmse_x /= n;
  m.rmse_y /= n;
  m.rmse_vx /= n;
  m.rmse_vy /= n;
  return m;
}

// ---------------------------------------------------------------------------
// Report tables
// ---------------------------------------------------------------------------

enum class Measure { RmseX, RmseY, RmseVx, RmseVy, Precision, Recall };

inline constexpr Measure kAllMeasures[] = {Measure::RmseX,  Measure::RmseY,     Measure::RmseVx,
                                           Measure::RmseVy, Measure::Precision, Measure::Recall};

inline const char* measure_name(Measure m) {
  switch (m) {
    case Measure::RmseX: return "rmse_x";
    case Measure::RmseY: return "rmse_y";
    case Measure::RmseVx: return "rmse_vx";
    case Measure::RmseVy: return "rmse_vy";
    case Measure::Precision: return "precision";
    case Measure::Recall: return "recall";
  }
  return "";
}

inline MetricKind measure_kind(Measure m) {
  return (m == Measure::Precision || m == Measure::Recall) ? MetricKind::ScoreLike : MetricKind::ErrorLike;
}

inline double measure_value(const RunMetrics& r, Measure m) {
  switch (m) {
    case Measure::RmseX: return r.rmse_x;
    case Measure::RmseY: return r.rmse_y;
    case Measure::RmseVx: return r.rmse_vx;
    case Measure::RmseVy: return r.rmse_vy;
    case Measure::Precision: return r.precision;
    case Measure::Recall: return r.recall;
  }
  return 0.0;
}

/// Aggregated measures of one method on one scenario.
struct MethodResult {
  RunMetrics mean;
  std::size_t runs = 0;
  std::size_t failed_runs = 0;
};

/// Measures per (method, scenario) with an optional baseline for MPI tables.
struct MetricsReport {
  std::vector<std::string> methods;
  std::vector<std::string> scenarios;
  std::vector<std::vector<MethodResult>> results;  ///< [method][scenario]
  std::optional<std::string> baseline;

  std::size_t method_index(const std::string& name) const {
    auto it = std::find(methods.begin(), methods.end(), name);
    if (it == methods.end()) throw InvalidArgument("unknown method '" + name + "'");
    return static_cast<std::size_t>(it - methods.begin());
  }

  /// MPI of `method` over the baseline on every scenario for measure m.
  std::vector<double> improvement(std::size_t method, Measure m) const {
    if (!baseline) throw InvalidArgument("MetricsReport: no baseline named");
    const std::size_t b = method_index(*baseline);
    std::vector<double> out;
    for (std::size_t s = 0; s < scenarios.size(); ++s)
      out.push_back(mean_percentage_improvement(measure_value(results[b][s].mean, m),
                                                measure_value(results[method][s].mean, m), measure_kind(m)));
    return out;
  }
};

}  // namespace gpett
