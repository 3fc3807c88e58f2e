#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gpett/errors.hpp"
#include "gpett/io/csv.hpp"
#include "gpett/sim.hpp"
#include "gpett/tracker.hpp"

namespace gpett::harness {

/// Recorded scans with optional per-frame ground truth.
struct RealScanSet {
  std::vector<long long> frame_ids;
  std::vector<Scan> scans;
  std::optional<std::vector<GroundTruthFrame>> truth;  ///< aligned with `scans`
};

// Scan file:    frame_id,time_s,x_m,y_m            (one row per point)
// Truth file:   frame_id,time_s,cx,cy,vx,vy,psi    (one row per frame)
// Contour file: frame_id,x,y                       (vertices in order, per frame)

struct ScanRows {
  std::vector<long long> frame_ids;
  std::vector<Scan> scans;
};

inline ScanRows parse_scans(const io::CsvTable& t) {
  const std::size_t c_id = t.column("frame_id");
  const std::size_t c_t = t.column("time_s");
  const std::size_t c_x = t.column("x_m");
  const std::size_t c_y = t.column("y_m");
  ScanRows out;
  std::map<long long, std::size_t> index;
  for (const auto& row : t.rows) {
    const long long id = io::parse_integer(t, row, c_id);
    const double time = io::parse_double(t, row, c_t);
    const Point2 p(io::parse_double(t, row, c_x), io::parse_double(t, row, c_y));
    if (!std::isfinite(time) || !p.allFinite()) throw ParseError(t.source, row.line, "non-finite value");
    auto it = index.find(id);
    if (it == index.end()) {
      if (!out.scans.empty() && !(time > out.scans.back().time))
        throw ValidationError(t.source + ":" + std::to_string(row.line) + ": frame " + std::to_string(id) +
                              " does not advance time");
      index.emplace(id, out.scans.size());
      out.frame_ids.push_back(id);
      out.scans.push_back({time, {p}});
    } else {
      Scan& s = out.scans[it->second];
      if (time != s.time)
        throw ValidationError(t.source + ":" + std::to_string(row.line) + ": frame " + std::to_string(id) +
                              " repeated with a different time");
      s.points.push_back(p);
    }
  }
  return out;
}

inline void write_scans(std::ostream& out, std::span<const long long> frame_ids, std::span<const Scan> scans) {
  io::CsvWriter w(out, {"frame_id", "time_s", "x_m", "y_m"});
  for (std::size_t k = 0; k < scans.size(); ++k)
    for (const auto& p : scans[k].points)
      w.row({std::to_string(frame_ids[k]), io::format_number(scans[k].time), io::format_number(p.x()),
             io::format_number(p.y())});
}

struct TruthRow {
  long long frame_id = 0;
  GroundTruthFrame frame;
};

inline std::vector<TruthRow> parse_truth(const io::CsvTable& t) {
  const std::size_t c_id = t.column("frame_id");
  const std::size_t c_t = t.column("time_s");
  const std::size_t c_cx = t.column("cx");
  const std::size_t c_cy = t.column("cy");
  const std::size_t c_vx = t.column("vx");
  const std::size_t c_vy = t.column("vy");
  const std::size_t c_psi = t.column("psi");
  std::vector<TruthRow> out;
  for (const auto& row : t.rows) {
    TruthRow r;
    r.frame_id = io::parse_integer(t, row, c_id);
    r.frame.time = io::parse_double(t, row, c_t);
    r.frame.center = {io::parse_double(t, row, c_cx), io::parse_double(t, row, c_cy)};
    r.frame.velocity = {io::parse_double(t, row, c_vx), io::parse_double(t, row, c_vy)};
    r.frame.psi = io::parse_double(t, row, c_psi);
    if (!out.empty() && !(r.frame.time > out.back().frame.time))
      throw ValidationError(t.source + ":" + std::to_string(row.line) + ": truth times not strictly increasing");
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_truth(std::ostream& out, std::span<const long long> frame_ids,
                        std::span<const GroundTruthFrame> truth) {
  io::CsvWriter w(out, {"frame_id", "time_s", "cx", "cy", "vx", "vy", "psi"});
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto& f = truth[k];
    w.row({std::to_string(frame_ids[k]), io::format_number(f.time), io::format_number(f.center.x()),
           io::format_number(f.center.y()), io::format_number(f.velocity.x()), io::format_number(f.velocity.y()),
           io::format_number(f.psi)});
  }
}

inline std::map<long long, Polygon> parse_contours(const io::CsvTable& t) {
  const std::size_t c_id = t.column("frame_id");
  const std::size_t c_x = t.column("x");
  const std::size_t c_y = t.column("y");
  std::map<long long, Polygon> out;
  for (const auto& row : t.rows)
    out[io::parse_integer(t, row, c_id)].emplace_back(io::parse_double(t, row, c_x), io::parse_double(t, row, c_y));
  return out;
}

inline void write_contours(std::ostream& out, std::span<const long long> frame_ids,
                           std::span<const GroundTruthFrame> truth) {
  io::CsvWriter w(out, {"frame_id", "x", "y"});
  for (std::size_t k = 0; k < truth.size(); ++k)
    for (const auto& p : truth[k].contour)
      w.row({std::to_string(frame_ids[k]), io::format_number(p.x()), io::format_number(p.y())});
}

/// Loads scans and, when given, truth rows and contours matched to the scan frames by id.
inline RealScanSet ingest_real_scans(const std::filesystem::path& scan_path,
                                     const std::optional<std::filesystem::path>& truth_path = std::nullopt,
                                     const std::optional<std::filesystem::path>& contour_path = std::nullopt) {
  ScanRows rows = parse_scans(io::read_csv_file(scan_path));
  RealScanSet set;
  set.frame_ids = std::move(rows.frame_ids);
  set.scans = std::move(rows.scans);
  if (!truth_path) return set;
  if (!contour_path) throw ValidationError("truth given without contour file");

  const auto truth_rows = parse_truth(io::read_csv_file(*truth_path));
  auto contours = parse_contours(io::read_csv_file(*contour_path));
  std::map<long long, const TruthRow*> by_id;
  for (const auto& r : truth_rows) by_id[r.frame_id] = &r;

  std::vector<GroundTruthFrame> truth;
  truth.reserve(set.scans.size());
  for (std::size_t k = 0; k < set.scans.size(); ++k) {
    const long long id = set.frame_ids[k];
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("no truth row for frame " + std::to_string(id));
    GroundTruthFrame f = it->second->frame;
    if (f.time != set.scans[k].time)
      throw ValidationError("truth time differs from scan time at frame " + std::to_string(id));
    auto c = contours.find(id);
    if (c == contours.end() || c->second.size() < 3)
      throw ValidationError("no truth contour (>= 3 vertices) for frame " + std::to_string(id));
    f.contour = std::move(c->second);
    truth.push_back(std::move(f));
  }
  set.truth = std::move(truth);
  return set;
}

}  // namespace gpett::harness
