#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gpett/errors.hpp"
#include "gpett/io/csv.hpp"
#include "gpett/metrics.hpp"
#include "gpett/tracker.hpp"

namespace gpett::harness {

inline void write_states(std::ostream& out, std::span<const long long> frame_ids, std::span<const TrackState> states) {
  std::vector<std::string> header{"frame_id", "time_s", "x", "y", "vx", "vy", "psi"};
  const Eigen::Index n = states.empty() ? 0 : states.front().extent_size();
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("f" + std::to_string(i));
  io::CsvWriter w(out, header);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const TrackState& s = states[k];
    std::vector<std::string> row{std::to_string(frame_ids[k]), io::format_number(s.time)};
    for (Eigen::Index i = 0; i < s.mean.size(); ++i) row.push_back(io::format_number(s.mean(i)));
    w.row(row);
  }
}

inline void write_frame_metrics(std::ostream& out, std::span<const long long> frame_ids,
                                std::span<const FrameEval> frames) {
  io::CsvWriter w(out, {"frame_id", "time_s", "precision", "recall", "coo_est_x", "coo_est_y", "coo_true_x",
                        "coo_true_y", "vel_est_x", "vel_est_y", "vel_true_x", "vel_true_y"});
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const FrameEval& f = frames[k];
    w.row({std::to_string(frame_ids[k]), io::format_number(f.time), io::format_number(f.precision),
           io::format_number(f.recall), io::format_number(f.coo_est.x()), io::format_number(f.coo_est.y()),
           io::format_number(f.coo_true.x()), io::format_number(f.coo_true.y()), io::format_number(f.vel_est.x()),
           io::format_number(f.vel_est.y()), io::format_number(f.vel_true.x()), io::format_number(f.vel_true.y())});
  }
}

/// Rows are (measure, method), columns are scenarios.
struct MeasureTable {
  struct Row {
    std::string measure;
    std::string method;
    std::vector<double> values;
  };
  std::vector<std::string> scenarios;
  std::vector<Row> rows;
};

inline MeasureTable measures_table(const MetricsReport& r) {
  MeasureTable t;
  t.scenarios = r.scenarios;
  for (Measure m : kAllMeasures) {
    for (std::size_t k = 0; k < r.methods.size(); ++k) {
      MeasureTable::Row row{measure_name(m), r.methods[k], {}};
      for (std::size_t s = 0; s < r.scenarios.size(); ++s) row.values.push_back(measure_value(r.results[k][s].mean, m));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

/// Percentage improvement of every non-baseline method over the baseline.
inline MeasureTable mpi_table(const MetricsReport& r) {
  const std::size_t b = r.method_index(r.baseline.value());
  MeasureTable t;
  t.scenarios = r.scenarios;
  for (Measure m : kAllMeasures)
    for (std::size_t k = 0; k < r.methods.size(); ++k)
      if (k != b) t.rows.push_back({measure_name(m), r.methods[k], r.improvement(k, m)});
  return t;
}

inline void write_measure_table(std::ostream& out, const MeasureTable& t) {
  std::vector<std::string> header{"measure", "method"};
  header.insert(header.end(), t.scenarios.begin(), t.scenarios.end());
  io::CsvWriter w(out, header);
  for (const auto& row : t.rows) {
    std::vector<std::string> cells{row.measure, row.method};
    for (double v : row.values) cells.push_back(io::format_number(v));
    w.row(cells);
  }
}

inline MeasureTable parse_measure_table(const io::CsvTable& csv) {
  if (csv.header.size() < 2 || csv.header[0] != "measure" || csv.header[1] != "method")
    throw ParseError(csv.source, 1, "expected header 'measure,method,<scenario>...'");
  MeasureTable t;
  t.scenarios.assign(csv.header.begin() + 2, csv.header.end());
  for (const auto& row : csv.rows) {
    MeasureTable::Row r{row.cells[0], row.cells[1], {}};
    for (std::size_t c = 2; c < row.cells.size(); ++c) r.values.push_back(io::parse_double(csv, row, c));
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline void write_run_counts(std::ostream& out, const MetricsReport& r) {
  io::CsvWriter w(out, {"method", "scenario", "runs", "failed_runs"});
  for (std::size_t k = 0; k < r.methods.size(); ++k)
    for (std::size_t s = 0; s < r.scenarios.size(); ++s)
      w.row({r.methods[k], r.scenarios[s], std::to_string(r.results[k][s].runs),
             std::to_string(r.results[k][s].failed_runs)});
}

/// Writes measures.csv, run_counts.csv and, when a baseline is named,
/// mpi.csv into `dir`. Returns the written paths.
inline std::vector<std::filesystem::path> emit_report(const MetricsReport& report, const std::filesystem::path& dir) {
  if (report.methods.empty()) throw InvalidArgument("emit_report: no methods");
  if (report.baseline) report.method_index(*report.baseline);  // throws on unknown name

  std::vector<std::filesystem::path> written;
  {
    auto path = dir / "measures.csv";
    auto out = io::open_output(path);
    write_measure_table(out, measures_table(report));
    written.push_back(path);
  }
  {
    auto path = dir / "run_counts.csv";
    auto out = io::open_output(path);
    write_run_counts(out, report);
    written.push_back(path);
  }
  if (report.baseline) {
    auto path = dir / "mpi.csv";
    auto out = io::open_output(path);
    write_measure_table(out, mpi_table(report));
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------------------
// SVG snapshots
// ---------------------------------------------------------------------------

struct SnapshotLayer {
  std::string label;
  std::string color;
  Polygon contour;
  bool dashed = false;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s(buf);
  return s == "-0.0000" ? "0.0000" : s;
}

}  // namespace detail

/// Contours and scan points in world coordinates (y up), fitted to a 600 px square.
inline void write_snapshot_svg(std::ostream& out, const std::string& title, const std::vector<SnapshotLayer>& layers,
                               std::span<const Point2> points) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  auto grow = [&](const Point2& p) {
    x0 = std::min(x0, p.x());
    y0 = std::min(y0, p.y());
    x1 = std::max(x1, p.x());
    y1 = std::max(y1, p.y());
  };
  for (const auto& l : layers)
    for (const auto& p : l.contour) grow(p);
  for (const auto& p : points) grow(p);
  if (x0 > x1) x0 = y0 = -1.0, x1 = y1 = 1.0;
  const double margin = 0.1 * std::max({x1 - x0, y1 - y0, 1.0});
  x0 -= margin;
  y0 -= margin;
  x1 += margin;
  y1 += margin;
  const double size = 600.0;
  const double scale = size / std::max(x1 - x0, y1 - y0);
  auto px = [&](const Point2& p) { return detail::svg_num((p.x() - x0) * scale) + "," + detail::svg_num((y1 - p.y()) * scale); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"640\" viewBox=\"0 0 600 640\">\n";
  out << "<rect width=\"600\" height=\"640\" fill=\"white\"/>\n";
  for (const auto& l : layers) {
    out << "<polygon fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"2\"";
    if (l.dashed) out << " stroke-dasharray=\"6,4\"";
    out << " points=\"";
    for (std::size_t i = 0; i < l.contour.size(); ++i) out << (i ? " " : "") << px(l.contour[i]);
    out << "\"/>\n";
  }
  for (const auto& p : points) {
    const Point2 c((p.x() - x0) * scale, (y1 - p.y()) * scale);
    out << "<circle cx=\"" << detail::svg_num(c.x()) << "\" cy=\"" << detail::svg_num(c.y())
        << "\" r=\"2.5\" fill=\"red\"/>\n";
  }
  double y_text = 620.0;
  out << "<text x=\"8\" y=\"" << detail::svg_num(y_text) << "\" font-family=\"sans-serif\" font-size=\"14\">" << title;
  for (const auto& l : layers) out << "  <tspan fill=\"" << l.color << "\">" << l.label << "</tspan>";
  out << "</text>\n</svg>\n";
}

}  // namespace gpett::harness
