#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gpett/errors.hpp"
#include "gpett/harness/config.hpp"
#include "gpett/harness/ingest.hpp"
#include "gpett/harness/report.hpp"
#include "gpett/io/csv.hpp"
#include "gpett/metrics.hpp"
#include "gpett/pipeline.hpp"
#include "gpett/regress_demo.hpp"
#include "gpett/sim.hpp"

namespace gpett::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

inline constexpr const char* kFilterName = "GP-EKF";
inline constexpr const char* kSmootherName = "GP-RTSS";

/// Raised by a mode runner after its artifacts are written when some run failed.
class RunFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

namespace fs = std::filesystem;

inline std::vector<long long> one_based_ids(std::size_t n) {
  std::vector<long long> ids(n);
  std::iota(ids.begin(), ids.end(), 1LL);
  return ids;
}

inline std::vector<std::string> method_names(const TrackerConfig& t) {
  std::vector<std::string> m{kFilterName};
  if (t.use_smoother) m.emplace_back(kSmootherName);
  return m;
}

inline std::optional<std::string> resolve_baseline(const ExperimentConfig& cfg, const std::vector<std::string>& methods) {
  if (cfg.baseline) {
    if (cfg.baseline->empty()) return std::nullopt;
    if (std::find(methods.begin(), methods.end(), *cfg.baseline) == methods.end())
      throw ConfigError("unknown baseline '" + *cfg.baseline + "'");
    return cfg.baseline;
  }
  if (methods.size() > 1) return std::string(kFilterName);
  return std::nullopt;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  auto out = io::open_output(path);
  fn(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Frame k (0-based) of a snapshot request, if it exists.
inline std::vector<std::size_t> snapshot_indices(const std::vector<std::size_t>& frames, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t f : frames)
    if (f >= 1 && f <= n) out.push_back(f - 1);
  return out;
}

struct SnapshotSource {
  std::string title;
  std::optional<Polygon> truth;
  std::vector<std::pair<std::string, Polygon>> estimates;
  std::vector<Point2> points;
};

inline void write_snapshot(const fs::path& path, const SnapshotSource& s) {
  static const char* colors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::vector<SnapshotLayer> layers;
  if (s.truth) layers.push_back({"truth", "black", *s.truth, true});
  for (std::size_t i = 0; i < s.estimates.size(); ++i)
    layers.push_back({s.estimates[i].first, colors[i % 4], s.estimates[i].second, false});
  write_file(path, [&](std::ostream& out) { write_snapshot_svg(out, s.title, layers, s.points); });
}

inline MetricsReport single_run_report(const std::string& scenario, const std::vector<std::string>& methods,
                                       const std::vector<RunMetrics>& per_method,
                                       const std::optional<std::string>& baseline) {
  MetricsReport r;
  r.methods = methods;
  r.scenarios = {scenario};
  for (const auto& m : per_method) r.results.push_back({MethodResult{m, 1, 0}});
  r.baseline = baseline;
  return r;
}

// ---------------------------------------------------------------------------

inline void run_regress_demo(const ExperimentConfig& cfg, std::ostream& log) {
  const RegressDemoConfig& d = cfg.demo;
  const fs::path& dir = cfg.output_dir;
  const auto queries = demo_query_grid(d);
  const DemoMeasurements m = demo_measurements(d, cfg.master_seed);
  std::vector<double> distinct;
  const DemoMeasurements subset = subset_measurements(d, cfg.master_seed, distinct);

  std::vector<DemoCase> cases;
  for (std::size_t n : d.basis_sizes)
    cases.push_back(run_demo_case("basis" + std::to_string(n),
                                  InputGrid::uniform_line(d.domain_lo, d.domain_hi, n), m, d.hp, queries));
  cases.push_back(run_demo_case("subset", InputGrid(InputKind::ScalarLine, distinct), subset, d.hp, queries));

  for (const auto& c : cases) {
    write_file(dir / ("regress_demo_" + c.name + ".csv"), [&](std::ostream& out) {
      io::CsvWriter w(out, {"step", "query_input", "mean", "stddev", "oracle_mean", "oracle_stddev"});
      for (const auto& s : c.steps)
        for (std::size_t q = 0; q < c.queries.size(); ++q) {
          const auto i = static_cast<Eigen::Index>(q);
          w.row({std::to_string(s.step), io::format_number(c.queries[q]), io::format_number(s.recursive.mean(i)),
                 io::format_number(std::sqrt(std::max(0.0, s.recursive.cov(i, i)))),
                 io::format_number(s.batch.mean(i)), io::format_number(std::sqrt(std::max(0.0, s.batch.cov(i, i))))});
        }
    });
  }
  write_file(dir / "regress_demo_measurements.csv", [&](std::ostream& out) {
    io::CsvWriter w(out, {"case", "step", "input", "value"});
    for (std::size_t k = 0; k < m.inputs.size(); ++k)
      w.row({"uniform", std::to_string(k + 1), io::format_number(m.inputs[k]), io::format_number(m.values[k])});
    for (std::size_t k = 0; k < subset.inputs.size(); ++k)
      w.row({"subset", std::to_string(k + 1), io::format_number(subset.inputs[k]),
             io::format_number(subset.values[k])});
  });
  write_file(dir / "regress_demo_summary.csv", [&](std::ostream& out) {
    io::CsvWriter w(out, {"case", "basis_size", "measurements", "max_abs_mean_dev", "max_abs_std_dev"});
    for (const auto& c : cases) {
      w.row({c.name, std::to_string(c.basis.size()), std::to_string(c.steps.back().step),
             io::format_number(c.max_mean_deviation), io::format_number(c.max_std_deviation)});
      log << "regress-demo " << c.name << ": max |mean - batch| = " << c.max_mean_deviation << "\n";
    }
  });
}

// ---------------------------------------------------------------------------

struct TrackedSequence {
  std::vector<long long> frame_ids;
  std::vector<Scan> scans;
  std::optional<std::vector<GroundTruthFrame>> truth;
  TrackOutput track;
};

/// Writes states, per-frame metrics (with truth), a one-run report and snapshots.
inline void emit_sequence(const ExperimentConfig& cfg, const std::string& label, const TrackedSequence& seq,
                          const fs::path& dir, std::ostream& log) {
  const auto methods = method_names(cfg.tracker);
  write_file(dir / "states_filtered.csv",
             [&](std::ostream& out) { write_states(out, seq.frame_ids, seq.track.filtered); });
  if (cfg.tracker.use_smoother)
    write_file(dir / "states_smoothed.csv",
               [&](std::ostream& out) { write_states(out, seq.frame_ids, seq.track.smoothed); });

  if (seq.truth) {
    std::vector<RunMetrics> per_method;
    auto evaluate = [&](const std::vector<TrackState>& states, const std::string& suffix) {
      const auto frames = evaluate_track(states, *seq.truth, cfg.raster_resolution);
      write_file(dir / ("frame_metrics_" + suffix + ".csv"),
                 [&](std::ostream& out) { write_frame_metrics(out, seq.frame_ids, frames); });
      per_method.push_back(summarize_run(frames));
    };
    evaluate(seq.track.filtered, "filtered");
    if (cfg.tracker.use_smoother) evaluate(seq.track.smoothed, "smoothed");
    emit_report(single_run_report(label, methods, per_method, resolve_baseline(cfg, methods)), dir);
  } else {
    log << label << ": no ground truth, metrics limited to snapshots\n";
  }

  for (std::size_t k : snapshot_indices(cfg.snapshot_frames, seq.scans.size())) {
    SnapshotSource s;
    s.title = label + " frame " + std::to_string(seq.frame_ids[k]);
    if (seq.truth) s.truth = (*seq.truth)[k].contour;
    s.estimates.emplace_back(kFilterName, contour_estimate(seq.track.filtered[k], kEstimateContourVertices));
    if (cfg.tracker.use_smoother)
      s.estimates.emplace_back(kSmootherName, contour_estimate(seq.track.smoothed[k], kEstimateContourVertices));
    s.points = seq.scans[k].points;
    write_snapshot(dir / ("snapshot_frame" + std::to_string(seq.frame_ids[k]) + ".svg"), s);
  }
}

inline TrackOutput track_or_fail(std::span<const Scan> scans, const TrackerConfig& t, const std::string& label) {
  try {
    return run_tracker(scans, t);
  } catch (const NumericalFailure& e) {
    throw RunFailure(label + " (run 0): " + e.what());
  } catch (const DegenerateGeometry& e) {
    throw RunFailure(label + " (run 0): " + e.what());
  }
}

inline void run_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  for (const Scenario& sc : cfg.scenarios) {
    TrackedSequence seq;
    SimulatedRun sim = simulate_run(sc, derive_seed(cfg.master_seed, 0));
    seq.frame_ids = one_based_ids(sim.scans.size());
    seq.scans = std::move(sim.scans);
    seq.truth = std::move(sim.truth);
    const fs::path dir = cfg.output_dir / sc.name;
    write_file(dir / "scans.csv", [&](std::ostream& out) { write_scans(out, seq.frame_ids, seq.scans); });
    write_file(dir / "truth.csv", [&](std::ostream& out) { write_truth(out, seq.frame_ids, *seq.truth); });
    write_file(dir / "truth_contours.csv",
               [&](std::ostream& out) { write_contours(out, seq.frame_ids, *seq.truth); });
    seq.track = track_or_fail(seq.scans, cfg.tracker, sc.name);
    emit_sequence(cfg, sc.name, seq, dir, log);
    log << "simulate " << sc.name << ": " << seq.scans.size() << " frames -> " << dir.string() << "\n";
  }
}

inline void run_recorded(const ExperimentConfig& cfg, bool with_truth, std::ostream& log) {
  RealScanSet set = with_truth ? ingest_real_scans(cfg.real.scans, cfg.real.truth, cfg.real.truth_contours)
                               : ingest_real_scans(cfg.real.scans);
  TrackedSequence seq;
  seq.frame_ids = std::move(set.frame_ids);
  seq.scans = std::move(set.scans);
  seq.truth = std::move(set.truth);
  const std::string label = cfg.real.scans.stem().string();
  seq.track = track_or_fail(seq.scans, cfg.tracker, label);
  emit_sequence(cfg, label, seq, cfg.output_dir, log);
  log << mode_name(cfg.mode) << " " << label << ": " << seq.scans.size() << " frames -> "
      << cfg.output_dir.string() << "\n";
}

// ---------------------------------------------------------------------------

struct BenchmarkRun {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<RunMetrics> per_method;
  std::vector<SnapshotSource> snapshots;  ///< only for run 0
};

inline void run_benchmark(const ExperimentConfig& cfg, std::ostream& log) {
  const auto methods = method_names(cfg.tracker);
  MetricsReport report;
  report.methods = methods;
  report.results.assign(methods.size(), {});
  report.baseline = resolve_baseline(cfg, methods);
  std::vector<std::string> failures;

  auto per_run_out = io::open_output(cfg.output_dir / "per_run.csv");
  io::CsvWriter per_run(per_run_out, {"scenario", "run", "seed", "method", "failed", "precision", "recall", "rmse_x",
                                      "rmse_y", "rmse_vx", "rmse_vy"});

  for (const Scenario& sc : cfg.scenarios) {
    report.scenarios.push_back(sc.name);
    const auto runs = run_monte_carlo(
        sc, cfg.tracker, cfg.n_runs, cfg.master_seed, cfg.threads, [&](RunRecord&& rec) {
          BenchmarkRun b;
          b.index = rec.index;
          b.seed = rec.seed;
          b.failed = rec.failed;
          b.error = rec.error;
          if (rec.failed) return b;
          b.per_method.push_back(
              summarize_run(evaluate_track(rec.track.filtered, rec.sim.truth, cfg.raster_resolution)));
          if (cfg.tracker.use_smoother)
            b.per_method.push_back(
                summarize_run(evaluate_track(rec.track.smoothed, rec.sim.truth, cfg.raster_resolution)));
          if (rec.index == 0) {
            for (std::size_t k : snapshot_indices(cfg.snapshot_frames, rec.sim.scans.size())) {
              SnapshotSource s;
              s.title = sc.name + " frame " + std::to_string(k + 1);
              s.truth = rec.sim.truth[k].contour;
              s.estimates.emplace_back(kFilterName, contour_estimate(rec.track.filtered[k], kEstimateContourVertices));
              if (cfg.tracker.use_smoother)
                s.estimates.emplace_back(kSmootherName,
                                         contour_estimate(rec.track.smoothed[k], kEstimateContourVertices));
              s.points = rec.sim.scans[k].points;
              b.snapshots.push_back(std::move(s));
            }
          }
          return b;
        });

    std::vector<std::vector<RunMetrics>> ok(methods.size());
    std::size_t failed = 0;
    for (const auto& r : runs) {
      if (r.failed) {
        ++failed;
        failures.push_back(sc.name + " run " + std::to_string(r.index) + ": " + r.error);
        for (const auto& m : methods)
          per_run.row({sc.name, std::to_string(r.index), io::format_number(r.seed), m, "1", "", "", "", "", "", ""});
        continue;
      }
      for (std::size_t k = 0; k < methods.size(); ++k) {
        const RunMetrics& m = r.per_method[k];
        ok[k].push_back(m);
        per_run.row({sc.name, std::to_string(r.index), io::format_number(r.seed), methods[k], "0",
                     io::format_number(m.precision), io::format_number(m.recall), io::format_number(m.rmse_x),
                     io::format_number(m.rmse_y), io::format_number(m.rmse_vx), io::format_number(m.rmse_vy)});
      }
    }
    for (std::size_t k = 0; k < methods.size(); ++k) {
      MethodResult res;
      res.runs = ok[k].size();
      res.failed_runs = failed;
      if (!ok[k].empty()) res.mean = average_runs(ok[k]);
      report.results[k].push_back(res);
    }
    if (!runs.empty() && !runs.front().failed) {
      const auto ids = snapshot_indices(cfg.snapshot_frames, frame_count(sc));
      for (std::size_t i = 0; i < runs.front().snapshots.size(); ++i)
        write_snapshot(cfg.output_dir / ("snapshot_" + sc.name + "_frame" + std::to_string(ids[i] + 1) + ".svg"),
                       runs.front().snapshots[i]);
    }
    log << "benchmark " << sc.name << ": " << (runs.size() - failed) << "/" << runs.size() << " runs ok\n";
  }
  per_run_out.close();

  bool all_present = true;
  for (const auto& per_method : report.results)
    for (const auto& r : per_method) all_present = all_present && r.runs > 0;
  if (all_present) {
    emit_report(report, cfg.output_dir);
  } else {
    log << "benchmark: some scenario has no successful run; measures not written\n";
  }
  if (!failures.empty()) {
    std::string msg = std::to_string(failures.size()) + " run(s) failed:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw RunFailure(msg);
  }
}

}  // namespace detail

/// Executes one experiment and returns the process exit code: 0 success,
/// 1 runtime failure, 2 configuration or input-file error.
inline int run_config(const ExperimentConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  try {
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);
    switch (cfg.mode) {
      case Mode::RegressDemo: detail::run_regress_demo(cfg, log); break;
      case Mode::Simulate: detail::run_simulate(cfg, log); break;
      case Mode::Track: detail::run_recorded(cfg, false, log); break;
      case Mode::RealData: detail::run_recorded(cfg, cfg.real.truth.has_value(), log); break;
      case Mode::Benchmark: detail::run_benchmark(cfg, log); break;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RunFailure& e) {
    err << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace gpett::harness
