#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gpett/harness/config.hpp"
#include "gpett/harness/ingest.hpp"
#include "gpett/harness/report.hpp"
#include "gpett/harness/run.hpp"

using namespace gpett;
using namespace gpett::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gpett_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GPETT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig quick(Mode mode, const fs::path& out) {
  ExperimentConfig c = default_config(mode);
  c.output_dir = out;
  for (auto& s : c.scenarios) s.duration = 12.0;
  c.snapshot_frames = {1, 5, 9, 12};
  c.threads = 2;
  return c;
}

}  // namespace

TEST(Csv, NumberFormatRoundTrips) {
  for (double v : {0.1, -1e-300, 1.0 / 3, 12345.678, 0.0}) {
    const std::string s = io::format_number(v);
    EXPECT_EQ(std::stod(s), v);
  }
  EXPECT_EQ(io::format_number(-0.0), "0");
}

TEST(Csv, WriteReadWriteFixpoint) {
  std::ostringstream first;
  {
    io::CsvWriter w(first, {"a", "b"});
    w.row({"1", io::format_number(0.1)});
    w.row({"2", io::format_number(-3.25e-7)});
  }
  std::istringstream in(first.str());
  std::ostringstream second;
  io::write_csv(second, io::read_csv(in, "mem"));
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(first.str().rfind("# schema=1\n", 0), 0u);
}

TEST(Csv, FieldCountMismatchReportsLine) {
  std::istringstream in("# schema=1\na,b\n1,2\n3\n");
  try {
    io::read_csv(in, "mem");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(Ingest, GroupsRowsByFrame) {
  const fs::path dir = scratch_dir("ingest");
  write_text(dir / "scans.csv", "frame_id,time_s,x_m,y_m\n1,0.0,1,0\n1,0.0,0,1\n1,0.0,-1,0\n2,1.0,2,0\n2,1.0,1,1\n");
  const RealScanSet set = ingest_real_scans(dir / "scans.csv");
  ASSERT_EQ(set.scans.size(), 2u);
  EXPECT_EQ(set.scans[0].points.size(), 3u);
  EXPECT_EQ(set.scans[1].points.size(), 2u);
  EXPECT_FALSE(set.truth.has_value());
}

TEST(Ingest, DuplicateFrameWithEarlierTimeRejected) {
  const fs::path dir = scratch_dir("ingest_dup");
  write_text(dir / "scans.csv", "frame_id,time_s,x_m,y_m\n1,1.0,1,0\n2,2.0,0,1\n2,1.5,0,1\n");
  EXPECT_THROW(ingest_real_scans(dir / "scans.csv"), ValidationError);
  write_text(dir / "scans.csv", "frame_id,time_s,x_m,y_m\n1,1.0,1,0\n2,0.5,0,1\n");
  EXPECT_THROW(ingest_real_scans(dir / "scans.csv"), ValidationError);
}

TEST(Ingest, MalformedRowGivesLineNumber) {
  const fs::path dir = scratch_dir("ingest_bad");
  write_text(dir / "scans.csv", "frame_id,time_s,x_m,y_m\n1,0.0,1,0\n1,0.0,abc,0\n");
  try {
    ingest_real_scans(dir / "scans.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Ingest, SimulatedFilesRoundTrip) {
  const fs::path dir = scratch_dir("ingest_rt");
  const Scenario sc = library_scenario("S2", 5.0);
  const auto sim = simulate_run(sc, 4);
  std::vector<long long> ids{1, 2, 3, 4, 5, 6};
  { auto o = io::open_output(dir / "s.csv"); write_scans(o, ids, sim.scans); }
  { auto o = io::open_output(dir / "t.csv"); write_truth(o, ids, sim.truth); }
  { auto o = io::open_output(dir / "c.csv"); write_contours(o, ids, sim.truth); }
  const RealScanSet set = ingest_real_scans(dir / "s.csv", dir / "t.csv", dir / "c.csv");
  ASSERT_TRUE(set.truth);
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_EQ(set.scans[k].points, sim.scans[k].points);
    EXPECT_EQ((*set.truth)[k].contour, sim.truth[k].contour);
    EXPECT_EQ((*set.truth)[k].velocity, sim.truth[k].velocity);
  }
  std::ostringstream again;
  write_scans(again, set.frame_ids, set.scans);
  EXPECT_EQ(again.str(), read_text(dir / "s.csv"));
}

TEST(Report, SingleMethodWithoutBaselineWritesMeasuresOnly) {
  const fs::path dir = scratch_dir("report1");
  MetricsReport r;
  r.methods = {"GP-EKF"};
  r.scenarios = {"S1"};
  RunMetrics m;
  m.rmse_x = 0.1;
  r.results = {{MethodResult{m, 3, 0}}};
  emit_report(r, dir);
  EXPECT_TRUE(fs::exists(dir / "measures.csv"));
  EXPECT_FALSE(fs::exists(dir / "mpi.csv"));
  const auto t = parse_measure_table(io::read_csv_file(dir / "measures.csv"));
  EXPECT_EQ(t.rows.size(), 6u);
  EXPECT_EQ(t.rows[0].values[0], 0.1);
}

TEST(Report, BaselineProducesSignedImprovements) {
  const fs::path dir = scratch_dir("report2");
  MetricsReport r;
  r.methods = {"A", "B"};
  r.scenarios = {"S1"};
  RunMetrics a, b;
  a.rmse_x = 0.1010;
  b.rmse_x = 0.27;
  a.precision = 0.8;
  b.precision = 0.9;
  a.rmse_y = a.rmse_vx = a.rmse_vy = a.recall = b.rmse_y = b.rmse_vx = b.rmse_vy = b.recall = 1.0;
  r.results = {{MethodResult{a, 1, 0}}, {MethodResult{b, 1, 0}}};
  r.baseline = "A";
  emit_report(r, dir);
  const auto t = parse_measure_table(io::read_csv_file(dir / "mpi.csv"));
  ASSERT_EQ(t.rows.size(), 6u);
  EXPECT_EQ(t.rows[0].measure, "rmse_x");
  EXPECT_EQ(t.rows[0].method, "B");
  EXPECT_NEAR(t.rows[0].values[0], -167.3, 0.5);
  EXPECT_NEAR(t.rows[4].values[0], 12.5, 1e-9);
}

TEST(Report, UnknownBaselineThrows) {
  MetricsReport r;
  r.methods = {"A"};
  r.scenarios = {"S1"};
  r.results = {{MethodResult{}}};
  r.baseline = "Z";
  EXPECT_THROW(emit_report(r, scratch_dir("report3")), InvalidArgument);
}

TEST(Config, ParsesKeysOverDefaults) {
  const auto j = nlohmann::json::parse(R"({
    "mode": "benchmark", "seed": 9, "runs": 3, "baseline": "",
    "tracker": {"sigma_q": 2.0, "lag": 4, "use_smoother": true},
    "scenarios": ["S3", {"name": "box", "shape": {"type": "rectangle", "half_length": 2, "half_width": 1},
                         "duration": 20, "points_per_scan": {"poisson": 15}}]
  })");
  const ExperimentConfig c = parse_config(j, Mode::Benchmark);
  EXPECT_EQ(c.master_seed, 9u);
  EXPECT_EQ(c.n_runs, 3u);
  EXPECT_EQ(c.tracker.noise.sigma_q, 2.0);
  EXPECT_EQ(c.tracker.lag, 4u);
  EXPECT_EQ(c.tracker.hp.sigma_f, 2.0);
  ASSERT_EQ(c.scenarios.size(), 2u);
  EXPECT_EQ(c.scenarios[1].points.kind, PointsPerScan::Kind::Poisson);
  ASSERT_TRUE(c.baseline);
  EXPECT_TRUE(c.baseline->empty());
}

TEST(Config, RealDataDefaults) {
  const ExperimentConfig c = default_config(Mode::RealData);
  EXPECT_EQ(c.tracker.noise.sigma_q, 3.0);
  EXPECT_EQ(c.tracker.noise.sigma_q_psi, 1e-6);
  EXPECT_EQ(c.tracker.hp.sigma_f, 4.0);
  EXPECT_NEAR(c.tracker.hp.length_scale, std::numbers::pi / 12, 1e-15);
  EXPECT_EQ(c.tracker.hp.alpha, 0.08);
}

TEST(Config, RejectsUnknownKeysAndModeMismatch) {
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"sedd": 1})"), Mode::Benchmark), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"mode": "simulate"})"), Mode::Benchmark), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"runs": 0})"), Mode::Benchmark).validate(), ConfigError);
}

TEST(Run, SimulateWithSmootherFinalRowsAgree) {
  const fs::path dir = scratch_dir("simulate");
  ExperimentConfig c = quick(Mode::Simulate, dir);
  c.tracker.use_smoother = true;
  std::ostringstream log, err;
  ASSERT_EQ(run_config(c, log, err), 0) << err.str();
  const auto f = io::read_csv_file(dir / "S1" / "states_filtered.csv");
  const auto s = io::read_csv_file(dir / "S1" / "states_smoothed.csv");
  ASSERT_EQ(f.rows.size(), 13u);
  ASSERT_EQ(s.rows.size(), 13u);
  EXPECT_EQ(f.rows.back().cells, s.rows.back().cells);
  EXPECT_NE(f.rows.front().cells, s.rows.front().cells);
  int svgs = 0;
  for (const auto& e : fs::directory_iterator(dir / "S1")) svgs += e.path().extension() == ".svg";
  EXPECT_EQ(svgs, 4);
}

TEST(Run, BenchmarkIsDeterministic) {
  const fs::path a = scratch_dir("bench_a"), b = scratch_dir("bench_b");
  ExperimentConfig ca = quick(Mode::Benchmark, a), cb = quick(Mode::Benchmark, b);
  ca.n_runs = cb.n_runs = 2;
  ca.threads = 1;
  cb.threads = 3;
  std::ostringstream log, err;
  ASSERT_EQ(run_config(ca, log, err), 0) << err.str();
  ASSERT_EQ(run_config(cb, log, err), 0) << err.str();
  int csvs = 0, svgs = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() == ".csv") {
      ++csvs;
      EXPECT_EQ(read_text(e.path()), read_text(b / e.path().filename())) << e.path();
    }
    svgs += e.path().extension() == ".svg";
  }
  EXPECT_EQ(csvs, 4);      // measures, mpi, run_counts, per_run
  EXPECT_EQ(svgs, 4 * 5);  // four frames for each of S1..S5
}

TEST(Run, UnknownBaselineIsConfigError) {
  ExperimentConfig c = quick(Mode::Benchmark, scratch_dir("bench_bad"));
  c.n_runs = 1;
  c.baseline = "nope";
  std::ostringstream log, err;
  EXPECT_EQ(run_config(c, log, err), 2);
}

TEST(Run, RealDataWithoutTruthReportsIt) {
  const fs::path dir = scratch_dir("realdata");
  const auto sim = simulate_run(library_scenario("S3", 8.0), 2);
  std::vector<long long> ids{1, 2, 3, 4, 5, 6, 7, 8, 9};
  { auto o = io::open_output(dir / "scans.csv"); write_scans(o, ids, sim.scans); }
  ExperimentConfig c = default_config(Mode::RealData);
  c.real.scans = dir / "scans.csv";
  c.output_dir = dir / "out";
  std::ostringstream log, err;
  ASSERT_EQ(run_config(c, log, err), 0) << err.str();
  EXPECT_NE(log.str().find("no ground truth"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "states_filtered.csv"));
  EXPECT_FALSE(fs::exists(dir / "out" / "measures.csv"));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  write_text(dir / "ok.json", R"({"regress_demo": {"basis_sizes": [5, 10]}})");
  write_text(dir / "bad.json", R"({"regress_demo": {"basis_size": [5]}})");
  write_text(dir / "broken.json", "{ not json");
  EXPECT_EQ(run_cli("regress-demo --config " + (dir / "ok.json").string() + " --out " + (dir / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "regress_demo_basis10.csv"));
  EXPECT_TRUE(fs::exists(dir / "o" / "regress_demo_subset.csv"));
  EXPECT_EQ(run_cli("regress-demo --config " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("regress-demo --config " + (dir / "broken.json").string()), 2);
  EXPECT_EQ(run_cli("benchmark --runs notanumber"), 2);
  EXPECT_EQ(run_cli("no-such-mode"), 2);
  EXPECT_EQ(run_cli("track --out " + (dir / "t").string()), 2);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Snapshot, SvgContainsLayersAndPoints) {
  std::ostringstream out;
  const Polygon tri{{0, 0}, {1, 0}, {0, 1}};
  write_snapshot_svg(out, "t", {{"truth", "black", tri, true}, {"est", "blue", tri, false}}, tri);
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("stroke-dasharray"), std::string::npos);
  std::size_t circles = 0;
  for (std::size_t p = s.find("<circle"); p != std::string::npos; p = s.find("<circle", p + 1)) ++circles;
  EXPECT_EQ(circles, 3u);
}
