// gpett: command-line front-end for the tracking experiments.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "gpett/harness/config.hpp"
#include "gpett/harness/run.hpp"

namespace {

using namespace gpett::harness;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> lag;
  std::optional<std::size_t> threads;
  bool smoother = false;
  std::optional<std::string> scans;
  std::optional<std::string> truth;
  std::optional<std::string> truth_contours;
};

ExperimentConfig build_config(Mode mode, const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? default_config(mode) : load_config(o.config, mode);
  if (o.seed) c.master_seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.runs) c.n_runs = *o.runs;
  if (o.lag) c.tracker.lag = *o.lag;
  if (o.threads) c.threads = *o.threads;
  if (o.smoother) c.tracker.use_smoother = true;
  if (o.scans) c.real.scans = *o.scans;
  if (o.truth) c.real.truth = *o.truth;
  if (o.truth_contours) c.real.truth_contours = *o.truth_contours;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extended object tracking with Gaussian-process extent models"};
  app.require_subcommand(1);
  Overrides o;

  const Mode modes[] = {Mode::RegressDemo, Mode::Simulate, Mode::Track, Mode::Benchmark, Mode::RealData};
  const char* help[] = {"recursive vs batch GP regression on a 1-D function",
                        "one simulated run with per-frame outputs and snapshots",
                        "track a recorded scan file (no ground truth)",
                        "Monte Carlo comparison of filter and smoother",
                        "track a recorded scan file, scored against ground truth when given"};
  std::optional<Mode> chosen;
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(mode_name(modes[i]), help[i]);
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--runs", o.runs, "Monte Carlo runs");
    sub->add_option("--lag", o.lag, "smoother lag (scans)");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    sub->add_flag("--smoother", o.smoother, "also run the fixed-lag smoother");
    if (modes[i] == Mode::Track || modes[i] == Mode::RealData) {
      sub->add_option("--scans", o.scans, "scan CSV (frame_id,time_s,x_m,y_m)");
      if (modes[i] == Mode::RealData) {
        sub->add_option("--truth", o.truth, "truth CSV (frame_id,time_s,cx,cy,vx,vy,psi)");
        sub->add_option("--truth-contours", o.truth_contours, "truth contour CSV (frame_id,x,y)");
      }
    }
    const Mode m = modes[i];
    sub->callback([&chosen, m] { chosen = m; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    return run_config(build_config(*chosen, o));
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
