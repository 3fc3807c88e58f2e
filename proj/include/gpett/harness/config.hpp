#pragma once

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpett/pipeline.hpp"
#include "gpett/regress_demo.hpp"
#include "gpett/sim.hpp"

namespace gpett::harness {

/// Malformed or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { RegressDemo, Simulate, Track, Benchmark, RealData };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::RegressDemo: return "regress-demo";
    case Mode::Simulate: return "simulate";
    case Mode::Track: return "track";
    case Mode::Benchmark: return "benchmark";
    case Mode::RealData: return "real-data";
  }
  return "";
}

inline Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::RegressDemo, Mode::Simulate, Mode::Track, Mode::Benchmark, Mode::RealData})
    if (s == mode_name(m)) return m;
  throw ConfigError("unknown mode '" + s + "'");
}

struct RealDataPaths {
  std::filesystem::path scans;
  std::optional<std::filesystem::path> truth;
  std::optional<std::filesystem::path> truth_contours;
};

struct ExperimentConfig {
  Mode mode = Mode::Benchmark;
  std::vector<Scenario> scenarios;
  TrackerConfig tracker;
  std::size_t n_runs = 100;
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "out";
  std::vector<std::size_t> snapshot_frames{1, 50, 150, 230};  ///< 1-based
  std::size_t threads = 0;                                    ///< 0 = hardware concurrency
  std::optional<std::string> baseline;
  double raster_resolution = 100.0;
  RegressDemoConfig demo;
  RealDataPaths real;

  void validate() const {
    try {
      tracker.validate();
      for (const auto& s : scenarios) s.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    if (n_runs < 1) throw ConfigError("runs must be >= 1");
    if (!(raster_resolution > 0.0)) throw ConfigError("raster_resolution must be > 0");
    for (std::size_t f : snapshot_frames)
      if (f < 1) throw ConfigError("snapshot frames are 1-based");
    if ((mode == Mode::Simulate || mode == Mode::Benchmark) && scenarios.empty())
      throw ConfigError("no scenarios configured");
    if (mode == Mode::Track || mode == Mode::RealData) {
      if (real.scans.empty()) throw ConfigError("no scan file configured (real_data.scans or --scans)");
      if (!std::filesystem::exists(real.scans)) throw ConfigError("scan file not found: " + real.scans.string());
      if (real.truth && !std::filesystem::exists(*real.truth))
        throw ConfigError("truth file not found: " + real.truth->string());
      if (real.truth_contours && !std::filesystem::exists(*real.truth_contours))
        throw ConfigError("truth contour file not found: " + real.truth_contours->string());
      if (real.truth.has_value() != real.truth_contours.has_value())
        throw ConfigError("real_data.truth and real_data.truth_contours must be given together");
    }
    if (mode == Mode::RegressDemo) {
      if (demo.basis_sizes.empty()) throw ConfigError("regress_demo.basis_sizes is empty");
      if (demo.query_points < 2) throw ConfigError("regress_demo.query_points must be >= 2");
      if (demo.subset_inputs < 1 || demo.subset_inputs > demo.subset_measurements)
        throw ConfigError("regress_demo.subset_inputs must be in [1, subset_measurements]");
      if (!(demo.domain_hi > demo.domain_lo)) throw ConfigError("regress_demo domain is empty");
      try {
        demo.hp.validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    }
  }
};

/// Tracker parameters for simulated scenarios.
inline TrackerConfig simulation_tracker_defaults() {
  TrackerConfig t;
  t.noise = {1.0, 1e-4};
  t.hp = {2.0, std::numbers::pi / 10, 0.8, 0.004, 1.0};
  return t;
}

/// Tracker parameters for recorded data.
inline TrackerConfig real_data_tracker_defaults() {
  TrackerConfig t;
  t.noise = {3.0, 1e-6};
  t.hp = {4.0, std::numbers::pi / 12, 0.8, 0.08, 1.0};
  return t;
}

inline ExperimentConfig default_config(Mode mode) {
  ExperimentConfig c;
  c.mode = mode;
  c.tracker = (mode == Mode::RealData || mode == Mode::Track) ? real_data_tracker_defaults()
                                                              : simulation_tracker_defaults();
  if (mode == Mode::Simulate) {
    c.scenarios.push_back(library_scenario("S1"));
    c.n_runs = 1;
  } else if (mode == Mode::Benchmark) {
    for (const char* id : {"S1", "S2", "S3", "S4", "S5"}) c.scenarios.push_back(library_scenario(id));
    c.tracker.use_smoother = true;
  }
  return c;
}

namespace detail {

using json = nlohmann::json;

/// Rejects keys outside `allowed` so typos do not silently fall back to defaults.
inline void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
void read_opt(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline double num(const json& obj, const char* key, double fallback, const std::string& where) {
  double v = fallback;
  read_opt(obj, key, v, where);
  return v;
}

inline ShapeModel parse_shape(const json& j, const std::string& id, const std::string& where) {
  if (j.is_string()) return library_shape(j.get<std::string>());
  if (j.contains("library")) {
    check_keys(j, {"library"}, where);
    return library_shape(j.at("library").get<std::string>());
  }
  std::string type;
  read_opt(j, "type", type, where);
  ShapeModel s;
  s.id = id;
  if (type == "circle") {
    check_keys(j, {"type", "radius"}, where);
    s.form = Circle{num(j, "radius", 1.0, where)};
  } else if (type == "ellipse") {
    check_keys(j, {"type", "semi_major", "semi_minor"}, where);
    s.form = Ellipse{num(j, "semi_major", 2.0, where), num(j, "semi_minor", 1.0, where)};
  } else if (type == "rectangle") {
    check_keys(j, {"type", "half_length", "half_width", "corner_radius"}, where);
    s.form = RoundedRectangle{num(j, "half_length", 1.0, where), num(j, "half_width", 1.0, where),
                              num(j, "corner_radius", 0.0, where)};
  } else if (type == "cross") {
    check_keys(j, {"type", "arm_length", "arm_half_width"}, where);
    s.form = Cross{num(j, "arm_length", 2.0, where), num(j, "arm_half_width", 0.5, where)};
  } else if (type == "star") {
    check_keys(j, {"type", "mean_radius", "amplitude", "lobes"}, where);
    int lobes = 5;
    read_opt(j, "lobes", lobes, where);
    s.form = Star{num(j, "mean_radius", 2.0, where), num(j, "amplitude", 0.25, where), lobes};
  } else if (type == "table") {
    check_keys(j, {"type", "angles", "radii"}, where);
    RadialTable t;
    read_opt(j, "angles", t.angles, where);
    read_opt(j, "radii", t.radii, where);
    s.form = std::move(t);
  } else {
    throw ConfigError(where + ": unknown shape type '" + type + "'");
  }
  return s;
}

inline Scenario parse_scenario(const json& j, const std::string& where) {
  if (j.is_string()) return library_scenario(j.get<std::string>());
  check_keys(j,
             {"name", "shape", "waypoints", "orientation", "scan_rate", "points_per_scan", "noise_std", "duration"},
             where);
  std::string name = "custom";
  read_opt(j, "name", name, where);
  Scenario s;
  try {
    s = library_scenario(name);
  } catch (const InvalidArgument&) {
    s = library_scenario("S1");
    s.name = name;
    s.shape.id = name;
  }
  if (j.contains("shape")) s.shape = parse_shape(j.at("shape"), name, where + ".shape");
  if (j.contains("waypoints")) {
    s.waypoints.clear();
    for (const auto& w : j.at("waypoints")) {
      if (!w.is_array() || w.size() != 3) throw ConfigError(where + ".waypoints: expected [t, x, y]");
      s.waypoints.push_back({w[0].get<double>(), {w[1].get<double>(), w[2].get<double>()}});
    }
  }
  read_opt(j, "orientation", s.orientation, where);
  read_opt(j, "scan_rate", s.scan_rate, where);
  read_opt(j, "noise_std", s.noise_std, where);
  read_opt(j, "duration", s.duration, where);
  if (j.contains("points_per_scan")) {
    const json& p = j.at("points_per_scan");
    if (p.is_number()) {
      s.points = {PointsPerScan::Kind::Fixed, p.get<double>()};
    } else {
      check_keys(p, {"fixed", "poisson"}, where + ".points_per_scan");
      if (p.contains("fixed") == p.contains("poisson"))
        throw ConfigError(where + ".points_per_scan: give exactly one of 'fixed' or 'poisson'");
      if (p.contains("fixed")) s.points = {PointsPerScan::Kind::Fixed, p.at("fixed").get<double>()};
      else s.points = {PointsPerScan::Kind::Poisson, p.at("poisson").get<double>()};
    }
  }
  return s;
}

inline void parse_tracker(const json& j, TrackerConfig& t) {
  const std::string where = "tracker";
  check_keys(j,
             {"sigma_q", "sigma_q_psi", "sigma_f", "sigma_r", "length_scale", "alpha", "prior_mean", "basis_size",
              "lag", "use_smoother", "init"},
             where);
  read_opt(j, "sigma_q", t.noise.sigma_q, where);
  read_opt(j, "sigma_q_psi", t.noise.sigma_q_psi, where);
  read_opt(j, "sigma_f", t.hp.sigma_f, where);
  read_opt(j, "sigma_r", t.hp.sigma_r, where);
  read_opt(j, "length_scale", t.hp.length_scale, where);
  read_opt(j, "alpha", t.hp.alpha, where);
  read_opt(j, "prior_mean", t.hp.prior_mean, where);
  read_opt(j, "basis_size", t.basis_size, where);
  read_opt(j, "lag", t.lag, where);
  read_opt(j, "use_smoother", t.use_smoother, where);
  if (j.contains("init")) {
    const json& i = j.at("init");
    check_keys(i, {"position_var", "velocity_var", "psi_var"}, where + ".init");
    read_opt(i, "position_var", t.init.position_var, where + ".init");
    read_opt(i, "velocity_var", t.init.velocity_var, where + ".init");
    read_opt(i, "psi_var", t.init.psi_var, where + ".init");
  }
}

inline void parse_demo(const json& j, RegressDemoConfig& d) {
  const std::string where = "regress_demo";
  check_keys(j,
             {"domain_lo", "domain_hi", "measurements", "noise_std", "basis_sizes", "query_points", "subset_inputs",
              "subset_measurements", "sigma_f", "length_scale", "sigma_r", "prior_mean"},
             where);
  read_opt(j, "domain_lo", d.domain_lo, where);
  read_opt(j, "domain_hi", d.domain_hi, where);
  read_opt(j, "measurements", d.measurements, where);
  read_opt(j, "noise_std", d.noise_std, where);
  read_opt(j, "basis_sizes", d.basis_sizes, where);
  read_opt(j, "query_points", d.query_points, where);
  read_opt(j, "subset_inputs", d.subset_inputs, where);
  read_opt(j, "subset_measurements", d.subset_measurements, where);
  read_opt(j, "sigma_f", d.hp.sigma_f, where);
  read_opt(j, "length_scale", d.hp.length_scale, where);
  read_opt(j, "sigma_r", d.hp.sigma_r, where);
  read_opt(j, "prior_mean", d.hp.prior_mean, where);
}

}  // namespace detail

/// Builds a config from a JSON document on top of the defaults of `mode`
/// (the document's own "mode" key, when present, must agree).
inline ExperimentConfig parse_config(const nlohmann::json& j, Mode mode) {
  using detail::read_opt;
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  detail::check_keys(j,
                     {"mode", "seed", "runs", "threads", "output_dir", "snapshot_frames", "baseline",
                      "raster_resolution", "tracker", "scenarios", "real_data", "regress_demo"},
                     "config");
  if (j.contains("mode") && parse_mode(j.at("mode").get<std::string>()) != mode)
    throw ConfigError("config: mode '" + j.at("mode").get<std::string>() + "' does not match subcommand '" +
                      mode_name(mode) + "'");
  ExperimentConfig c = default_config(mode);
  try {
    read_opt(j, "seed", c.master_seed, "config");
    read_opt(j, "runs", c.n_runs, "config");
    read_opt(j, "threads", c.threads, "config");
    std::string out;
    read_opt(j, "output_dir", out, "config");
    if (!out.empty()) c.output_dir = out;
    read_opt(j, "snapshot_frames", c.snapshot_frames, "config");
    read_opt(j, "raster_resolution", c.raster_resolution, "config");
    if (j.contains("baseline")) {
      const auto& b = j.at("baseline");
      if (b.is_null() || (b.is_string() && b.get<std::string>().empty())) c.baseline = std::string();
      else c.baseline = b.get<std::string>();
    }
    if (j.contains("tracker")) detail::parse_tracker(j.at("tracker"), c.tracker);
    if (j.contains("scenarios")) {
      c.scenarios.clear();
      std::size_t i = 0;
      for (const auto& s : j.at("scenarios"))
        c.scenarios.push_back(detail::parse_scenario(s, "scenarios[" + std::to_string(i++) + "]"));
    }
    if (j.contains("real_data")) {
      const auto& r = j.at("real_data");
      detail::check_keys(r, {"scans", "truth", "truth_contours"}, "real_data");
      std::string p;
      read_opt(r, "scans", p, "real_data");
      if (!p.empty()) c.real.scans = p;
      if (r.contains("truth")) c.real.truth = r.at("truth").get<std::string>();
      if (r.contains("truth_contours")) c.real.truth_contours = r.at("truth_contours").get<std::string>();
    }
    if (j.contains("regress_demo")) detail::parse_demo(j.at("regress_demo"), c.demo);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, Mode mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  ExperimentConfig c = parse_config(j, mode);
  // relative data paths resolve against the config's directory
  const auto base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(c.real.scans);
  if (c.real.truth) resolve(*c.real.truth);
  if (c.real.truth_contours) resolve(*c.real.truth_contours);
  return c;
}

}  // namespace gpett::harness
