#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gpett/errors.hpp"
#include "gpett/smoother.hpp"
#include "gpett/tracker.hpp"

namespace gpett {

struct TrackerConfig {
  GpHyperParams hp;
  ProcessNoiseConfig noise;
  std::size_t basis_size = 20;
  std::size_t lag = 10;
  bool use_smoother = false;
  InitialUncertainty init;

  void validate() const {
    hp.validate();
    noise.validate();
    if (basis_size < 3) throw InvalidArgument("TrackerConfig: basis_size must be >= 3");
  }
};

/// Per-scan estimates. `smoothed` is empty unless the smoother is enabled;
/// otherwise it has one fixed-lag estimate per scan, same order as `filtered`.
struct TrackOutput {
  std::vector<TrackState> filtered;
  std::vector<TrackState> smoothed;
};

/// GP-EKF over a scan sequence, optionally followed by the fixed-lag RTS smoother.
inline TrackOutput run_tracker(std::span<const Scan> scans, const TrackerConfig& cfg) {
  cfg.validate();
  TrackOutput out;
  if (scans.empty()) return out;
  out.filtered.reserve(scans.size());

  const auto extent = make_extent_model(cfg.basis_size, cfg.hp);
  LagWindow window(cfg.lag);
  TrackState prior = make_initial_state(scans.front(), extent, cfg.init);

  for (std::size_t k = 0; k < scans.size(); ++k) {
    const Scan& scan = scans[k];
    TrackState predicted = prior;
    Eigen::MatrixXd transition = Eigen::MatrixXd::Identity(prior.mean.size(), prior.mean.size());
    if (k > 0) {
      const double dt = scan.time - out.filtered.back().time;
      if (!(dt > 0.0)) throw ValidationError("run_tracker: scan times must be strictly increasing");
      const ProcessModel pm = make_process_model(dt, cfg.noise, *extent);
      predicted = apply_process_model(out.filtered.back(), pm, dt);
      transition = pm.F;
    }
    TrackState filtered = ekf_update_scan(predicted, scan);
    if (cfg.use_smoother) {
      auto step = smoother_push(std::move(window), filtered, std::move(predicted), std::move(transition));
      window = std::move(step.window);
      if (step.emitted) out.smoothed.push_back(std::move(*step.emitted));
    }
    out.filtered.push_back(std::move(filtered));
  }
  if (cfg.use_smoother) {
    for (auto& s : smoother_flush(window)) out.smoothed.push_back(std::move(s));
  }
  return out;
}

}  // namespace gpett
