#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "gpett/angles.hpp"
#include "gpett/errors.hpp"
#include "gpett/tracker.hpp"

namespace gpett {

/// Filter output for one scan plus what is needed to smooth back into it.
struct LagEntry {
  TrackState filtered;
  TrackState predicted;       ///< prediction into this scan, before its update
  Eigen::MatrixXd transition; ///< F taking the previous scan's state to this one
};

/// Sliding window of the last lag+1 filter outputs.
class LagWindow {
 public:
  explicit LagWindow(std::size_t lag = 10) : lag_(lag) {}

  std::size_t lag() const { return lag_; }
  const std::deque<LagEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  friend struct SmootherAccess;
  std::size_t lag_;
  std::deque<LagEntry> entries_;
};

struct SmootherStep {
  LagWindow window;
  std::optional<TrackState> emitted;  ///< smoothed state leaving the window, if any
};

namespace detail {

/// One RTS backward step: combines the filtered state at k with the smoothed
/// state at k+1.
inline TrackState rts_step(const TrackState& filtered, const LagEntry& next, const TrackState& next_smoothed) {
  const Eigen::MatrixXd& p_pred = next.predicted.cov;
  Eigen::LLT<Eigen::MatrixXd> llt(p_pred);
  if (!detail::factor_ok(llt)) throw NumericalFailure("smoother: predicted covariance is singular");
  // G = P_k F^T P_pred^-1, computed as (P_pred^-1 F P_k)^T
  const Eigen::MatrixXd gain = llt.solve(next.transition * filtered.cov).transpose();

  Eigen::VectorXd diff = next_smoothed.mean - next.predicted.mean;
  diff(state_index::kPsi) = wrap_pi(diff(state_index::kPsi));

  TrackState out = filtered;
  out.mean = filtered.mean + gain * diff;
  out.mean(state_index::kPsi) = wrap_pi(out.mean(state_index::kPsi));
  out.cov = filtered.cov + gain * (next_smoothed.cov - p_pred) * gain.transpose();
  symmetrize(out.cov);
  return out;
}

}  // namespace detail

/// Backward pass over the whole window; the last element is the filtered
/// state of the newest scan, unchanged.
inline std::vector<TrackState> smooth_window(const LagWindow& window) {
  const auto& e = window.entries();
  std::vector<TrackState> out;
  if (e.empty()) return out;
  out.resize(e.size());
  out.back() = e.back().filtered;
  for (std::size_t k = e.size() - 1; k-- > 0;) out[k] = detail::rts_step(e[k].filtered, e[k + 1], out[k + 1]);
  return out;
}

struct SmootherAccess {
  static std::deque<LagEntry>& entries(LagWindow& w) { return w.entries_; }
};

/// Appends the newest scan. Once the window holds lag+1 scans the oldest one
/// is smoothed with everything after it and leaves the window.
inline SmootherStep smoother_push(LagWindow window, TrackState filtered, TrackState predicted,
                                  Eigen::MatrixXd transition) {
  auto& entries = SmootherAccess::entries(window);
  entries.push_back(LagEntry{std::move(filtered), std::move(predicted), std::move(transition)});
  SmootherStep step{std::move(window), std::nullopt};
  if (step.window.size() > step.window.lag()) {
    auto smoothed = smooth_window(step.window);
    step.emitted = std::move(smoothed.front());
    SmootherAccess::entries(step.window).pop_front();
  }
  return step;
}

/// Smoothed states for every scan still in the window, oldest first.
inline std::vector<TrackState> smoother_flush(const LagWindow& window) { return smooth_window(window); }

}  // namespace gpett
