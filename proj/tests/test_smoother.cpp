#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "gpett/pipeline.hpp"
#include "gpett/sim.hpp"
#include "gpett/smoother.hpp"
#include "support.hpp"

using namespace gpett;
using namespace gpett::state_index;

namespace {

struct LinearRun {
  oracle::LinearSystem sys;
  std::vector<oracle::KfStep> kf;
  std::vector<TrackState> filtered, predicted;
  Eigen::MatrixXd F;
};

// Position-only measurements drive the tracker's own filter; the oracle filters
// the same data independently.
LinearRun linear_run(int steps) {
  const GpHyperParams hp{2.0, 0.5, 0.8, 0.0, 1.0};
  const auto model = make_extent_model(5, hp);
  TrackState s = make_initial_state({0.0, {Point2(1, 0), Point2(0, 1), Point2(-1, 0)}}, model);
  const ProcessNoiseConfig pn{0.5, 1e-2};
  const auto pm = make_process_model(1.0, pn, *model);
  const testing_support::PositionOnly meas{0.3};

  LinearRun r;
  r.F = pm.F;
  r.sys = {pm.F, pm.Q, Eigen::MatrixXd::Zero(2, s.mean.size()), 0.09 * Eigen::MatrixXd::Identity(2, 2)};
  r.sys.H(0, kX) = r.sys.H(1, kY) = 1.0;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0, 0.3);
  std::vector<Eigen::VectorXd> zs;
  const oracle::Belief x0{s.mean, s.cov};
  for (int k = 0; k < steps; ++k) {
    const Point2 z(0.8 * k + g(rng), -0.3 * k + g(rng));
    zs.push_back(z);
    TrackState pred = k == 0 ? s : apply_process_model(r.filtered.back(), pm, 1.0);
    r.predicted.push_back(pred);
    r.filtered.push_back(ekf_update_scan(pred, Scan{static_cast<double>(k), {z}}, meas));
  }
  r.kf = oracle::kalman(r.sys, x0, zs);
  return r;
}

}  // namespace

TEST(Smoother, ZeroLagReturnsFilterSequence) {
  const Scenario sc = library_scenario("circle", 20.0);
  const auto sim = simulate_run(sc, 3);
  TrackerConfig cfg;
  cfg.use_smoother = true;
  cfg.lag = 0;
  const auto out = run_tracker(sim.scans, cfg);
  ASSERT_EQ(out.smoothed.size(), out.filtered.size());
  for (std::size_t k = 0; k < out.filtered.size(); ++k) {
    EXPECT_EQ(out.smoothed[k].mean, out.filtered[k].mean);
    EXPECT_EQ(out.smoothed[k].cov, out.filtered[k].cov);
  }
}

TEST(Smoother, NewestEqualsFiltered) {
  const auto r = linear_run(15);
  LagWindow w(4);
  for (std::size_t k = 0; k < r.filtered.size(); ++k) {
    auto step = smoother_push(std::move(w), r.filtered[k], r.predicted[k], k == 0 ? Eigen::MatrixXd::Identity(r.F.rows(), r.F.cols()) : r.F);
    w = std::move(step.window);
    const auto sm = smooth_window(w);
    EXPECT_LT((sm.back().mean - r.filtered[k].mean).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((sm.back().cov - r.filtered[k].cov).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Smoother, FullWindowMatchesBatchRts) {
  const int n = 25;
  const auto r = linear_run(n);
  for (int k = 0; k < n; ++k) ASSERT_LT((r.filtered[k].mean - r.kf[k].filtered.mean).cwiseAbs().maxCoeff(), 1e-10);
  LagWindow w(n);
  for (int k = 0; k < n; ++k) {
    auto step = smoother_push(std::move(w), r.filtered[k], r.predicted[k], r.F);
    ASSERT_FALSE(step.emitted);
    w = std::move(step.window);
  }
  const auto sm = smoother_flush(w);
  const auto batch = oracle::rts(r.sys, r.kf);
  ASSERT_EQ(sm.size(), batch.size());
  for (int k = 0; k < n; ++k) {
    EXPECT_LT((sm[k].mean - batch[k].mean).cwiseAbs().maxCoeff(), 1e-8) << k;
    EXPECT_LT((sm[k].cov - batch[k].cov).cwiseAbs().maxCoeff(), 1e-8) << k;
  }
}

TEST(Smoother, FixedLagEmissionMatchesTruncatedRts) {
  const int n = 20, lag = 3;
  const auto r = linear_run(n);
  LagWindow w(lag);
  std::vector<TrackState> emitted;
  for (int k = 0; k < n; ++k) {
    auto step = smoother_push(std::move(w), r.filtered[k], r.predicted[k], r.F);
    if (step.emitted) emitted.push_back(*step.emitted);
    w = std::move(step.window);
  }
  ASSERT_EQ(emitted.size(), static_cast<std::size_t>(n - lag));
  for (int k = 0; k < n - lag; ++k) {
    const std::vector<oracle::KfStep> prefix(r.kf.begin(), r.kf.begin() + k + lag + 1);
    const auto batch = oracle::rts(r.sys, prefix);
    EXPECT_LT((emitted[k].mean - batch[k].mean).cwiseAbs().maxCoeff(), 1e-8) << k;
  }
}

TEST(Smoother, TrackerFinalSmoothedEqualsFiltered) {
  const Scenario sc = library_scenario("ellipse", 30.0);
  const auto sim = simulate_run(sc, 8);
  TrackerConfig cfg;
  cfg.use_smoother = true;
  const auto out = run_tracker(sim.scans, cfg);
  EXPECT_EQ(out.smoothed.back().mean, out.filtered.back().mean);
  EXPECT_EQ(out.smoothed.size(), out.filtered.size());
}

TEST(Pipeline, NonIncreasingTimesRejected) {
  std::vector<Scan> scans{{0.0, {Point2(1, 0), Point2(0, 1)}}, {0.0, {Point2(1, 0)}}};
  EXPECT_THROW(run_tracker(scans, TrackerConfig{}), ValidationError);
}
