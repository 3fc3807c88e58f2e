#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gpett/gp_model.hpp"
#include "gpett/rgp.hpp"

namespace gpett {

/// Sequential 1-D regression of a static function: recursive GP over basis
/// points against the batch GP on the same measurements.
struct RegressDemoConfig {
  double domain_lo = 0.0;
  double domain_hi = 10.0;
  std::size_t measurements = 40;
  double noise_std = 0.2;
  std::vector<std::size_t> basis_sizes{5, 10, 20};
  std::size_t query_points = 200;
  std::size_t subset_inputs = 10;        ///< distinct inputs in the exactness case
  std::size_t subset_measurements = 30;
  GpHyperParams hp{1.0, 1.0, 0.2, 0.0, 0.0};
};

inline double demo_latent_function(double x) { return std::sin(x) + 0.5 * std::sin(2.3 * x + 0.4); }

struct DemoMeasurements {
  std::vector<double> inputs;
  std::vector<double> values;
};

/// Inputs uniform on the domain.
inline DemoMeasurements demo_measurements(const RegressDemoConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(cfg.domain_lo, cfg.domain_hi);
  std::normal_distribution<double> noise(0.0, 1.0);
  DemoMeasurements m;
  for (std::size_t i = 0; i < cfg.measurements; ++i) {
    const double xi = x(rng);
    m.inputs.push_back(xi);
    m.values.push_back(demo_latent_function(xi) + cfg.noise_std * noise(rng));
  }
  return m;
}

/// Repeated measurements at a few distinct inputs; `distinct` receives the
/// sorted inputs, which are meant to serve as the basis.
inline DemoMeasurements subset_measurements(const RegressDemoConfig& cfg, std::uint64_t seed,
                                            std::vector<double>& distinct) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(cfg.domain_lo, cfg.domain_hi);
  std::normal_distribution<double> noise(0.0, 1.0);
  distinct.clear();
  while (distinct.size() < cfg.subset_inputs) {
    const double xi = x(rng);
    if (std::none_of(distinct.begin(), distinct.end(), [&](double d) { return std::abs(d - xi) < 1e-6; }))
      distinct.push_back(xi);
  }
  std::sort(distinct.begin(), distinct.end());

  std::uniform_int_distribution<std::size_t> pick(0, distinct.size() - 1);
  DemoMeasurements m;
  for (std::size_t i = 0; i < cfg.subset_measurements; ++i) {
    // cycle through every input once before sampling at random
    const std::size_t k = i < distinct.size() ? i : pick(rng);
    m.inputs.push_back(distinct[k]);
    m.values.push_back(demo_latent_function(distinct[k]) + cfg.noise_std * noise(rng));
  }
  return m;
}

inline std::vector<double> demo_query_grid(const RegressDemoConfig& cfg) {
  return InputGrid::uniform_line(cfg.domain_lo, cfg.domain_hi, cfg.query_points).points();
}

struct DemoStep {
  std::size_t step = 0;  ///< measurements processed so far
  GaussianBelief recursive;
  GaussianBelief batch;
};

struct DemoCase {
  std::string name;
  InputGrid basis;
  std::vector<double> queries;
  std::vector<DemoStep> steps;  ///< step 0 (prior) .. step M
  RgpState final_state;
  double max_mean_deviation = 0.0;  ///< at the last step, over the queries
  double max_std_deviation = 0.0;
};

/// Feeds the measurements one by one into a recursive GP on `basis` and
/// compares each step with batch regression on the same prefix.
inline DemoCase run_demo_case(std::string name, const InputGrid& basis, const DemoMeasurements& m,
                              const GpHyperParams& hp, std::vector<double> queries, bool keep_steps = true) {
  DemoCase c;
  c.name = std::move(name);
  c.basis = basis;
  c.queries = std::move(queries);
  RgpState state = rgp_init(basis, hp);

  auto record = [&](std::size_t step) {
    DemoStep s;
    s.step = step;
    s.recursive = rgp_predict_at(state, c.queries);
    s.batch = gp_regress(std::span(m.inputs).first(step), std::span(m.values).first(step), c.queries, hp,
                         basis.kind());
    return s;
  };

  if (keep_steps) c.steps.push_back(record(0));
  for (std::size_t k = 0; k < m.inputs.size(); ++k) {
    const double t = static_cast<double>(k + 1);
    state = rgp_time_update(state, t - state.time);
    state = rgp_measurement_update(state, {m.inputs[k], m.values[k], t});
    if (keep_steps || k + 1 == m.inputs.size()) c.steps.push_back(record(k + 1));
  }
  if (!keep_steps && m.inputs.empty()) c.steps.push_back(record(0));

  const DemoStep& last = c.steps.back();
  c.max_mean_deviation = (last.recursive.mean - last.batch.mean).cwiseAbs().maxCoeff();
  const Eigen::VectorXd sr = last.recursive.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  const Eigen::VectorXd sb = last.batch.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  c.max_std_deviation = (sr - sb).cwiseAbs().maxCoeff();
  c.final_state = std::move(state);
  return c;
}

}  // namespace gpett
