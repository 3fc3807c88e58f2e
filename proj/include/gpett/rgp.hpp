#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <span>

#include "gpett/errors.hpp"
#include "gpett/gp_model.hpp"

namespace gpett {

struct ScalarMeasurement {
  double input = 0.0;
  double value = 0.0;
  double time = 0.0;
};

/// Recursive GP regression state: a Gaussian belief over the latent function
/// values at a fixed set of basis points.
struct RgpState {
  std::shared_ptr<const BasisProjector> projector;  // immutable, shared between copies
  GaussianBelief belief;
  double time = 0.0;

  const InputGrid& basis() const { return projector->basis(); }
  const GpHyperParams& hyper_params() const { return projector->hyper_params(); }
};

inline RgpState rgp_init(const InputGrid& basis, const GpHyperParams& hp, double time = 0.0) {
  RgpState s;
  s.projector = std::make_shared<const BasisProjector>(basis, hp);
  s.belief.mean = Eigen::VectorXd::Constant(s.projector->dim(), hp.prior_mean);
  s.belief.cov = s.projector->prior_cov();
  s.time = time;
  return s;
}

/// Mean-reverting forgetting: the GP prior is the stationary distribution.
inline RgpState rgp_time_update(const RgpState& state, double dt) {
  if (!(dt >= 0.0)) throw InvalidArgument("rgp_time_update: dt must be >= 0");
  const GpHyperParams& hp = state.hyper_params();
  const double lambda = std::exp(-hp.alpha * dt);
  RgpState out = state;
  out.time = state.time + dt;
  if (lambda == 1.0) return out;
  const Eigen::ArrayXd mu = Eigen::ArrayXd::Constant(state.belief.mean.size(), hp.prior_mean);
  out.belief.mean = (mu + lambda * (state.belief.mean.array() - mu)).matrix();
  out.belief.cov = lambda * lambda * state.belief.cov + (1.0 - lambda * lambda) * state.projector->prior_cov();
  symmetrize(out.belief.cov);
  return out;
}

/// Scalar Kalman update of the basis values with one measurement, using the
/// conditional projection as observation row and its residual as extra noise.
inline RgpState rgp_measurement_update(const RgpState& state, const ScalarMeasurement& m) {
  if (!std::isfinite(m.input) || !std::isfinite(m.value) || !std::isfinite(m.time))
    throw InvalidArgument("rgp_measurement_update: non-finite measurement");
  if (m.time < state.time) throw InvalidArgument("rgp_measurement_update: measurement older than state");
  const GpHyperParams& hp = state.hyper_params();
  const ConditionalProjection proj = state.projector->project(m.input);
  const Eigen::RowVectorXd h = proj.H.row(0);
  const double noise = hp.sigma_r * hp.sigma_r + proj.residual(0, 0);

  const Eigen::MatrixXd& p = state.belief.cov;
  const Eigen::VectorXd ph = p * h.transpose();
  const double innovation_var = h.dot(ph) + noise;
  if (!(innovation_var > 0.0) || !std::isfinite(innovation_var))
    throw NumericalFailure("rgp_measurement_update: non-positive innovation variance");

  const Eigen::VectorXd gain = ph / innovation_var;
  const double predicted = hp.prior_mean + h.dot((state.belief.mean.array() - hp.prior_mean).matrix());

  RgpState out = state;
  out.time = m.time;
  out.belief.mean = state.belief.mean + gain * (m.value - predicted);
  // Joseph form
  const Eigen::Index n = p.rows();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - gain * h;
  out.belief.cov = a * p * a.transpose() + noise * gain * gain.transpose();
  symmetrize(out.belief.cov);
  return out;
}

inline GaussianBelief rgp_predict_at(const RgpState& state, std::span<const double> query) {
  const GpHyperParams& hp = state.hyper_params();
  const ConditionalProjection proj = state.projector->project(query);
  GaussianBelief out;
  out.mean = (hp.prior_mean + (proj.H * (state.belief.mean.array() - hp.prior_mean).matrix()).array()).matrix();
  out.cov = proj.H * state.belief.cov * proj.H.transpose() + proj.residual;
  symmetrize(out.cov);
  return out;
}

}  // namespace gpett
