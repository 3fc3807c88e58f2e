#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <vector>

#include "gpett/angles.hpp"
#include "gpett/errors.hpp"
#include "gpett/geometry.hpp"
#include "gpett/gp_model.hpp"

namespace gpett {

/// Layout of the augmented state vector [x, y, vx, vy, psi, f_1..f_N].
namespace state_index {
inline constexpr Eigen::Index kX = 0;
inline constexpr Eigen::Index kY = 1;
inline constexpr Eigen::Index kVx = 2;
inline constexpr Eigen::Index kVy = 3;
inline constexpr Eigen::Index kPsi = 4;
inline constexpr Eigen::Index kExtent = 5;
}  // namespace state_index

struct ProcessNoiseConfig {
  double sigma_q = 1.0;        ///< white-acceleration std on each axis
  double sigma_q_psi = 1e-4;   ///< orientation random walk std [rad/sqrt(s)]

  void validate() const {
    if (!(sigma_q >= 0.0) || !(sigma_q_psi >= 0.0))
      throw InvalidArgument("ProcessNoiseConfig: noise std must be >= 0");
  }
};

/// Point measurements collected at one time instant.
struct Scan {
  double time = 0.0;
  std::vector<Point2> points;

  void validate() const {
    if (!std::isfinite(time)) throw InvalidArgument("Scan: non-finite time");
    if (points.empty()) throw InvalidArgument("Scan: no points");
    for (const auto& p : points)
      if (!p.allFinite()) throw InvalidArgument("Scan: non-finite point");
  }
};

/// Kinematics, orientation and extent values at the basis angles, jointly Gaussian.
struct TrackState {
  std::shared_ptr<const BasisProjector> extent_model;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double time = 0.0;

  Point2 center() const { return mean.segment<2>(state_index::kX); }
  Point2 velocity() const { return mean.segment<2>(state_index::kVx); }
  double psi() const { return mean(state_index::kPsi); }
  Eigen::Index extent_size() const { return mean.size() - state_index::kExtent; }
  auto extent() const { return mean.tail(extent_size()); }
  const InputGrid& basis() const { return extent_model->basis(); }
  const GpHyperParams& hyper_params() const { return extent_model->hyper_params(); }
};

struct InitialUncertainty {
  double position_var = 4.0;
  double velocity_var = 1.0;
  double psi_var = (std::numbers::pi / 4) * (std::numbers::pi / 4);
};

inline std::shared_ptr<const BasisProjector> make_extent_model(std::size_t basis_size, const GpHyperParams& hp) {
  if (basis_size < 3) throw InvalidArgument("extent basis needs at least 3 angles");
  return std::make_shared<const BasisProjector>(InputGrid::uniform_angles(basis_size), hp);
}

/// Centered on the first scan's centroid, at rest, psi = 0, extent at the prior.
inline TrackState make_initial_state(const Scan& first, std::shared_ptr<const BasisProjector> extent_model,
                                     const InitialUncertainty& init = {}) {
  using namespace state_index;
  first.validate();
  if (extent_model->basis().kind() != InputKind::AngleCircle || extent_model->basis().size() < 3)
    throw InvalidArgument("make_initial_state: extent basis must be >= 3 angles");
  const Eigen::Index n = extent_model->dim();
  TrackState s;
  s.time = first.time;
  s.mean = Eigen::VectorXd::Zero(kExtent + n);
  s.mean.segment<2>(kX) = vertex_mean(first.points);
  s.mean.tail(n).setConstant(extent_model->hyper_params().prior_mean);
  s.cov = Eigen::MatrixXd::Zero(kExtent + n, kExtent + n);
  s.cov(kX, kX) = s.cov(kY, kY) = init.position_var;
  s.cov(kVx, kVx) = s.cov(kVy, kVy) = init.velocity_var;
  s.cov(kPsi, kPsi) = init.psi_var;
  s.cov.bottomRightCorner(n, n) = extent_model->prior_cov();
  s.extent_model = std::move(extent_model);
  return s;
}

/// Linear-Gaussian transition x' = F x + offset + w, w ~ N(0, Q).
struct ProcessModel {
  Eigen::MatrixXd F;
  Eigen::MatrixXd Q;
  Eigen::VectorXd offset;  ///< extent reversion toward the prior mean
};

inline ProcessModel make_process_model(double dt, const ProcessNoiseConfig& pn, const BasisProjector& extent) {
  using namespace state_index;
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("make_process_model: dt must be > 0");
  pn.validate();
  const GpHyperParams& hp = extent.hyper_params();
  const Eigen::Index n = extent.dim();
  const Eigen::Index dim = kExtent + n;
  const double lambda = std::exp(-hp.alpha * dt);

  ProcessModel pm;
  pm.F = Eigen::MatrixXd::Identity(dim, dim);
  pm.F(kX, kVx) = dt;
  pm.F(kY, kVy) = dt;
  pm.F.bottomRightCorner(n, n) *= lambda;

  const double q = pn.sigma_q * pn.sigma_q;
  pm.Q = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index axis = 0; axis < 2; ++axis) {
    const Eigen::Index p = kX + axis;
    const Eigen::Index v = kVx + axis;
    pm.Q(p, p) = q * dt * dt * dt / 3.0;
    pm.Q(p, v) = pm.Q(v, p) = q * dt * dt / 2.0;
    pm.Q(v, v) = q * dt;
  }
  pm.Q(kPsi, kPsi) = pn.sigma_q_psi * pn.sigma_q_psi * dt;
  pm.Q.bottomRightCorner(n, n) = (1.0 - lambda * lambda) * extent.prior_cov();

  pm.offset = Eigen::VectorXd::Zero(dim);
  pm.offset.tail(n).setConstant((1.0 - lambda) * hp.prior_mean);
  return pm;
}

inline TrackState apply_process_model(const TrackState& state, const ProcessModel& pm, double dt) {
  TrackState out = state;
  out.time = state.time + dt;
  out.mean = pm.F * state.mean + pm.offset;
  out.mean(state_index::kPsi) = wrap_pi(out.mean(state_index::kPsi));
  out.cov = pm.F * state.cov * pm.F.transpose() + pm.Q;
  symmetrize(out.cov);
  return out;
}

inline TrackState ekf_predict(const TrackState& state, double dt, const ProcessNoiseConfig& pn) {
  return apply_process_model(state, make_process_model(dt, pn, *state.extent_model), dt);
}

/// Prediction, Jacobian and noise for a single 2-D point measurement.
struct MeasurementLinearization {
  Point2 h;
  Eigen::MatrixXd J;       ///< 2 x state dimension
  Eigen::Matrix2d noise;
};

/// Radial contour model: a measurement is the center plus the GP radius along
/// the ray through the measurement, with the local angle measured from psi.
struct GpContourMeasurement {
  MeasurementLinearization operator()(const TrackState& state, const Point2& z) const {
    using namespace state_index;
    const BasisProjector& extent = *state.extent_model;
    const GpHyperParams& hp = extent.hyper_params();
    const Eigen::Index n = extent.dim();

    const Point2 d = z - state.center();
    const double rho2 = d.squaredNorm();
    if (!(std::sqrt(rho2) > 1e-9)) throw DegenerateGeometry("measurement_model: point at object center");

    const double theta_g = std::atan2(d.y(), d.x());
    const double theta_l = wrap_two_pi(theta_g - state.psi());
    const ConditionalProjection proj = extent.project(theta_l);
    const Eigen::RowVectorXd h_f = proj.H.row(0);
    const Eigen::RowVectorXd dh_f = extent.project_derivative(theta_l);
    const Eigen::VectorXd f_centered = (state.extent().array() - hp.prior_mean).matrix();
    const double radius = hp.prior_mean + h_f.dot(f_centered);
    const double radius_slope = dh_f.dot(f_centered);

    const Point2 u(std::cos(theta_g), std::sin(theta_g));
    const Point2 u_perp(-u.y(), u.x());
    const Eigen::RowVector2d dtheta_dc(d.y() / rho2, -d.x() / rho2);

    MeasurementLinearization out;
    out.h = state.center() + radius * u;
    out.J = Eigen::MatrixXd::Zero(2, kExtent + n);
    out.J.block<2, 2>(0, kX) = Eigen::Matrix2d::Identity() + (radius * u_perp + radius_slope * u) * dtheta_dc;
    out.J.col(kPsi) = -radius_slope * u;
    out.J.rightCols(n) = u * h_f;
    out.noise = hp.sigma_r * hp.sigma_r * Eigen::Matrix2d::Identity() +
                std::max(0.0, proj.residual(0, 0)) * (u * u.transpose());
    return out;
  }
};

inline MeasurementLinearization measurement_model(const TrackState& state, const Point2& z) {
  return GpContourMeasurement{}(state, z);
}

/// One joint EKF update with every point of the scan. `Model` maps
/// (state, point) to a MeasurementLinearization.
template <class Model = GpContourMeasurement>
TrackState ekf_update_scan(const TrackState& state, const Scan& scan, const Model& model = {}) {
  scan.validate();
  if (scan.time < state.time) throw InvalidArgument("ekf_update_scan: scan older than state");
  const Eigen::Index dim = state.mean.size();
  const auto m = static_cast<Eigen::Index>(scan.points.size());

  Eigen::VectorXd innovation(2 * m);
  Eigen::MatrixXd jac(2 * m, dim);
  Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Point2& z = scan.points[static_cast<std::size_t>(i)];
    const MeasurementLinearization lin = model(state, z);
    innovation.segment<2>(2 * i) = z - lin.h;
    jac.middleRows(2 * i, 2) = lin.J;
    noise.block<2, 2>(2 * i, 2 * i) = lin.noise;
  }

  const Eigen::MatrixXd pjt = state.cov * jac.transpose();
  Eigen::MatrixXd s = jac * pjt + noise;
  symmetrize(s);
  const double scale = std::max(s.diagonal().mean(), 1e-300);
  const auto factor = factorize_with_jitter(s, scale, true, "ekf_update_scan");
  const Eigen::MatrixXd gain = factor.llt.solve(pjt.transpose()).transpose();

  TrackState out = state;
  out.time = scan.time;
  out.mean = state.mean + gain * innovation;
  out.mean(state_index::kPsi) = wrap_pi(out.mean(state_index::kPsi));
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim, dim) - gain * jac;
  out.cov = a * state.cov * a.transpose() + gain * noise * gain.transpose();
  symmetrize(out.cov);
  return out;
}

/// Estimated contour at `vertices` uniformly spaced local angles, radius floored at 0.
inline Polygon contour_estimate(const TrackState& state, std::size_t vertices) {
  if (vertices < 3) throw InvalidArgument("contour_estimate: need at least 3 vertices");
  const BasisProjector& extent = *state.extent_model;
  const GpHyperParams& hp = extent.hyper_params();
  std::vector<double> angles(vertices);
  for (std::size_t i = 0; i < vertices; ++i)
    angles[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(vertices);
  const Eigen::MatrixXd h = extent.projection(angles);
  const Eigen::VectorXd radii =
      (hp.prior_mean + (h * (state.extent().array() - hp.prior_mean).matrix()).array()).matrix();

  Polygon poly(vertices);
  const Point2 c = state.center();
  for (std::size_t i = 0; i < vertices; ++i) {
    const double a = state.psi() + angles[i];
    poly[i] = c + std::max(0.0, radii(static_cast<Eigen::Index>(i))) * Point2(std::cos(a), std::sin(a));
  }
  return poly;
}

}  // namespace gpett
