#pragma once

// Independent reference implementations used as test oracles. They do not call
// into the library's numerical code: kernels, gains and smoother recursions are
// written out directly with dense inverses.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "gpett/tracker.hpp"

namespace oracle {

struct Belief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Squared-exponential kernel on the real line.
inline double se_line(double a, double b, double sf, double l) {
  const double d = a - b;
  return sf * sf * std::exp(-0.5 * d * d / (l * l));
}

/// Batch GP posterior with a constant prior mean, via a full-pivot LU inverse.
inline Belief batch_gp(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& q,
                       double sf, double l, double sr, double mu) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto m = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXd kxx(n, n), kqx(m, n), kqq(m, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) kxx(i, j) = se_line(x[i], x[j], sf, l) + (i == j ? sr * sr : 0.0);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) kqx(i, j) = se_line(q[i], x[j], sf, l);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) kqq(i, j) = se_line(q[i], q[j], sf, l);
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) r(i) = y[i] - mu;
  const Eigen::MatrixXd inv = kxx.fullPivLu().inverse();
  return {Eigen::VectorXd::Constant(m, mu) + kqx * inv * r, kqq - kqx * inv * kqx.transpose()};
}

/// Linear-Gaussian system x' = F x + w, z = H x + v.
struct LinearSystem {
  Eigen::MatrixXd F, Q, H, R;
};

struct KfStep {
  Belief predicted;
  Belief filtered;
};

/// Textbook Kalman filter (explicit inverse, simple covariance form).
inline std::vector<KfStep> kalman(const LinearSystem& s, Belief x0, const std::vector<Eigen::VectorXd>& z,
                                  bool predict_first_step = false) {
  std::vector<KfStep> out;
  Belief x = std::move(x0);
  for (std::size_t k = 0; k < z.size(); ++k) {
    KfStep st;
    if (k > 0 || predict_first_step) {
      x.mean = s.F * x.mean;
      x.cov = s.F * x.cov * s.F.transpose() + s.Q;
    }
    st.predicted = x;
    const Eigen::MatrixXd S = s.H * x.cov * s.H.transpose() + s.R;
    const Eigen::MatrixXd K = x.cov * s.H.transpose() * S.inverse();
    x.mean = x.mean + K * (z[k] - s.H * x.mean);
    x.cov = (Eigen::MatrixXd::Identity(x.cov.rows(), x.cov.cols()) - K * s.H) * x.cov;
    st.filtered = x;
    out.push_back(st);
  }
  return out;
}

/// Fixed-interval RTS smoother over a complete filter pass.
inline std::vector<Belief> rts(const LinearSystem& s, const std::vector<KfStep>& kf) {
  std::vector<Belief> sm(kf.size());
  sm.back() = kf.back().filtered;
  for (std::size_t k = kf.size() - 1; k-- > 0;) {
    const Belief& f = kf[k].filtered;
    const Belief& p = kf[k + 1].predicted;
    const Eigen::MatrixXd G = f.cov * s.F.transpose() * p.cov.inverse();
    sm[k].mean = f.mean + G * (sm[k + 1].mean - p.mean);
    sm[k].cov = f.cov + G * (sm[k + 1].cov - p.cov) * G.transpose();
  }
  return sm;
}

/// Continuous white-acceleration model per axis on [x, y, vx, vy].
inline Eigen::Matrix4d cv_process_noise(double dt, double sigma_q) {
  const double q = sigma_q * sigma_q;
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
  for (int a = 0; a < 2; ++a) {
    Q(a, a) = q * dt * dt * dt / 3.0;
    Q(a, a + 2) = Q(a + 2, a) = q * dt * dt / 2.0;
    Q(a + 2, a + 2) = q * dt;
  }
  return Q;
}

}  // namespace oracle

namespace testing_support {

/// Position-only measurement z = center + v, linear in the state.
struct PositionOnly {
  double sigma = 0.5;
  gpett::MeasurementLinearization operator()(const gpett::TrackState& s, const gpett::Point2&) const {
    gpett::MeasurementLinearization lin;
    lin.h = s.center();
    lin.J = Eigen::MatrixXd::Zero(2, s.mean.size());
    lin.J(0, gpett::state_index::kX) = 1.0;
    lin.J(1, gpett::state_index::kY) = 1.0;
    lin.noise = sigma * sigma * Eigen::Matrix2d::Identity();
    return lin;
  }
};

}  // namespace testing_support
