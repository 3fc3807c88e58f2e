#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gpett/angles.hpp"
#include "gpett/errors.hpp"

namespace gpett {

/// Hyperparameters shared by the kernel, the measurement model and the
/// extent dynamics.
struct GpHyperParams {
  double sigma_f = 2.0;                        ///< kernel amplitude
  double length_scale = std::numbers::pi / 10;  ///< rad for angles, input units on the line
  double sigma_r = 0.8;                        ///< measurement noise std
  double alpha = 0.004;                        ///< forgetting factor [1/s]
  double prior_mean = 1.0;                     ///< constant prior mean

  void validate() const {
    if (!(std::isfinite(sigma_f) && sigma_f > 0.0))
      throw InvalidArgument("GpHyperParams: sigma_f must be > 0");
    if (!(std::isfinite(length_scale) && length_scale > 0.0))
      throw InvalidArgument("GpHyperParams: length_scale must be > 0");
    if (!(std::isfinite(sigma_r) && sigma_r >= 0.0))
      throw InvalidArgument("GpHyperParams: sigma_r must be >= 0");
    if (!(std::isfinite(alpha) && alpha >= 0.0))
      throw InvalidArgument("GpHyperParams: alpha must be >= 0");
    if (!std::isfinite(prior_mean)) throw InvalidArgument("GpHyperParams: prior_mean must be finite");
  }

  double signal_variance() const { return sigma_f * sigma_f; }
};

enum class InputKind { ScalarLine, AngleCircle };

/// Ordered input locations at which latent function values are kept.
class InputGrid {
 public:
  InputGrid() = default;

  InputGrid(InputKind kind, std::vector<double> points) : kind_(kind), points_(std::move(points)) {
    if (points_.empty()) throw InvalidArgument("InputGrid: no points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double p = points_[i];
      if (!std::isfinite(p)) throw InvalidArgument("InputGrid: non-finite point");
      if (kind_ == InputKind::AngleCircle && (p < 0.0 || p >= kTwoPi))
        throw InvalidArgument("InputGrid: angle outside [0, 2pi)");
      if (i > 0 && !(p > points_[i - 1])) throw InvalidArgument("InputGrid: points not strictly increasing");
    }
  }

  /// n angles k*2pi/n, k = 0..n-1.
  static InputGrid uniform_angles(std::size_t n) {
    std::vector<double> pts(n);
    for (std::size_t k = 0; k < n; ++k) pts[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    return {InputKind::AngleCircle, std::move(pts)};
  }

  /// n equally spaced points covering [lo, hi] including both ends.
  static InputGrid uniform_line(double lo, double hi, std::size_t n) {
    if (n == 0) throw InvalidArgument("InputGrid: no points");
    std::vector<double> pts(n);
    if (n == 1) {
      pts[0] = 0.5 * (lo + hi);
    } else {
      for (std::size_t k = 0; k < n; ++k)
        pts[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return {InputKind::ScalarLine, std::move(pts)};
  }

  InputKind kind() const { return kind_; }
  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  InputKind kind_ = InputKind::ScalarLine;
  std::vector<double> points_;
};

struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Signed input difference; on the circle it is the wrapped angle difference.
inline double input_difference(double a, double b, InputKind kind) {
  return kind == InputKind::AngleCircle ? wrap_pi(a - b) : a - b;
}

/// Squared exponential on the line, periodic squared exponential on the circle.
inline double kernel_eval(double a, double b, const GpHyperParams& hp, InputKind kind) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("kernel_eval: non-finite input");
  const double l2 = hp.length_scale * hp.length_scale;
  if (kind == InputKind::ScalarLine) {
    const double d = a - b;
    return hp.signal_variance() * std::exp(-d * d / (2.0 * l2));
  }
  const double s = std::sin(0.5 * (a - b));
  return hp.signal_variance() * std::exp(-2.0 * s * s / l2);
}

/// Partial derivative of kernel_eval with respect to its first argument.
inline double kernel_derivative(double a, double b, const GpHyperParams& hp, InputKind kind) {
  const double k = kernel_eval(a, b, hp, kind);
  const double l2 = hp.length_scale * hp.length_scale;
  if (kind == InputKind::ScalarLine) return -k * (a - b) / l2;
  return -k * std::sin(a - b) / l2;
}

inline Eigen::MatrixXd kernel_matrix(std::span<const double> lhs, std::span<const double> rhs,
                                     const GpHyperParams& hp, InputKind kind) {
  if (lhs.empty() || rhs.empty()) throw InvalidArgument("kernel_matrix: empty input list");
  Eigen::MatrixXd k(static_cast<Eigen::Index>(lhs.size()), static_cast<Eigen::Index>(rhs.size()));
  for (std::size_t i = 0; i < lhs.size(); ++i)
    for (std::size_t j = 0; j < rhs.size(); ++j)
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_eval(lhs[i], rhs[j], hp, kind);
  return k;
}

inline void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

/// Cholesky factor of a symmetric matrix plus the diagonal jitter that made it succeed.
struct JitteredCholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

namespace detail {

inline bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  return d.allFinite() && (d.array() > 0.0).all();
}

}  // namespace detail

/// Factorizes `m` adding jitter = start, start*10, ... up to 1e-3*scale on the
/// diagonal. `try_plain` first attempts the matrix as given.
inline JitteredCholesky factorize_with_jitter(const Eigen::MatrixXd& m, double scale, bool try_plain,
                                              const char* what) {
  JitteredCholesky out;
  if (try_plain) {
    out.llt.compute(m);
    if (detail::factor_ok(out.llt)) return out;
  }
  const Eigen::Index n = m.rows();
  for (double jitter = 1e-9 * scale; jitter <= 1e-3 * scale * (1.0 + 1e-12); jitter *= 10.0) {
    out.llt.compute(m + jitter * Eigen::MatrixXd::Identity(n, n));
    if (detail::factor_ok(out.llt)) {
      out.jitter = jitter;
      return out;
    }
  }
  throw NumericalFailure(std::string(what) + ": matrix not positive definite after jitter escalation");
}

/// Batch GP posterior at `query` given noisy training pairs.
inline GaussianBelief gp_regress(std::span<const double> train_inputs, std::span<const double> train_outputs,
                                 std::span<const double> query, const GpHyperParams& hp, InputKind kind) {
  hp.validate();
  if (train_inputs.size() != train_outputs.size())
    throw InvalidArgument("gp_regress: training inputs and outputs differ in length");
  const auto nq = static_cast<Eigen::Index>(query.size());
  GaussianBelief post;
  post.cov = kernel_matrix(query, query, hp, kind);
  post.mean = Eigen::VectorXd::Constant(nq, hp.prior_mean);
  if (train_inputs.empty()) return post;

  const auto nt = static_cast<Eigen::Index>(train_inputs.size());
  Eigen::MatrixXd ktt = kernel_matrix(train_inputs, train_inputs, hp, kind);
  ktt.diagonal().array() += hp.sigma_r * hp.sigma_r;
  const auto factor = factorize_with_jitter(ktt, hp.signal_variance(), true, "gp_regress");

  const Eigen::MatrixXd kqt = kernel_matrix(query, train_inputs, hp, kind);
  Eigen::VectorXd resid(nt);
  for (Eigen::Index i = 0; i < nt; ++i) resid(i) = train_outputs[static_cast<std::size_t>(i)] - hp.prior_mean;

  post.mean += kqt * factor.llt.solve(resid);
  post.cov -= kqt * factor.llt.solve(kqt.transpose());
  symmetrize(post.cov);
  return post;
}

/// Projection of basis values onto arbitrary inputs: f(query) ~ H f(basis) + e,
/// e ~ N(0, residual).
struct ConditionalProjection {
  Eigen::MatrixXd H;
  Eigen::MatrixXd residual;
};

/// Holds the factorized basis prior so repeated projections onto new inputs
/// do not refactor K_bb.
class BasisProjector {
 public:
  BasisProjector(InputGrid basis, GpHyperParams hp) : basis_(std::move(basis)), hp_(hp) {
    hp_.validate();
    if (basis_.size() == 0) throw InvalidArgument("BasisProjector: empty basis");
    kbb_ = kernel_matrix(basis_.points(), basis_.points(), hp_, basis_.kind());
    factor_ = factorize_with_jitter(kbb_, hp_.signal_variance(), false, "conditional_projection");
  }

  const InputGrid& basis() const { return basis_; }
  const GpHyperParams& hyper_params() const { return hp_; }
  const Eigen::MatrixXd& prior_cov() const { return kbb_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }

  /// Index of the basis point equal to `q` (modulo 2pi on the circle), if any.
  std::optional<std::size_t> coincident_index(double q) const {
    const auto& pts = basis_.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = input_difference(q, pts[i], basis_.kind());
      if (std::abs(d) <= 1e-12 * std::max(1.0, std::abs(pts[i]))) return i;
    }
    return std::nullopt;
  }

  /// Projection rows only, without the residual covariance.
  Eigen::MatrixXd projection(std::span<const double> query, std::vector<bool>* on_basis = nullptr) const {
    if (query.empty()) throw InvalidArgument("conditional_projection: empty query");
    const Eigen::MatrixXd kbq = kernel_matrix(basis_.points(), query, hp_, basis_.kind());
    Eigen::MatrixXd h = factor_.llt.solve(kbq).transpose();
    if (on_basis) on_basis->assign(query.size(), false);
    // Queries on a basis point select it exactly; jitter would otherwise
    // leave a small leak into the neighbouring columns.
    for (std::size_t r = 0; r < query.size(); ++r) {
      if (auto idx = coincident_index(query[r])) {
        h.row(static_cast<Eigen::Index>(r)).setZero();
        h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*idx)) = 1.0;
        if (on_basis) (*on_basis)[r] = true;
      }
    }
    return h;
  }

  ConditionalProjection project(std::span<const double> query) const {
    const InputKind kind = basis_.kind();
    std::vector<bool> on_basis;
    ConditionalProjection out;
    out.H = projection(query, &on_basis);
    const Eigen::MatrixXd kbq = kernel_matrix(basis_.points(), query, hp_, kind);
    out.residual = kernel_matrix(query, query, hp_, kind) - out.H * kbq;
    symmetrize(out.residual);
    for (std::size_t r = 0; r < query.size(); ++r) {
      if (!on_basis[r]) continue;
      out.residual.row(static_cast<Eigen::Index>(r)).setZero();
      out.residual.col(static_cast<Eigen::Index>(r)).setZero();
    }
    return out;
  }

  ConditionalProjection project(double q) const { return project(std::span<const double>(&q, 1)); }

  /// d/dq of the projection row for a single input q.
  Eigen::RowVectorXd project_derivative(double q) const {
    const auto& pts = basis_.points();
    Eigen::VectorXd dk(dim());
    for (Eigen::Index i = 0; i < dim(); ++i)
      dk(i) = kernel_derivative(q, pts[static_cast<std::size_t>(i)], hp_, basis_.kind());
    return factor_.llt.solve(dk).transpose();
  }

 private:
  InputGrid basis_;
  GpHyperParams hp_;
  Eigen::MatrixXd kbb_;
  JitteredCholesky factor_;
};

inline ConditionalProjection conditional_projection(std::span<const double> query, const InputGrid& basis,
                                                    const GpHyperParams& hp) {
  return BasisProjector(basis, hp).project(query);
}

}  // namespace gpett
