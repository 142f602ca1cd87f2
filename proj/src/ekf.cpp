#include "telc/ekf.hpp"

#include <cmath>

#include "telc/angles.hpp"
#include "telc/errors.hpp"

namespace telc {

namespace {

void check_psd(const Eigen::MatrixXd& m, const char* name) {
  if (!m.isApprox(m.transpose(), 1e-12)) {
    throw ConfigError(std::string(name) + " must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw ConfigError(std::string(name) + " must be positive semidefinite");
  }
}

Eigen::Matrix3d symmetrize(const Eigen::Matrix3d& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

void EkfConfig::validate() const {
  check_psd(process_noise, "process covariance W");
  check_psd(measurement_noise, "measurement covariance V");
  if (!(t_step > 0.0)) throw ConfigError("ekf t_step must be positive");
  if (heading_variance < 0.0) throw ConfigError("heading variance must be nonnegative");
}

EkfState ekf_predict(const EkfState& state, double nu, double omega, const EkfConfig& cfg) {
  const double dt = cfg.t_step;
  const double c = std::cos(state.mean.theta);
  const double s = std::sin(state.mean.theta);

  EkfState out;
  out.mean.x = state.mean.x + dt * nu * c;
  out.mean.y = state.mean.y + dt * nu * s;
  out.mean.theta = wrap_angle(state.mean.theta + dt * omega);

  Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
  F(0, 2) = -dt * nu * s;
  F(1, 2) = dt * nu * c;
  out.covariance = symmetrize(F * state.covariance * F.transpose() + cfg.process_noise);
  return out;
}

EkfState ekf_update(const EkfState& state, const Measurement& z, const EkfConfig& cfg) {
  if (!z.valid) return state;

  const bool with_heading = cfg.heading_measurement && z.heading.has_value();
  const int m = with_heading ? 3 : 2;

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, 3);
  H(0, 0) = 1.0;
  H(1, 1) = 1.0;
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(m, m);
  V.topLeftCorner<2, 2>() = cfg.measurement_noise;
  Eigen::VectorXd innovation(m);
  innovation(0) = z.x - state.mean.x;
  innovation(1) = z.y - state.mean.y;
  if (with_heading) {
    H(2, 2) = 1.0;
    V(2, 2) = cfg.heading_variance;
    innovation(2) = angle_diff(*z.heading, state.mean.theta);
  }

  const Eigen::MatrixXd S = H * state.covariance * H.transpose() + V;
  const Eigen::MatrixXd K = state.covariance * H.transpose() * S.inverse();
  const Eigen::Vector3d correction = K * innovation;

  EkfState out;
  out.mean.x = state.mean.x + correction(0);
  out.mean.y = state.mean.y + correction(1);
  out.mean.theta = wrap_angle(state.mean.theta + correction(2));

  const Eigen::Matrix3d IKH = Eigen::Matrix3d::Identity() - K * H;
  out.covariance = symmetrize(IKH * state.covariance * IKH.transpose() + K * V * K.transpose());

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(out.covariance);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw NonPsdCovariance("posterior covariance lost positive semidefiniteness");
  }
  return out;
}

double position_nees(const EkfState& state, const Pose& truth) {
  const Eigen::Vector2d err(state.mean.x - truth.x, state.mean.y - truth.y);
  const Eigen::Matrix2d p_pos = state.covariance.topLeftCorner<2, 2>();
  return err.dot(p_pos.inverse() * err);
}

HeadingObservabilityReport heading_observability_probe(std::span<const double> t,
                                                       std::span<const double> est_theta,
                                                       std::span<const double> true_theta,
                                                       std::span<const double> speed,
                                                       double settle_time,
                                                       double rms_threshold) {
  if (t.size() != est_theta.size() || t.size() != true_theta.size() || t.size() != speed.size()) {
    throw DimensionMismatch("probe input spans differ in length");
  }
  HeadingObservabilityReport report;
  if (t.empty()) return report;

  double sum_sq = 0.0;
  std::size_t count = 0;
  double max_speed = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    max_speed = std::max(max_speed, std::abs(speed[i]));
    if (t[i] < t[0] + settle_time) continue;
    const double err = angle_diff(est_theta[i], true_theta[i]);
    sum_sq += err * err;
    ++count;
  }
  if (count > 0) report.rms_heading_error = std::sqrt(sum_sq / static_cast<double>(count));

  const bool stationary = max_speed < 1e-9;
  if (stationary) {
    const double first = std::abs(angle_diff(est_theta.front(), true_theta.front()));
    const double last = std::abs(angle_diff(est_theta.back(), true_theta.back()));
    report.stationary_unobservable = last >= first - 1e-12;
  } else {
    report.flagged = report.rms_heading_error > rms_threshold;
  }
  return report;
}

}  // namespace telc
