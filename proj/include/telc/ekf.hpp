#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>

#include "telc/types.hpp"

namespace telc {

struct EkfConfig {
  Eigen::Matrix3d process_noise = Eigen::Matrix3d::Identity() * 0.1;   // W
  Eigen::Matrix2d measurement_noise =
      Eigen::Matrix2d::Identity() * (0.03 * 0.03);                     // V (position)
  double t_step = 0.2;  // s
  bool heading_measurement = false;   // ablation: fuse a heading pseudo-measurement
  double heading_variance = 0.01745;  // rad^2, used when heading_measurement is on

  /// Throws ConfigError if W or V fail symmetry/PSD checks.
  void validate() const;
};

struct EkfState {
  Pose mean;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity() * 0.1;
};

/// GNSS position fix, optionally carrying a heading pseudo-measurement.
/// valid = false marks a dropout; updates pass the prior through unchanged.
struct Measurement {
  double x = 0.0;  // m
  double y = 0.0;  // m
  bool valid = true;
  std::optional<double> heading;  // rad
};

/// Propagates mean through the discrete unicycle model
///   x+ = x + dt nu cos(theta), y+ = y + dt nu sin(theta), theta+ = theta + dt omega
/// and covariance through F P F' + W with the analytic Jacobian F.
EkfState ekf_predict(const EkfState& state, double nu, double omega, const EkfConfig& cfg);

/// Position update with h(q) = (x, y), H = [I2 | 0], Joseph-form covariance.
/// Fuses the heading pseudo-measurement when configured and present.
/// Returns the prior unchanged when z.valid is false.
/// Throws NonPsdCovariance if the posterior loses positive semidefiniteness
/// (unreachable with the Joseph form; kept as a defect signal).
EkfState ekf_update(const EkfState& state, const Measurement& z, const EkfConfig& cfg);

/// Normalized estimation error squared of the position block against truth
/// (chi^2 with 2 degrees of freedom when the filter is consistent).
double position_nees(const EkfState& state, const Pose& truth);

struct HeadingObservabilityReport {
  double rms_heading_error = 0.0;  // rad, over samples after settle_time
  bool flagged = false;            // rms above threshold on a moving trajectory
  bool stationary_unobservable = false;
};

/// Regression guard over a closed-loop trace: heading is only observable
/// through motion. Flags RMS heading error > threshold after the settle time,
/// and raises stationary_unobservable when the robot never moves yet the
/// heading error fails to decrease.
HeadingObservabilityReport heading_observability_probe(std::span<const double> t,
                                                       std::span<const double> est_theta,
                                                       std::span<const double> true_theta,
                                                       std::span<const double> speed,
                                                       double settle_time = 20.0,
                                                       double rms_threshold = 0.05);

}  // namespace telc
