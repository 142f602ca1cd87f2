#pragma once

namespace telc {

/// Planar robot configuration in the inertial frame. theta is kept in (-pi, pi].
struct Pose {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad
};

/// Linear + angular velocity pair. Used for total commands (u), feedback
/// actions (u_b) and feedforward actions (u_f) alike.
struct VelocityCommand {
  double nu = 0.0;     // m/s
  double omega = 0.0;  // rad/s
};

inline VelocityCommand operator+(const VelocityCommand& a, const VelocityCommand& b) {
  return {a.nu + b.nu, a.omega + b.omega};
}

}  // namespace telc
