#pragma once

#include <Eigen/Dense>

#include "telc/types.hpp"

namespace telc {

/// Robot-frame tracking errors: longitudinal, lateral, heading.
struct ErrorState {
  double e1 = 0.0;  // m
  double e2 = 0.0;  // m
  double e3 = 0.0;  // rad, kept in (-pi, pi]
};

/// Deviation of the applied controls from the reference controls,
/// u_e = u - u_r.
struct ErrorInput {
  double nu_e = 0.0;     // m/s
  double omega_e = 0.0;  // rad/s
};

/// Continuous-time error dynamics linearized around the target path,
///   de/dt = A e + B u_e.
/// A carries the reference controls; B is constant.
struct LinearErrorModel {
  Eigen::Matrix3d A;
  Eigen::Matrix<double, 3, 2> B;
};

/// Forward-Euler discretization of a LinearErrorModel.
struct DiscreteErrorModel {
  Eigen::Matrix3d A;
  Eigen::Matrix<double, 3, 2> B;
};

/// Rotates the inertial-frame pose difference (reference - actual) into the
/// robot frame. The heading component is wrapped to (-pi, pi].
ErrorState error_state(const Pose& reference, const Pose& actual);

/// Nonlinear tracking-error rates (de1/dt, de2/dt, de3/dt) for applied
/// controls (nu, omega) and reference controls (nu_r, omega_r).
ErrorState nonlinear_error_rate(const ErrorState& e, double nu, double omega,
                                double nu_r, double omega_r);

/// Time-varying state-space matrices at the given reference controls.
LinearErrorModel linearized_model(double nu_r, double omega_r);

/// True iff rank [B, AB, A^2 B] = 3 (SVD rank, relative tolerance 1e-10).
bool is_controllable(const LinearErrorModel& model);

/// Forward-Euler discretization: A_d = I + A dt, B_d = B dt.
/// Throws NonPositiveStep.
DiscreteErrorModel discretize(const LinearErrorModel& model, double t_step);

}  // namespace telc
