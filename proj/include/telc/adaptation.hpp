#pragma once

#include "telc/error_model.hpp"
#include "telc/types.hpp"

namespace telc {

/// The four learned feedforward coefficients. Nominal values (1, 0, 1, 0)
/// reproduce the traditional feedforward u_f = u_r.
struct GainSet {
  double k_nu_1 = 1.0;     // scales nu_r
  double k_nu_0 = 0.0;     // m/s bias
  double k_omega_1 = 1.0;  // scales omega_r
  double k_omega_0 = 0.0;  // rad/s bias
};

struct TelcConfig {
  double alpha_nu_1 = 0.15;
  double alpha_nu_0 = 0.05;
  double alpha_omega_1 = 0.1;
  double alpha_omega_0 = 0.05;
  double lambda_nu = 3.0;    // 1/s
  double lambda_omega = 3.0; // 1/s
  double t_step = 0.2;       // s

  /// Throws ConfigError on invariant violations.
  void validate() const;
};

/// First/second error derivatives evaluated through the linearized model.
struct ErrorDerivatives {
  double e1_dot = 0.0;   // m/s
  double e2_dot = 0.0;   // m/s
  double e2_ddot = 0.0;  // m/s^2
};

struct TelcCosts {
  double e_nu = 0.0;      // 1/2 s_nu^2
  double e_omega = 0.0;   // 1/2 s_omega^2
  double lyapunov = 0.0;  // V = E_nu + E_omega
};

/// Second derivatives of the learning costs w.r.t. each coefficient
/// (the curvature values of the no-local-minima argument).
struct CurvatureValues {
  double k_nu_1 = 0.0;     // alpha_nu_1 * nu_r^2
  double k_nu_0 = 0.0;     // alpha_nu_0
  double k_omega_1 = 0.0;  // alpha_omega_1 * nu_r^2 * omega_r^2
  double k_omega_0 = 0.0;  // alpha_omega_0 * nu_r^2
};

/// u_f = (nu_r k_nu_1 + k_nu_0,  omega_r k_omega_1 + k_omega_0).
VelocityCommand feedforward(const GainSet& gains, double nu_r, double omega_r);

/// Model-based derivatives:
///   e1_dot  = omega_r e2 - nu + nu_r
///   e2_dot  = -omega_r e1 + nu_r e3
///   e2_ddot = -omega_r^2 e2 + omega_r nu - nu_r omega
ErrorDerivatives error_derivatives(const ErrorState& e, double nu, double omega,
                                   double nu_r, double omega_r);

/// Composite error surfaces whose squares form the learning costs.
double surface_nu(const ErrorState& e, const ErrorDerivatives& d, const TelcConfig& cfg);
double surface_omega(const ErrorState& e, const ErrorDerivatives& d, const TelcConfig& cfg);

/// Forward-Euler step of the four gradient-descent update laws:
///   k_nu_1    += dt alpha_nu_1 nu_r s_nu
///   k_nu_0    += dt alpha_nu_0 s_nu
///   k_omega_1 += dt alpha_omega_1 nu_r omega_r s_omega
///   k_omega_0 += dt alpha_omega_0 nu_r s_omega
GainSet telc_update(const GainSet& gains, const ErrorState& e, const ErrorDerivatives& d,
                    double nu_r, double omega_r, const TelcConfig& cfg);

/// E_nu, E_omega and the Lyapunov function V = E_nu + E_omega.
TelcCosts cost_values(const ErrorState& e, const ErrorDerivatives& d, const TelcConfig& cfg);

/// Cost curvatures; all are nonnegative by construction, which is the
/// no-local-minima guarantee the adaptation relies on.
CurvatureValues curvature_check(double nu_r, double omega_r, const TelcConfig& cfg);

}  // namespace telc
