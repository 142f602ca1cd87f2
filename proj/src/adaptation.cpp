#include "telc/adaptation.hpp"

#include "telc/errors.hpp"

namespace telc {

void TelcConfig::validate() const {
  if (!(alpha_nu_1 > 0.0 && alpha_nu_0 > 0.0 && alpha_omega_1 > 0.0 && alpha_omega_0 > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(lambda_nu > 0.0 && lambda_omega > 0.0)) {
    throw ConfigError("lambda constants must be positive");
  }
  if (!(t_step > 0.0)) throw ConfigError("adaptation t_step must be positive");
}

VelocityCommand feedforward(const GainSet& gains, double nu_r, double omega_r) {
  return {nu_r * gains.k_nu_1 + gains.k_nu_0, omega_r * gains.k_omega_1 + gains.k_omega_0};
}

ErrorDerivatives error_derivatives(const ErrorState& e, double nu, double omega,
                                   double nu_r, double omega_r) {
  return {omega_r * e.e2 - nu + nu_r,
          -omega_r * e.e1 + nu_r * e.e3,
          -omega_r * omega_r * e.e2 + omega_r * nu - nu_r * omega};
}

double surface_nu(const ErrorState& e, const ErrorDerivatives& d, const TelcConfig& cfg) {
  return d.e1_dot + cfg.lambda_nu * e.e1;
}

double surface_omega(const ErrorState& e, const ErrorDerivatives& d, const TelcConfig& cfg) {
  return d.e2_ddot + 2.0 * cfg.lambda_omega * d.e2_dot +
         cfg.lambda_omega * cfg.lambda_omega * e.e2;
}

GainSet telc_update(const GainSet& gains, const ErrorState& e, const ErrorDerivatives& d,
                    double nu_r, double omega_r, const TelcConfig& cfg) {
  const double s_nu = surface_nu(e, d, cfg);
  const double s_omega = surface_omega(e, d, cfg);
  GainSet out = gains;
  out.k_nu_1 += cfg.t_step * cfg.alpha_nu_1 * nu_r * s_nu;
  out.k_nu_0 += cfg.t_step * cfg.alpha_nu_0 * s_nu;
  out.k_omega_1 += cfg.t_step * cfg.alpha_omega_1 * nu_r * omega_r * s_omega;
  out.k_omega_0 += cfg.t_step * cfg.alpha_omega_0 * nu_r * s_omega;
  return out;
}

TelcCosts cost_values(const ErrorState& e, const ErrorDerivatives& d, const TelcConfig& cfg) {
  const double s_nu = surface_nu(e, d, cfg);
  const double s_omega = surface_omega(e, d, cfg);
  TelcCosts costs;
  costs.e_nu = 0.5 * s_nu * s_nu;
  costs.e_omega = 0.5 * s_omega * s_omega;
  costs.lyapunov = costs.e_nu + costs.e_omega;
  return costs;
}

CurvatureValues curvature_check(double nu_r, double omega_r, const TelcConfig& cfg) {
  const double nu_sq = nu_r * nu_r;
  return {cfg.alpha_nu_1 * nu_sq,
          cfg.alpha_nu_0,
          cfg.alpha_omega_1 * nu_sq * omega_r * omega_r,
          cfg.alpha_omega_0 * nu_sq};
}

}  // namespace telc
