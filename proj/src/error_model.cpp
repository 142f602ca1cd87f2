#include "telc/error_model.hpp"

#include <cmath>

#include "telc/angles.hpp"
#include "telc/errors.hpp"

namespace telc {

ErrorState error_state(const Pose& reference, const Pose& actual) {
  const double c = std::cos(actual.theta);
  const double s = std::sin(actual.theta);
  const double dx = reference.x - actual.x;
  const double dy = reference.y - actual.y;
  return {c * dx + s * dy, -s * dx + c * dy, angle_diff(reference.theta, actual.theta)};
}

ErrorState nonlinear_error_rate(const ErrorState& e, double nu, double omega,
                                double nu_r, double omega_r) {
  return {omega * e.e2 - nu + nu_r * std::cos(e.e3),
          -omega * e.e1 + nu_r * std::sin(e.e3),
          omega_r - omega};
}

LinearErrorModel linearized_model(double nu_r, double omega_r) {
  LinearErrorModel m;
  m.A.setZero();
  m.A(0, 1) = omega_r;
  m.A(1, 0) = -omega_r;
  m.A(1, 2) = nu_r;
  m.B.setZero();
  m.B(0, 0) = -1.0;
  m.B(2, 1) = -1.0;
  return m;
}

bool is_controllable(const LinearErrorModel& model) {
  Eigen::Matrix<double, 3, 6> ctrb;
  ctrb.block<3, 2>(0, 0) = model.B;
  ctrb.block<3, 2>(0, 2) = model.A * model.B;
  ctrb.block<3, 2>(0, 4) = model.A * model.A * model.B;
  const Eigen::JacobiSVD<Eigen::Matrix<double, 3, 6>> svd(ctrb);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank == 3;
}

DiscreteErrorModel discretize(const LinearErrorModel& model, double t_step) {
  if (!(t_step > 0.0)) throw NonPositiveStep();
  return {Eigen::Matrix3d::Identity() + model.A * t_step, model.B * t_step};
}

}  // namespace telc
