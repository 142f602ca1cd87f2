#include "telc/plant.hpp"

#include <cmath>

#include "telc/angles.hpp"
#include "telc/errors.hpp"

namespace telc {

void DisturbanceConfig::validate() const {
  if (!(gain_nu > 0.0 && gain_omega > 0.0)) throw ConfigError("actuator gains must be positive");
  if (lag_tau < 0.0) throw ConfigError("lag_tau must be nonnegative");
  if (noise_gnss_sigma < 0.0 || noise_nu_sigma < 0.0 || noise_omega_sigma < 0.0) {
    throw ConfigError("noise sigmas must be nonnegative");
  }
  for (const auto& z : slip_zones) {
    if (!(z.gain_nu > 0.0 && z.gain_omega > 0.0)) {
      throw ConfigError("slip zone gains must be positive");
    }
    if (z.x_min > z.x_max || z.y_min > z.y_max) throw ConfigError("slip zone extent is empty");
  }
}

namespace detail {

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::uint64_t bits) {
  // 53-bit mantissa in (0, 1]; never returns 0 so log() below is safe.
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}
}  // namespace

double gaussian_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  // Counter-based Box-Muller: a pure function of (seed, stream, counter), so
  // every sensor sample is reproducible in isolation.
  std::uint64_t key = splitmix64(seed ^ splitmix64(stream));
  const std::uint64_t a = splitmix64(key ^ splitmix64(2 * counter));
  const std::uint64_t b = splitmix64(key ^ splitmix64(2 * counter + 1));
  const double u1 = uniform01(a);
  const double u2 = uniform01(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

namespace {

VelocityCommand effective_command(const Pose& pose, const VelocityCommand& cmd,
                                  const DisturbanceConfig& cfg) {
  double g_nu = cfg.gain_nu;
  double g_omega = cfg.gain_omega;
  for (const auto& z : cfg.slip_zones) {
    if (pose.x >= z.x_min && pose.x <= z.x_max && pose.y >= z.y_min && pose.y <= z.y_max) {
      g_nu *= z.gain_nu;
      g_omega *= z.gain_omega;
    }
  }
  return {g_nu * cmd.nu, g_omega * cmd.omega};
}

struct PoseDeriv {
  double dx, dy, dtheta;
};

PoseDeriv unicycle_rate(const Pose& p, double nu, double omega) {
  return {nu * std::cos(p.theta), nu * std::sin(p.theta), omega};
}

}  // namespace

PlantState plant_step(const PlantState& state, const VelocityCommand& cmd,
                      const DisturbanceConfig& cfg, double t_step) {
  if (!(t_step > 0.0)) throw NonPositiveStep();
  const VelocityCommand eff = effective_command(state.pose, cmd, cfg);

  // Velocities follow the lag exactly; within the step the pose sees the
  // continuous lag transient through the RK4 stage times.
  auto nu_at = [&](double tau) {
    if (cfg.lag_tau <= 0.0) return eff.nu;
    return eff.nu + (state.nu_actual - eff.nu) * std::exp(-tau / cfg.lag_tau);
  };
  auto omega_at = [&](double tau) {
    if (cfg.lag_tau <= 0.0) return eff.omega;
    return eff.omega + (state.omega_actual - eff.omega) * std::exp(-tau / cfg.lag_tau);
  };

  constexpr int kSubsteps = 4;
  const double h = t_step / kSubsteps;
  Pose pose = state.pose;
  for (int i = 0; i < kSubsteps; ++i) {
    const double t0 = i * h;
    const PoseDeriv k1 = unicycle_rate(pose, nu_at(t0), omega_at(t0));
    Pose p2{pose.x + 0.5 * h * k1.dx, pose.y + 0.5 * h * k1.dy, pose.theta + 0.5 * h * k1.dtheta};
    const PoseDeriv k2 = unicycle_rate(p2, nu_at(t0 + 0.5 * h), omega_at(t0 + 0.5 * h));
    Pose p3{pose.x + 0.5 * h * k2.dx, pose.y + 0.5 * h * k2.dy, pose.theta + 0.5 * h * k2.dtheta};
    const PoseDeriv k3 = unicycle_rate(p3, nu_at(t0 + 0.5 * h), omega_at(t0 + 0.5 * h));
    Pose p4{pose.x + h * k3.dx, pose.y + h * k3.dy, pose.theta + h * k3.dtheta};
    const PoseDeriv k4 = unicycle_rate(p4, nu_at(t0 + h), omega_at(t0 + h));
    pose.x += h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    pose.y += h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    pose.theta += h / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
  }
  pose.theta = wrap_angle(pose.theta);

  PlantState out;
  out.pose = pose;
  out.nu_actual = nu_at(t_step);
  out.omega_actual = omega_at(t_step);
  return out;
}

SensorFrame sense(const PlantState& state, const DisturbanceConfig& cfg,
                  std::uint64_t step_index) {
  constexpr std::uint64_t kGnssX = 1, kGnssY = 2, kEncoder = 3, kGyro = 4;
  SensorFrame frame;
  frame.gnss.x = state.pose.x +
                 cfg.noise_gnss_sigma * detail::gaussian_draw(cfg.seed, kGnssX, step_index);
  frame.gnss.y = state.pose.y +
                 cfg.noise_gnss_sigma * detail::gaussian_draw(cfg.seed, kGnssY, step_index);
  frame.gnss.valid = true;
  frame.nu_meas = state.nu_actual +
                  cfg.noise_nu_sigma * detail::gaussian_draw(cfg.seed, kEncoder, step_index);
  frame.omega_meas = state.omega_actual +
                     cfg.noise_omega_sigma * detail::gaussian_draw(cfg.seed, kGyro, step_index);
  frame.truth = state;
  return frame;
}

std::pair<double, double> wheel_speeds(const VelocityCommand& cmd, double wheel_base) {
  if (!(wheel_base > 0.0)) throw NonPositiveWheelBase();
  // left-minus-right convention: omega = (nu_l - nu_r)/L, so the left wheel
  // leads on positive omega
  const double half = 0.5 * wheel_base * cmd.omega;
  return {cmd.nu + half, cmd.nu - half};
}

}  // namespace telc
