#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "telc/ekf.hpp"
#include "telc/types.hpp"

namespace telc {

/// Rectangular patch with its own velocity gains (wheel-slip stand-in).
struct SlipZone {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double gain_nu = 1.0;
  double gain_omega = 1.0;
};

struct DisturbanceConfig {
  double gain_nu = 1.0;           // multiplicative actuator gain
  double gain_omega = 1.0;
  double lag_tau = 0.15;          // s, first-order velocity-loop lag (0 = instantaneous)
  std::vector<SlipZone> slip_zones;
  double noise_gnss_sigma = 0.03;   // m
  double noise_nu_sigma = 0.01;     // m/s
  double noise_omega_sigma = 0.005; // rad/s
  std::uint64_t seed = 0;

  /// Throws ConfigError on invariant violations.
  void validate() const;
};

/// Ground-truth plant state. nu/omega_actual trail the commanded velocities
/// through the first-order lag.
struct PlantState {
  Pose pose;
  double nu_actual = 0.0;
  double omega_actual = 0.0;
};

/// One sensing instant. truth is carried for metrics only and must never
/// reach the controller data path.
struct SensorFrame {
  Measurement gnss;
  double nu_meas = 0.0;
  double omega_meas = 0.0;
  PlantState truth;
};

/// Advances the plant one control step: applies zone/global gains to the
/// command, lets the actual velocities follow the first-order lag exactly,
/// and integrates the pose by RK4 (4 substeps) over the lag transient.
PlantState plant_step(const PlantState& state, const VelocityCommand& cmd,
                      const DisturbanceConfig& cfg, double t_step);

/// Synthesizes one sensor frame. Noise is drawn from per-sensor counter-based
/// streams: the frame is a pure function of (state, cfg.seed, step_index).
SensorFrame sense(const PlantState& state, const DisturbanceConfig& cfg,
                  std::uint64_t step_index);

/// Inverts the wheel mixing nu = (nu_l + nu_r)/2, omega = (nu_l - nu_r)/L
/// (left-minus-right convention). Returns (left, right).
/// Throws NonPositiveWheelBase.
std::pair<double, double> wheel_speeds(const VelocityCommand& cmd, double wheel_base);

namespace detail {
/// Deterministic standard-normal draw for (seed, stream, counter).
double gaussian_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
}  // namespace detail

}  // namespace telc
