#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "telc/adaptation.hpp"
#include "telc/ekf.hpp"
#include "telc/mpc.hpp"
#include "telc/plant.hpp"
#include "telc/reference.hpp"
#include "telc/types.hpp"

namespace telc {

enum class ControllerMode { kTraditional, kTelc };

enum class DerivativeSource {
  kMeasured,        // encoder/gyro velocities (default)
  kCommanded,       // commanded totals u_b + u_f
  kFilteredNumeric  // filtered finite differences of the estimated errors
};

/// Everything one closed-loop run needs. Loaded from the flat key/value
/// scenario format (see load_scenario) or built programmatically.
struct ScenarioConfig {
  std::string name = "scenario";
  ControllerMode controller = ControllerMode::kTelc;

  std::vector<PathSegment> segments;
  Pose path_start;
  Pose robot_start;
  bool robot_start_set = false;  // when false, the robot starts on the path
  double robot_nu0 = 0.0;        // initial actual velocities (0 = rest start)
  double robot_omega0 = 0.0;

  double duration_s = -1.0;      // <0 means the full trajectory duration
  double t_step = 0.2;
  std::uint64_t seed = 0;

  MpcConfig mpc;
  TelcConfig telc;
  DerivativeSource derivatives = DerivativeSource::kMeasured;
  double derivative_filter_tau = 0.5;  // s, for kFilteredNumeric

  // EKF knobs as exposed by the file schema; the filter's V is derived from
  // gnss_sigma (variance = sigma^2).
  double ekf_w[3] = {0.1, 0.1, 0.1};
  double ekf_gnss_sigma = 0.03;
  bool ekf_heading_measurement = false;
  double ekf_init_offset[3] = {0.0, 0.0, 0.0};

  DisturbanceConfig plant;

  std::string output_dir = ".";

  Pose robot_initial_pose() const { return robot_start_set ? robot_start : path_start; }

  EkfConfig make_ekf_config() const;

  /// Throws ConfigError when any invariant fails (including duration
  /// exceeding the trajectory duration).
  void validate() const;
};

/// Parses the scenario text format: `key = value` lines, `#` comments,
/// repeated keys for arrays (segment, plant.slip_zone). Unknown keys are
/// errors. Throws ConfigError with the offending line number.
ScenarioConfig parse_scenario(std::istream& in, const std::string& origin = "<stream>");

/// Reads and parses a scenario file. Throws ConfigError.
ScenarioConfig load_scenario(const std::string& path);

const char* to_string(ControllerMode mode);
const char* to_string(DerivativeSource source);

}  // namespace telc
