#include "telc/scenario.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "telc/angles.hpp"
#include "telc/errors.hpp"

namespace telc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw ConfigError(os.str());
}

class ValueParser {
 public:
  ValueParser(std::string origin, int line) : origin_(std::move(origin)), line_(line) {}

  double as_double(const std::string& v) const {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) fail(origin_, line_, "trailing characters in number '" + v + "'");
      return d;
    } catch (const std::invalid_argument&) {
      fail(origin_, line_, "expected a number, got '" + v + "'");
    } catch (const std::out_of_range&) {
      fail(origin_, line_, "number out of range: '" + v + "'");
    }
  }

  long long as_int(const std::string& v) const {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      fail(origin_, line_, "expected an integer, got '" + v + "'");
    }
    return out;
  }

  bool as_bool(const std::string& v) const {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(origin_, line_, "expected true/false, got '" + v + "'");
  }

  std::vector<double> as_doubles(const std::string& v, std::size_t count) const {
    std::istringstream is(v);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(as_double(tok));
    if (out.size() != count) {
      std::ostringstream os;
      os << "expected " << count << " numbers, got " << out.size();
      fail(origin_, line_, os.str());
    }
    return out;
  }

 private:
  std::string origin_;
  int line_;
};

}  // namespace

EkfConfig ScenarioConfig::make_ekf_config() const {
  EkfConfig cfg;
  cfg.process_noise = Eigen::Vector3d(ekf_w[0], ekf_w[1], ekf_w[2]).asDiagonal();
  cfg.measurement_noise =
      Eigen::Matrix2d::Identity() * (ekf_gnss_sigma * ekf_gnss_sigma);
  cfg.t_step = t_step;
  cfg.heading_measurement = ekf_heading_measurement;
  return cfg;
}

void ScenarioConfig::validate() const {
  if (segments.empty()) throw ConfigError("scenario needs at least one segment");
  if (!(t_step > 0.0)) throw ConfigError("t_step_s must be positive");
  double total = 0.0;
  for (const auto& seg : segments) {
    if (!(seg.duration_s > 0.0)) throw ConfigError("segment durations must be positive");
    if (seg.nu_mps == 0.0) throw ConfigError("segment nu_mps must be nonzero");
    total += seg.duration_s;
  }
  if (duration_s >= 0.0 && duration_s > total + 1e-9) {
    throw ConfigError("duration_s exceeds the trajectory duration");
  }
  MpcConfig mpc_check = mpc;
  mpc_check.t_step = t_step;
  mpc_check.validate();
  TelcConfig telc_check = telc;
  telc_check.t_step = t_step;
  telc_check.validate();
  if (!(derivative_filter_tau > 0.0)) {
    throw ConfigError("telc.derivative_filter_tau must be positive");
  }
  for (double w : ekf_w) {
    if (w < 0.0) throw ConfigError("ekf.w entries must be nonnegative");
  }
  if (!(ekf_gnss_sigma > 0.0)) throw ConfigError("ekf.gnss_sigma must be positive");
  plant.validate();
}

ScenarioConfig parse_scenario(std::istream& in, const std::string& origin) {
  ScenarioConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  int line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    // strip comments: leading '#' or ' #' after content
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) {
      if (pos == 0 || line[pos - 1] == ' ' || line[pos - 1] == '\t') line = line.substr(0, pos);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");
    if (value.empty()) fail(origin, line_no, "empty value for '" + key + "'");

    const bool repeatable = key == "segment" || key == "plant.slip_zone";
    if (!repeatable && !seen.insert(key).second) {
      fail(origin, line_no, "duplicate key '" + key + "'");
    }

    const ValueParser p(origin, line_no);
    if (key == "name") {
      cfg.name = value;
    } else if (key == "controller") {
      if (value == "traditional") cfg.controller = ControllerMode::kTraditional;
      else if (value == "telc") cfg.controller = ControllerMode::kTelc;
      else fail(origin, line_no, "controller must be traditional or telc");
    } else if (key == "duration_s") {
      cfg.duration_s = p.as_double(value);
    } else if (key == "t_step_s") {
      cfg.t_step = p.as_double(value);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(p.as_int(value));
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "segment") {
      const auto v = p.as_doubles(value, 3);
      cfg.segments.push_back({v[0], v[1], v[2]});
    } else if (key == "path.x0") {
      cfg.path_start.x = p.as_double(value);
    } else if (key == "path.y0") {
      cfg.path_start.y = p.as_double(value);
    } else if (key == "path.theta0") {
      cfg.path_start.theta = wrap_angle(p.as_double(value));
    } else if (key == "robot.x0") {
      cfg.robot_start.x = p.as_double(value);
      cfg.robot_start_set = true;
    } else if (key == "robot.y0") {
      cfg.robot_start.y = p.as_double(value);
      cfg.robot_start_set = true;
    } else if (key == "robot.theta0") {
      cfg.robot_start.theta = wrap_angle(p.as_double(value));
      cfg.robot_start_set = true;
    } else if (key == "robot.nu0") {
      cfg.robot_nu0 = p.as_double(value);
    } else if (key == "robot.omega0") {
      cfg.robot_omega0 = p.as_double(value);
    } else if (key == "mpc.n_p") {
      cfg.mpc.n_p = static_cast<int>(p.as_int(value));
    } else if (key == "mpc.n_c") {
      cfg.mpc.n_c = static_cast<int>(p.as_int(value));
    } else if (key == "mpc.q") {
      const auto v = p.as_doubles(value, 3);
      for (int i = 0; i < 3; ++i) cfg.mpc.q_weights[i] = v[i];
    } else if (key == "mpc.r") {
      const auto v = p.as_doubles(value, 2);
      for (int i = 0; i < 2; ++i) cfg.mpc.r_weights[i] = v[i];
    } else if (key == "mpc.nu_e_bound") {
      cfg.mpc.nu_e_bound = p.as_double(value);
    } else if (key == "mpc.omega_e_bound") {
      cfg.mpc.omega_e_bound = p.as_double(value);
    } else if (key == "mpc.frozen_model") {
      cfg.mpc.frozen_model = p.as_bool(value);
    } else if (key == "mpc.solver_tol") {
      cfg.mpc.solver_tol = p.as_double(value);
    } else if (key == "mpc.max_iterations") {
      cfg.mpc.max_iterations = static_cast<int>(p.as_int(value));
    } else if (key == "telc.alpha_nu_1") {
      cfg.telc.alpha_nu_1 = p.as_double(value);
    } else if (key == "telc.alpha_nu_0") {
      cfg.telc.alpha_nu_0 = p.as_double(value);
    } else if (key == "telc.alpha_omega_1") {
      cfg.telc.alpha_omega_1 = p.as_double(value);
    } else if (key == "telc.alpha_omega_0") {
      cfg.telc.alpha_omega_0 = p.as_double(value);
    } else if (key == "telc.lambda_nu") {
      cfg.telc.lambda_nu = p.as_double(value);
    } else if (key == "telc.lambda_omega") {
      cfg.telc.lambda_omega = p.as_double(value);
    } else if (key == "telc.derivatives") {
      if (value == "measured") cfg.derivatives = DerivativeSource::kMeasured;
      else if (value == "commanded") cfg.derivatives = DerivativeSource::kCommanded;
      else if (value == "filtered_numeric") cfg.derivatives = DerivativeSource::kFilteredNumeric;
      else fail(origin, line_no, "telc.derivatives must be measured, commanded or filtered_numeric");
    } else if (key == "telc.derivative_filter_tau") {
      cfg.derivative_filter_tau = p.as_double(value);
    } else if (key == "ekf.w") {
      const auto v = p.as_doubles(value, 3);
      for (int i = 0; i < 3; ++i) cfg.ekf_w[i] = v[i];
    } else if (key == "ekf.gnss_sigma") {
      cfg.ekf_gnss_sigma = p.as_double(value);
    } else if (key == "ekf.heading_measurement") {
      cfg.ekf_heading_measurement = p.as_bool(value);
    } else if (key == "ekf.init_offset") {
      const auto v = p.as_doubles(value, 3);
      for (int i = 0; i < 3; ++i) cfg.ekf_init_offset[i] = v[i];
    } else if (key == "plant.gain_nu") {
      cfg.plant.gain_nu = p.as_double(value);
    } else if (key == "plant.gain_omega") {
      cfg.plant.gain_omega = p.as_double(value);
    } else if (key == "plant.lag_tau_s") {
      cfg.plant.lag_tau = p.as_double(value);
    } else if (key == "plant.noise_gnss_sigma") {
      cfg.plant.noise_gnss_sigma = p.as_double(value);
    } else if (key == "plant.noise_nu_sigma") {
      cfg.plant.noise_nu_sigma = p.as_double(value);
    } else if (key == "plant.noise_omega_sigma") {
      cfg.plant.noise_omega_sigma = p.as_double(value);
    } else if (key == "plant.slip_zone") {
      const auto v = p.as_doubles(value, 6);
      cfg.plant.slip_zones.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
    } else {
      fail(origin, line_no, "unknown key '" + key + "'");
    }
  }

  cfg.plant.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  return parse_scenario(in, path);
}

const char* to_string(ControllerMode mode) {
  return mode == ControllerMode::kTraditional ? "traditional" : "telc";
}

const char* to_string(DerivativeSource source) {
  switch (source) {
    case DerivativeSource::kMeasured: return "measured";
    case DerivativeSource::kCommanded: return "commanded";
    case DerivativeSource::kFilteredNumeric: return "filtered_numeric";
  }
  return "?";
}

}  // namespace telc
