#include "telc/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>
#include <string>

#include "telc/angles.hpp"
#include "telc/errors.hpp"

namespace telc {

namespace {

// First-order-filtered numerical differentiation of the estimated errors
// (config ablation for the model-based derivatives).
class DerivativeFilter {
 public:
  DerivativeFilter(double t_step, double tau) : dt_(t_step), gain_(t_step / tau) {}

  ErrorDerivatives step(const ErrorState& e) {
    if (first_) {
      first_ = false;
    } else {
      e1_dot_ += gain_ * ((e.e1 - prev_e1_) / dt_ - e1_dot_);
      const double prev_e2_dot = e2_dot_;
      e2_dot_ += gain_ * ((e.e2 - prev_e2_) / dt_ - e2_dot_);
      e2_ddot_ += gain_ * ((e2_dot_ - prev_e2_dot) / dt_ - e2_ddot_);
    }
    prev_e1_ = e.e1;
    prev_e2_ = e.e2;
    return {e1_dot_, e2_dot_, e2_ddot_};
  }

 private:
  double dt_;
  double gain_;
  bool first_ = true;
  double prev_e1_ = 0.0, prev_e2_ = 0.0;
  double e1_dot_ = 0.0, e2_dot_ = 0.0, e2_ddot_ = 0.0;
};

void append_num(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

double mean_abs(const std::vector<TraceRow>& rows, std::size_t begin, std::size_t end,
                double TraceRow::*field) {
  if (begin >= end) return 0.0;
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += std::abs(rows[i].*field);
  return acc / static_cast<double>(end - begin);
}

}  // namespace

double euclidean_error(const Pose& truth, const ReferenceSample& ref) {
  return std::hypot(ref.x - truth.x, ref.y - truth.y);
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();

  const double ts = cfg.t_step;
  const ReferenceTrajectory traj = build_trajectory(cfg.segments, cfg.path_start, ts);
  const double duration = cfg.duration_s < 0.0 ? traj.duration() : cfg.duration_s;
  const auto n_steps = static_cast<std::size_t>(std::floor(duration / ts + 1e-9));
  if (n_steps == 0) throw ConfigError("scenario duration shorter than one control step");

  MpcConfig mpc_cfg = cfg.mpc;
  mpc_cfg.t_step = ts;
  TelcConfig telc_cfg = cfg.telc;
  telc_cfg.t_step = ts;
  const EkfConfig ekf_cfg = cfg.make_ekf_config();

  PlantState plant;
  plant.pose = cfg.robot_initial_pose();
  plant.pose.theta = wrap_angle(plant.pose.theta);
  plant.nu_actual = cfg.robot_nu0;
  plant.omega_actual = cfg.robot_omega0;

  EkfState est;
  est.mean.x = plant.pose.x + cfg.ekf_init_offset[0];
  est.mean.y = plant.pose.y + cfg.ekf_init_offset[1];
  est.mean.theta = wrap_angle(plant.pose.theta + cfg.ekf_init_offset[2]);
  est.covariance = Eigen::Matrix3d::Identity() * 0.1;

  MpcState mpc_state;
  GainSet gains;
  DerivativeFilter deriv_filter(ts, cfg.derivative_filter_tau);
  const bool adapt = cfg.controller == ControllerMode::kTelc;
  const double heading_sigma = std::sqrt(std::max(0.0, ekf_cfg.heading_variance));

  std::vector<VelocityCommand> horizon(static_cast<std::size_t>(mpc_cfg.n_p));
  RunResult result;
  result.trace.reserve(n_steps);

  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * ts;
    const ReferenceSample& ref = traj[std::min(k, traj.size() - 1)];

    // 1. sense
    SensorFrame frame = sense(plant, cfg.plant, k);
    if (cfg.ekf_heading_measurement) {
      frame.gnss.heading = wrap_angle(
          plant.pose.theta + heading_sigma * detail::gaussian_draw(cfg.plant.seed, 5, k));
    }

    // 2. estimate
    if (k > 0) est = ekf_predict(est, frame.nu_meas, frame.omega_meas, ekf_cfg);
    est = ekf_update(est, frame.gnss, ekf_cfg);

    // 3. robot-frame errors from the estimated pose
    const Pose ref_pose{ref.x, ref.y, ref.theta};
    const ErrorState e = error_state(ref_pose, est.mean);

    // 4. feedback
    for (std::size_t i = 0; i < horizon.size(); ++i) {
      const ReferenceSample& s = traj[std::min(k + i, traj.size() - 1)];
      horizon[i] = {s.nu, s.omega};
    }
    const MpcStepResult mpc_res = mpc_step(e, horizon, mpc_cfg, mpc_state);
    const ErrorInput u_b = mpc_res.u_b;

    // 5. feedforward (gains stay nominal in traditional mode)
    const VelocityCommand u_f = feedforward(gains, ref.nu, ref.omega);

    // 6. total command to the plant
    const VelocityCommand cmd{u_b.nu_e + u_f.nu, u_b.omega_e + u_f.omega};
    const PlantState plant_next = plant_step(plant, cmd, cfg.plant, ts);

    // 7. adaptation signals and update
    double sig_nu = cmd.nu;
    double sig_omega = cmd.omega;
    if (cfg.derivatives == DerivativeSource::kMeasured) {
      sig_nu = frame.nu_meas;
      sig_omega = frame.omega_meas;
    }
    ErrorDerivatives d;
    if (cfg.derivatives == DerivativeSource::kFilteredNumeric) {
      d = deriv_filter.step(e);
    } else {
      d = error_derivatives(e, sig_nu, sig_omega, ref.nu, ref.omega);
    }
    const TelcCosts costs = cost_values(e, d, telc_cfg);
    const GainSet gains_used = gains;
    if (adapt) gains = telc_update(gains, e, d, ref.nu, ref.omega, telc_cfg);

    // 8. log (truth is the pre-step state, time-matched with the reference)
    TraceRow row;
    row.t = t;
    row.ref_x = ref.x;
    row.ref_y = ref.y;
    row.ref_theta = ref.theta;
    row.nu_r = ref.nu;
    row.omega_r = ref.omega;
    row.true_x = plant.pose.x;
    row.true_y = plant.pose.y;
    row.true_theta = plant.pose.theta;
    row.est_x = est.mean.x;
    row.est_y = est.mean.y;
    row.est_theta = est.mean.theta;
    row.e1 = e.e1;
    row.e2 = e.e2;
    row.e3 = e.e3;
    row.nu_b = u_b.nu_e;
    row.omega_b = u_b.omega_e;
    row.nu_f = u_f.nu;
    row.omega_f = u_f.omega;
    row.nu_cmd = cmd.nu;
    row.omega_cmd = cmd.omega;
    row.k_nu_1 = gains_used.k_nu_1;
    row.k_nu_0 = gains_used.k_nu_0;
    row.k_omega_1 = gains_used.k_omega_1;
    row.k_omega_0 = gains_used.k_omega_0;
    row.e_nu_cost = costs.e_nu;
    row.e_omega_cost = costs.e_omega;
    row.lyapunov = costs.lyapunov;
    row.euclid_err = euclidean_error(plant.pose, ref);
    row.predicted_cost = mpc_res.diagnostics.predicted_cost;
    row.qp_iters = mpc_res.diagnostics.qp_iterations;
    row.active_constraints = mpc_res.diagnostics.active_constraints;
    row.cov_trace = est.covariance.trace();
    row.nees = position_nees(est, plant.pose);
    row.s_nu = surface_nu(e, d, telc_cfg);
    row.s_omega = surface_omega(e, d, telc_cfg);
    row.nu_actual = plant.nu_actual;
    row.omega_actual = plant.omega_actual;
    row.gnss_x = frame.gnss.x;
    row.gnss_y = frame.gnss.y;
    result.trace.push_back(row);

    plant = plant_next;
  }

  // summary
  RunSummary& s = result.summary;
  const auto& rows = result.trace;
  const auto n = rows.size();
  s.steps = n;
  s.final_gains = gains;
  double heading_sq = 0.0, est_heading_sq = 0.0, nees_acc = 0.0;
  std::size_t est_heading_count = 0;
  for (const auto& r : rows) {
    s.mean_euclidean_error += r.euclid_err;
    s.max_euclidean_error = std::max(s.max_euclidean_error, r.euclid_err);
    heading_sq += angle_diff(r.true_theta, r.ref_theta) * angle_diff(r.true_theta, r.ref_theta);
    s.mean_abs_feedback_nu += std::abs(r.nu_b);
    s.mean_abs_feedback_omega += std::abs(r.omega_b);
    s.gnss_mean_euclidean_error += std::hypot(r.ref_x - r.gnss_x, r.ref_y - r.gnss_y);
    nees_acc += r.nees;
    if (r.t >= 20.0) {
      const double he = angle_diff(r.est_theta, r.true_theta);
      est_heading_sq += he * he;
      ++est_heading_count;
    }
    if (std::abs(r.nu_b) > mpc_cfg.nu_e_bound + 1e-12 ||
        std::abs(r.omega_b) > mpc_cfg.omega_e_bound + 1e-12) {
      ++s.constraint_violations;
    }
    for (double kv : {r.k_nu_1, r.k_nu_0, r.k_omega_1, r.k_omega_0}) {
      s.max_abs_gain = std::max(s.max_abs_gain, std::abs(kv));
    }
  }
  const auto dn = static_cast<double>(n);
  s.mean_euclidean_error /= dn;
  s.mean_abs_feedback_nu /= dn;
  s.mean_abs_feedback_omega /= dn;
  s.gnss_mean_euclidean_error /= dn;
  s.rms_heading_error = std::sqrt(heading_sq / dn);
  s.mean_position_nees = nees_acc / dn;
  if (est_heading_count > 0) {
    s.rms_heading_est_error = std::sqrt(est_heading_sq / static_cast<double>(est_heading_count));
  }

  const std::size_t fifth = n / 5;
  const double head = mean_abs(rows, 0, fifth, &TraceRow::nu_b);
  const double tail = mean_abs(rows, n - fifth, n, &TraceRow::nu_b);
  s.feedback_fadeout_ratio_nu = tail / std::max(head, 1e-12);

  // windowed Lyapunov decrease diagnostic (5 s windows after the first 10 s)
  const auto window = static_cast<std::size_t>(std::lround(5.0 / ts));
  const auto start = static_cast<std::size_t>(std::lround(10.0 / ts));
  double prev_mean = -1.0;
  for (std::size_t w = start; w + window <= n; w += window) {
    double acc = 0.0;
    for (std::size_t i = w; i < w + window; ++i) acc += rows[i].lyapunov;
    const double m = acc / static_cast<double>(window);
    if (prev_mean >= 0.0 && m > prev_mean * 1.05 + 1e-12) {
      s.lyapunov_windowed_nonincreasing = false;
    }
    prev_mean = m;
  }
  return result;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::string out;
  out.reserve(trace.size() * 420 + 512);
  out +=
      "t,ref_x,ref_y,ref_theta,nu_r,omega_r,true_x,true_y,true_theta,"
      "est_x,est_y,est_theta,e1,e2,e3,nu_b,omega_b,nu_f,omega_f,nu_cmd,omega_cmd,"
      "k_nu_1,k_nu_0,k_omega_1,k_omega_0,E_nu,E_omega,V,euclid_err\n";
  for (const auto& r : trace) {
    const double cols[] = {r.t, r.ref_x, r.ref_y, r.ref_theta, r.nu_r, r.omega_r,
                           r.true_x, r.true_y, r.true_theta, r.est_x, r.est_y, r.est_theta,
                           r.e1, r.e2, r.e3, r.nu_b, r.omega_b, r.nu_f, r.omega_f,
                           r.nu_cmd, r.omega_cmd, r.k_nu_1, r.k_nu_0, r.k_omega_1,
                           r.k_omega_0, r.e_nu_cost, r.e_omega_cost, r.lyapunov, r.euclid_err};
    for (std::size_t i = 0; i < std::size(cols); ++i) {
      if (i) out += ',';
      append_num(out, cols[i]);
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << out;
}

void write_diagnostics_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::string out;
  out +=
      "t,predicted_cost,qp_iters,active_constraints,cov_trace,nees,s_nu,s_omega,"
      "nu_actual,omega_actual,gnss_x,gnss_y\n";
  for (const auto& r : trace) {
    append_num(out, r.t);
    out += ',';
    append_num(out, r.predicted_cost);
    out += ',' + std::to_string(r.qp_iters) + ',' + std::to_string(r.active_constraints) + ',';
    append_num(out, r.cov_trace);
    out += ',';
    append_num(out, r.nees);
    out += ',';
    append_num(out, r.s_nu);
    out += ',';
    append_num(out, r.s_omega);
    out += ',';
    append_num(out, r.nu_actual);
    out += ',';
    append_num(out, r.omega_actual);
    out += ',';
    append_num(out, r.gnss_x);
    out += ',';
    append_num(out, r.gnss_y);
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << out;
}

namespace {

nlohmann::ordered_json summary_to_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["mean_euclidean_error_m"] = s.mean_euclidean_error;
  j["max_euclidean_error_m"] = s.max_euclidean_error;
  j["rms_heading_error_rad"] = s.rms_heading_error;
  j["mean_abs_feedback"] = {{"nu_mps", s.mean_abs_feedback_nu},
                            {"omega_radps", s.mean_abs_feedback_omega}};
  j["final_gains"] = {{"k_nu_1", s.final_gains.k_nu_1},
                      {"k_nu_0", s.final_gains.k_nu_0},
                      {"k_omega_1", s.final_gains.k_omega_1},
                      {"k_omega_0", s.final_gains.k_omega_0}};
  j["constraint_violations"] = s.constraint_violations;
  j["diagnostics"] = {{"gnss_mean_euclidean_error_m", s.gnss_mean_euclidean_error},
                      {"rms_heading_est_error_rad", s.rms_heading_est_error},
                      {"mean_position_nees", s.mean_position_nees},
                      {"max_abs_gain", s.max_abs_gain},
                      {"feedback_fadeout_ratio_nu", s.feedback_fadeout_ratio_nu},
                      {"lyapunov_windowed_nonincreasing", s.lyapunov_windowed_nonincreasing},
                      {"steps", s.steps}};
  return j;
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << j.dump(2) << '\n';
}

}  // namespace

void write_summary_json(const std::string& path, const RunSummary& summary,
                        const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["scenario"] = cfg.name;
  j["controller"] = to_string(cfg.controller);
  j["seed"] = cfg.seed;
  j["summary"] = summary_to_json(summary);
  write_json_file(path, j);
}

void write_plot_data(const std::string& path, const std::vector<TraceRow>& trace) {
  std::string out = "t,series,value\n";
  for (const auto& r : trace) {
    const std::pair<const char*, double> series[] = {
        {"euclid_err", r.euclid_err}, {"e1", r.e1}, {"e2", r.e2}, {"e3", r.e3},
        {"nu_b", r.nu_b}, {"omega_b", r.omega_b}, {"nu_f", r.nu_f}, {"omega_f", r.omega_f},
        {"k_nu_1", r.k_nu_1}, {"k_nu_0", r.k_nu_0}, {"k_omega_1", r.k_omega_1},
        {"k_omega_0", r.k_omega_0}, {"V", r.lyapunov}};
    for (const auto& [name, value] : series) {
      append_num(out, r.t);
      out += ',';
      out += name;
      out += ',';
      append_num(out, value);
      out += '\n';
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << out;
}

RunResult run_scenario_to_dir(const ScenarioConfig& cfg, const std::string& prefix,
                              bool emit_plot_data) {
  std::filesystem::create_directories(cfg.output_dir);
  RunResult result = run_scenario(cfg);
  const std::filesystem::path dir(cfg.output_dir);
  write_trace_csv((dir / (prefix + "_trace.csv")).string(), result.trace);
  write_diagnostics_csv((dir / (prefix + "_diagnostics.csv")).string(), result.trace);
  write_summary_json((dir / (prefix + "_summary.json")).string(), result.summary, cfg);
  if (emit_plot_data) {
    write_plot_data((dir / (prefix + "_plot_long.csv")).string(), result.trace);
  }
  return result;
}

ComparisonReport compare(const ScenarioConfig& base) {
  ScenarioConfig cfg_trad = base;
  cfg_trad.controller = ControllerMode::kTraditional;
  ScenarioConfig cfg_telc = base;
  cfg_telc.controller = ControllerMode::kTelc;

  ComparisonReport report;
  report.traditional = run_scenario(cfg_trad).summary;
  report.telc = run_scenario(cfg_telc).summary;
  const double floor = 1e-4;
  report.error_ratio = std::max(report.telc.mean_euclidean_error, floor) /
                       std::max(report.traditional.mean_euclidean_error, floor);
  return report;
}

SweepReport sweep(const ScenarioConfig& base, int n_seeds) {
  if (n_seeds < 1) throw ConfigError("sweep needs at least one seed");
  std::vector<std::future<ComparisonReport>> jobs;
  jobs.reserve(static_cast<std::size_t>(n_seeds));
  for (int i = 0; i < n_seeds; ++i) {
    ScenarioConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(i);
    cfg.plant.seed = cfg.seed;
    jobs.push_back(std::async(std::launch::async, [cfg] { return compare(cfg); }));
  }
  SweepReport report;
  for (int i = 0; i < n_seeds; ++i) {
    const ComparisonReport c = jobs[static_cast<std::size_t>(i)].get();
    SweepEntry entry;
    entry.seed = base.seed + static_cast<std::uint64_t>(i);
    entry.traditional_mean_error = c.traditional.mean_euclidean_error;
    entry.telc_mean_error = c.telc.mean_euclidean_error;
    entry.ratio = c.error_ratio;
    report.entries.push_back(entry);
  }
  for (const auto& e : report.entries) {
    report.mean_ratio += e.ratio;
    report.mean_traditional_error += e.traditional_mean_error;
    report.mean_telc_error += e.telc_mean_error;
  }
  const auto dn = static_cast<double>(report.entries.size());
  report.mean_ratio /= dn;
  report.mean_traditional_error /= dn;
  report.mean_telc_error /= dn;
  double var = 0.0;
  for (const auto& e : report.entries) {
    var += (e.ratio - report.mean_ratio) * (e.ratio - report.mean_ratio);
  }
  report.std_ratio = report.entries.size() > 1
                         ? std::sqrt(var / (dn - 1.0))
                         : 0.0;
  return report;
}

void write_comparison_json(const std::string& path, const ComparisonReport& report,
                           const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["scenario"] = cfg.name;
  j["seed"] = cfg.seed;
  j["traditional"] = summary_to_json(report.traditional);
  j["telc"] = summary_to_json(report.telc);
  j["error_ratio"] = report.error_ratio;
  write_json_file(path, j);
}

void write_sweep_json(const std::string& path, const SweepReport& report,
                      const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["scenario"] = cfg.name;
  j["base_seed"] = cfg.seed;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    j["entries"].push_back({{"seed", e.seed},
                            {"traditional_mean_error_m", e.traditional_mean_error},
                            {"telc_mean_error_m", e.telc_mean_error},
                            {"ratio", e.ratio}});
  }
  j["mean_ratio"] = report.mean_ratio;
  j["std_ratio"] = report.std_ratio;
  j["mean_traditional_error_m"] = report.mean_traditional_error;
  j["mean_telc_error_m"] = report.mean_telc_error;
  write_json_file(path, j);
}

}  // namespace telc
