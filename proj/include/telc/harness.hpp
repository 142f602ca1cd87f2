#pragma once

#include <string>
#include <vector>

#include "telc/adaptation.hpp"
#include "telc/scenario.hpp"

namespace telc {

/// One control step of the closed-loop trace. The first 29 fields are the
/// published trace CSV schema, in column order.
struct TraceRow {
  double t;
  double ref_x, ref_y, ref_theta;
  double nu_r, omega_r;
  double true_x, true_y, true_theta;
  double est_x, est_y, est_theta;
  double e1, e2, e3;
  double nu_b, omega_b;
  double nu_f, omega_f;
  double nu_cmd, omega_cmd;
  double k_nu_1, k_nu_0, k_omega_1, k_omega_0;
  double e_nu_cost, e_omega_cost, lyapunov;
  double euclid_err;
  // diagnostics (separate CSV)
  double predicted_cost;
  int qp_iters;
  int active_constraints;
  double cov_trace;
  double nees;
  double s_nu, s_omega;
  double nu_actual, omega_actual;
  double gnss_x, gnss_y;
};

struct RunSummary {
  double mean_euclidean_error = 0.0;  // m, truth vs time-matched reference
  double max_euclidean_error = 0.0;   // m
  double rms_heading_error = 0.0;     // rad, truth vs reference
  double mean_abs_feedback_nu = 0.0;     // m/s
  double mean_abs_feedback_omega = 0.0;  // rad/s
  GainSet final_gains;
  int constraint_violations = 0;  // must stay 0

  // secondary diagnostics
  double gnss_mean_euclidean_error = 0.0;  // same metric from raw GNSS
  double rms_heading_est_error = 0.0;      // estimator vs truth, after 20 s
  double mean_position_nees = 0.0;
  double max_abs_gain = 0.0;
  double feedback_fadeout_ratio_nu = 0.0;  // tail |nu_b| mean / head |nu_b| mean
  bool lyapunov_windowed_nonincreasing = true;
  std::size_t steps = 0;
};

struct RunResult {
  RunSummary summary;
  std::vector<TraceRow> trace;
};

/// Time-matched planar distance between the robot and the reference.
double euclidean_error(const Pose& truth, const ReferenceSample& ref);

/// Runs one closed-loop scenario in memory. Per step: sense, EKF
/// predict/update, error state from the estimate, MPC feedback, feedforward,
/// apply u = u_b + u_f to the plant, adaptation (telc mode), log.
/// Throws ConfigError on invalid configs; module errors propagate.
RunResult run_scenario(const ScenarioConfig& cfg);

/// Writes the published 29-column trace CSV (header row, '.' decimal, LF).
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

/// Writes the per-step diagnostics CSV (MPC, EKF and adaptation internals).
void write_diagnostics_csv(const std::string& path, const std::vector<TraceRow>& trace);

/// Writes the summary as JSON.
void write_summary_json(const std::string& path, const RunSummary& summary,
                        const ScenarioConfig& cfg);

/// Long-format (t, series, value) file for external plotting tools.
void write_plot_data(const std::string& path, const std::vector<TraceRow>& trace);

/// Runs a scenario and writes trace/diagnostics/summary under
/// cfg.output_dir. Returns the result. prefix names the files
/// (<prefix>_trace.csv, ...).
RunResult run_scenario_to_dir(const ScenarioConfig& cfg, const std::string& prefix,
                              bool emit_plot_data = false);

struct ComparisonReport {
  RunSummary traditional;
  RunSummary telc;
  double error_ratio = 0.0;  // telc/traditional mean errors, floored at 1e-4 m
};

/// Runs traditional and telc on the identical seed/disturbances.
ComparisonReport compare(const ScenarioConfig& base);

struct SweepEntry {
  std::uint64_t seed = 0;
  double traditional_mean_error = 0.0;
  double telc_mean_error = 0.0;
  double ratio = 0.0;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  double mean_ratio = 0.0;
  double std_ratio = 0.0;
  double mean_traditional_error = 0.0;
  double mean_telc_error = 0.0;
};

/// Seed sweep of compare() over seeds base_seed .. base_seed + n_seeds - 1,
/// run in parallel (independent scenario instances).
SweepReport sweep(const ScenarioConfig& base, int n_seeds);

void write_comparison_json(const std::string& path, const ComparisonReport& report,
                           const ScenarioConfig& cfg);
void write_sweep_json(const std::string& path, const SweepReport& report,
                      const ScenarioConfig& cfg);

}  // namespace telc
