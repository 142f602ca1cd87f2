#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <span>
#include <vector>

#include "telc/adaptation.hpp"
#include "telc/ekf.hpp"
#include "telc/error_model.hpp"
#include "telc/errors.hpp"
#include "telc/harness.hpp"
#include "telc/mpc.hpp"
#include "telc/plant.hpp"
#include "telc/reference.hpp"
#include "telc/scenario.hpp"

namespace py = pybind11;
using namespace telc;

namespace {

std::vector<VelocityCommand> to_horizon(const std::vector<std::pair<double, double>>& refs) {
  std::vector<VelocityCommand> out;
  out.reserve(refs.size());
  for (const auto& [nu, omega] : refs) out.push_back({nu, omega});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tracking-error learning control simulation laboratory";

  py::register_exception<Error>(m, "TelcError", PyExc_RuntimeError);

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("theta"))
      .def_readwrite("x", &Pose::x)
      .def_readwrite("y", &Pose::y)
      .def_readwrite("theta", &Pose::theta)
      .def("__repr__", [](const Pose& p) {
        return "Pose(x=" + std::to_string(p.x) + ", y=" + std::to_string(p.y) +
               ", theta=" + std::to_string(p.theta) + ")";
      });

  py::class_<VelocityCommand>(m, "VelocityCommand")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("nu"), py::arg("omega"))
      .def_readwrite("nu", &VelocityCommand::nu)
      .def_readwrite("omega", &VelocityCommand::omega);

  py::class_<ErrorState>(m, "ErrorState")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("e1"), py::arg("e2"), py::arg("e3"))
      .def_readwrite("e1", &ErrorState::e1)
      .def_readwrite("e2", &ErrorState::e2)
      .def_readwrite("e3", &ErrorState::e3);

  py::class_<ErrorInput>(m, "ErrorInput")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("nu_e"), py::arg("omega_e"))
      .def_readwrite("nu_e", &ErrorInput::nu_e)
      .def_readwrite("omega_e", &ErrorInput::omega_e);

  py::class_<LinearErrorModel>(m, "LinearErrorModel")
      .def_readonly("A", &LinearErrorModel::A)
      .def_readonly("B", &LinearErrorModel::B);

  py::class_<DiscreteErrorModel>(m, "DiscreteErrorModel")
      .def_readonly("A", &DiscreteErrorModel::A)
      .def_readonly("B", &DiscreteErrorModel::B);

  m.def("error_state", &error_state, py::arg("reference"), py::arg("actual"));
  m.def("nonlinear_error_rate", &nonlinear_error_rate, py::arg("e"), py::arg("nu"),
        py::arg("omega"), py::arg("nu_r"), py::arg("omega_r"));
  m.def("linearized_model", &linearized_model, py::arg("nu_r"), py::arg("omega_r"));
  m.def("is_controllable", &is_controllable, py::arg("model"));
  m.def("discretize", &discretize, py::arg("model"), py::arg("t_step"));

  // --- reference generation ----------------------------------------------
  py::enum_<Direction>(m, "Direction")
      .value("FORWARD", Direction::kForward)
      .value("REVERSE", Direction::kReverse);

  py::class_<PathSegment>(m, "PathSegment")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("duration_s"), py::arg("nu_mps"),
           py::arg("omega_radps"))
      .def_readwrite("duration_s", &PathSegment::duration_s)
      .def_readwrite("nu_mps", &PathSegment::nu_mps)
      .def_readwrite("omega_radps", &PathSegment::omega_radps);

  py::class_<ReferenceSample>(m, "ReferenceSample")
      .def_readonly("x", &ReferenceSample::x)
      .def_readonly("y", &ReferenceSample::y)
      .def_readonly("theta", &ReferenceSample::theta)
      .def_readonly("nu", &ReferenceSample::nu)
      .def_readonly("omega", &ReferenceSample::omega)
      .def_readonly("direction", &ReferenceSample::direction);

  py::class_<ReferenceTrajectory>(m, "ReferenceTrajectory")
      .def_property_readonly("t_start", &ReferenceTrajectory::t_start)
      .def_property_readonly("t_step", &ReferenceTrajectory::t_step)
      .def_property_readonly("t_end", &ReferenceTrajectory::t_end)
      .def_property_readonly("duration", &ReferenceTrajectory::duration)
      .def("__len__", &ReferenceTrajectory::size)
      .def("__getitem__",
           [](const ReferenceTrajectory& t, std::size_t i) {
             if (i >= t.size()) throw py::index_error();
             return t[i];
           })
      .def("sample_at", &ReferenceTrajectory::sample_at, py::arg("t"),
           py::return_value_policy::copy);

  m.def(
      "build_trajectory",
      [](const std::vector<PathSegment>& segments, const Pose& initial_pose, double t_step) {
        return build_trajectory(segments, initial_pose, t_step);
      },
      py::arg("segments"), py::arg("initial_pose"), py::arg("t_step"));
  m.def(
      "reference_controls_from_curve",
      [](const std::vector<double>& x, const std::vector<double>& y, double t_step,
         Direction direction) {
        return reference_controls_from_curve(x, y, t_step, direction);
      },
      py::arg("x"), py::arg("y"), py::arg("t_step"), py::arg("direction"));

  // --- MPC feedback -------------------------------------------------------
  py::class_<MpcConfig>(m, "MpcConfig")
      .def(py::init<>())
      .def_readwrite("n_p", &MpcConfig::n_p)
      .def_readwrite("n_c", &MpcConfig::n_c)
      .def_readwrite("t_step", &MpcConfig::t_step)
      .def_readwrite("nu_e_bound", &MpcConfig::nu_e_bound)
      .def_readwrite("omega_e_bound", &MpcConfig::omega_e_bound)
      .def_readwrite("frozen_model", &MpcConfig::frozen_model)
      .def_readwrite("solver_tol", &MpcConfig::solver_tol)
      .def_readwrite("max_iterations", &MpcConfig::max_iterations)
      .def("validate", &MpcConfig::validate);

  py::class_<MpcState>(m, "MpcState")
      .def(py::init<>())
      .def_readwrite("last_u_e", &MpcState::last_u_e);

  py::class_<MpcDiagnostics>(m, "MpcDiagnostics")
      .def_readonly("predicted_cost", &MpcDiagnostics::predicted_cost)
      .def_readonly("qp_iterations", &MpcDiagnostics::qp_iterations)
      .def_readonly("active_constraints", &MpcDiagnostics::active_constraints)
      .def_readonly("converged", &MpcDiagnostics::converged);

  py::class_<QpProblem>(m, "QpProblem")
      .def_readonly("H", &QpProblem::H)
      .def_readonly("g", &QpProblem::g)
      .def_readonly("C", &QpProblem::C)
      .def_readonly("u_offset", &QpProblem::u_offset)
      .def_readonly("lower", &QpProblem::lower)
      .def_readonly("upper", &QpProblem::upper)
      .def_readonly("cost_offset", &QpProblem::cost_offset);

  py::class_<QpSolution>(m, "QpSolution")
      .def_readonly("delta_u", &QpSolution::delta_u)
      .def_readonly("iterations", &QpSolution::iterations)
      .def_readonly("kkt_residual", &QpSolution::kkt_residual)
      .def_readonly("converged", &QpSolution::converged);

  m.def(
      "condense",
      [](const ErrorState& e_hat, const std::vector<std::pair<double, double>>& refs,
         const MpcConfig& cfg, const ErrorInput& last_u_e) {
        return condense(e_hat, to_horizon(refs), cfg, last_u_e);
      },
      py::arg("e_hat"), py::arg("ref_horizon"), py::arg("cfg"), py::arg("last_u_e"));
  m.def("solve_qp", &solve_qp, py::arg("problem"), py::arg("tol"),
        py::arg("max_iterations") = 500);
  m.def(
      "mpc_step",
      [](const ErrorState& e_hat, const std::vector<std::pair<double, double>>& refs,
         const MpcConfig& cfg, MpcState& state) {
        const MpcStepResult r = mpc_step(e_hat, to_horizon(refs), cfg, state);
        return py::make_tuple(r.u_b, r.diagnostics);
      },
      py::arg("e_hat"), py::arg("ref_horizon"), py::arg("cfg"), py::arg("state"));

  // --- adaptation ----------------------------------------------------------
  py::class_<GainSet>(m, "GainSet")
      .def(py::init<>())
      .def(py::init<double, double, double, double>(), py::arg("k_nu_1"), py::arg("k_nu_0"),
           py::arg("k_omega_1"), py::arg("k_omega_0"))
      .def_readwrite("k_nu_1", &GainSet::k_nu_1)
      .def_readwrite("k_nu_0", &GainSet::k_nu_0)
      .def_readwrite("k_omega_1", &GainSet::k_omega_1)
      .def_readwrite("k_omega_0", &GainSet::k_omega_0);

  py::class_<TelcConfig>(m, "TelcConfig")
      .def(py::init<>())
      .def_readwrite("alpha_nu_1", &TelcConfig::alpha_nu_1)
      .def_readwrite("alpha_nu_0", &TelcConfig::alpha_nu_0)
      .def_readwrite("alpha_omega_1", &TelcConfig::alpha_omega_1)
      .def_readwrite("alpha_omega_0", &TelcConfig::alpha_omega_0)
      .def_readwrite("lambda_nu", &TelcConfig::lambda_nu)
      .def_readwrite("lambda_omega", &TelcConfig::lambda_omega)
      .def_readwrite("t_step", &TelcConfig::t_step)
      .def("validate", &TelcConfig::validate);

  py::class_<ErrorDerivatives>(m, "ErrorDerivatives")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("e1_dot"), py::arg("e2_dot"),
           py::arg("e2_ddot"))
      .def_readwrite("e1_dot", &ErrorDerivatives::e1_dot)
      .def_readwrite("e2_dot", &ErrorDerivatives::e2_dot)
      .def_readwrite("e2_ddot", &ErrorDerivatives::e2_ddot);

  py::class_<TelcCosts>(m, "TelcCosts")
      .def_readonly("e_nu", &TelcCosts::e_nu)
      .def_readonly("e_omega", &TelcCosts::e_omega)
      .def_readonly("lyapunov", &TelcCosts::lyapunov);

  py::class_<CurvatureValues>(m, "CurvatureValues")
      .def_readonly("k_nu_1", &CurvatureValues::k_nu_1)
      .def_readonly("k_nu_0", &CurvatureValues::k_nu_0)
      .def_readonly("k_omega_1", &CurvatureValues::k_omega_1)
      .def_readonly("k_omega_0", &CurvatureValues::k_omega_0);

  m.def("feedforward", &feedforward, py::arg("gains"), py::arg("nu_r"), py::arg("omega_r"));
  m.def("error_derivatives", &error_derivatives, py::arg("e"), py::arg("nu"), py::arg("omega"),
        py::arg("nu_r"), py::arg("omega_r"));
  m.def("telc_update", &telc_update, py::arg("gains"), py::arg("e"), py::arg("d"),
        py::arg("nu_r"), py::arg("omega_r"), py::arg("cfg"));
  m.def("cost_values", &cost_values, py::arg("e"), py::arg("d"), py::arg("cfg"));
  m.def("curvature_check", &curvature_check, py::arg("nu_r"), py::arg("omega_r"),
        py::arg("cfg"));

  // --- state estimation ----------------------------------------------------
  py::class_<EkfConfig>(m, "EkfConfig")
      .def(py::init<>())
      .def_readwrite("process_noise", &EkfConfig::process_noise)
      .def_readwrite("measurement_noise", &EkfConfig::measurement_noise)
      .def_readwrite("t_step", &EkfConfig::t_step)
      .def_readwrite("heading_measurement", &EkfConfig::heading_measurement)
      .def_readwrite("heading_variance", &EkfConfig::heading_variance)
      .def("validate", &EkfConfig::validate);

  py::class_<EkfState>(m, "EkfState")
      .def(py::init<>())
      .def_readwrite("mean", &EkfState::mean)
      .def_readwrite("covariance", &EkfState::covariance);

  py::class_<Measurement>(m, "Measurement")
      .def(py::init<>())
      .def(py::init([](double x, double y, bool valid, std::optional<double> heading) {
             Measurement z;
             z.x = x;
             z.y = y;
             z.valid = valid;
             z.heading = heading;
             return z;
           }),
           py::arg("x"), py::arg("y"), py::arg("valid") = true,
           py::arg("heading") = std::nullopt)
      .def_readwrite("x", &Measurement::x)
      .def_readwrite("y", &Measurement::y)
      .def_readwrite("valid", &Measurement::valid)
      .def_readwrite("heading", &Measurement::heading);

  m.def("ekf_predict", &ekf_predict, py::arg("state"), py::arg("nu"), py::arg("omega"),
        py::arg("cfg"));
  m.def("ekf_update", &ekf_update, py::arg("state"), py::arg("z"), py::arg("cfg"));
  m.def("position_nees", &position_nees, py::arg("state"), py::arg("truth"));

  // --- plant ---------------------------------------------------------------
  py::class_<SlipZone>(m, "SlipZone")
      .def(py::init<>())
      .def_readwrite("x_min", &SlipZone::x_min)
      .def_readwrite("x_max", &SlipZone::x_max)
      .def_readwrite("y_min", &SlipZone::y_min)
      .def_readwrite("y_max", &SlipZone::y_max)
      .def_readwrite("gain_nu", &SlipZone::gain_nu)
      .def_readwrite("gain_omega", &SlipZone::gain_omega);

  py::class_<DisturbanceConfig>(m, "DisturbanceConfig")
      .def(py::init<>())
      .def_readwrite("gain_nu", &DisturbanceConfig::gain_nu)
      .def_readwrite("gain_omega", &DisturbanceConfig::gain_omega)
      .def_readwrite("lag_tau", &DisturbanceConfig::lag_tau)
      .def_readwrite("slip_zones", &DisturbanceConfig::slip_zones)
      .def_readwrite("noise_gnss_sigma", &DisturbanceConfig::noise_gnss_sigma)
      .def_readwrite("noise_nu_sigma", &DisturbanceConfig::noise_nu_sigma)
      .def_readwrite("noise_omega_sigma", &DisturbanceConfig::noise_omega_sigma)
      .def_readwrite("seed", &DisturbanceConfig::seed)
      .def("validate", &DisturbanceConfig::validate);

  py::class_<PlantState>(m, "PlantState")
      .def(py::init<>())
      .def_readwrite("pose", &PlantState::pose)
      .def_readwrite("nu_actual", &PlantState::nu_actual)
      .def_readwrite("omega_actual", &PlantState::omega_actual);

  py::class_<SensorFrame>(m, "SensorFrame")
      .def_readonly("gnss", &SensorFrame::gnss)
      .def_readonly("nu_meas", &SensorFrame::nu_meas)
      .def_readonly("omega_meas", &SensorFrame::omega_meas)
      .def_readonly("truth", &SensorFrame::truth);

  m.def("plant_step", &plant_step, py::arg("state"), py::arg("cmd"), py::arg("cfg"),
        py::arg("t_step"));
  m.def("sense", &sense, py::arg("state"), py::arg("cfg"), py::arg("step_index"));
  m.def("wheel_speeds", &wheel_speeds, py::arg("cmd"), py::arg("wheel_base"));

  // --- scenarios and the closed loop ---------------------------------------
  py::enum_<ControllerMode>(m, "ControllerMode")
      .value("TRADITIONAL", ControllerMode::kTraditional)
      .value("TELC", ControllerMode::kTelc);

  py::enum_<DerivativeSource>(m, "DerivativeSource")
      .value("MEASURED", DerivativeSource::kMeasured)
      .value("COMMANDED", DerivativeSource::kCommanded)
      .value("FILTERED_NUMERIC", DerivativeSource::kFilteredNumeric);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("controller", &ScenarioConfig::controller)
      .def_readwrite("segments", &ScenarioConfig::segments)
      .def_readwrite("path_start", &ScenarioConfig::path_start)
      .def_readwrite("robot_start", &ScenarioConfig::robot_start)
      .def_readwrite("robot_start_set", &ScenarioConfig::robot_start_set)
      .def_readwrite("robot_nu0", &ScenarioConfig::robot_nu0)
      .def_readwrite("robot_omega0", &ScenarioConfig::robot_omega0)
      .def_readwrite("duration_s", &ScenarioConfig::duration_s)
      .def_readwrite("t_step", &ScenarioConfig::t_step)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("mpc", &ScenarioConfig::mpc)
      .def_readwrite("telc", &ScenarioConfig::telc)
      .def_readwrite("derivatives", &ScenarioConfig::derivatives)
      .def_readwrite("plant", &ScenarioConfig::plant)
      .def_readwrite("output_dir", &ScenarioConfig::output_dir)
      .def("validate", &ScenarioConfig::validate);

  m.def("load_scenario", &load_scenario, py::arg("path"));

  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("mean_euclidean_error", &RunSummary::mean_euclidean_error)
      .def_readonly("max_euclidean_error", &RunSummary::max_euclidean_error)
      .def_readonly("rms_heading_error", &RunSummary::rms_heading_error)
      .def_readonly("mean_abs_feedback_nu", &RunSummary::mean_abs_feedback_nu)
      .def_readonly("mean_abs_feedback_omega", &RunSummary::mean_abs_feedback_omega)
      .def_readonly("final_gains", &RunSummary::final_gains)
      .def_readonly("constraint_violations", &RunSummary::constraint_violations)
      .def_readonly("gnss_mean_euclidean_error", &RunSummary::gnss_mean_euclidean_error)
      .def_readonly("rms_heading_est_error", &RunSummary::rms_heading_est_error)
      .def_readonly("mean_position_nees", &RunSummary::mean_position_nees)
      .def_readonly("max_abs_gain", &RunSummary::max_abs_gain)
      .def_readonly("feedback_fadeout_ratio_nu", &RunSummary::feedback_fadeout_ratio_nu)
      .def_readonly("lyapunov_windowed_nonincreasing",
                    &RunSummary::lyapunov_windowed_nonincreasing)
      .def_readonly("steps", &RunSummary::steps);

  py::class_<TraceRow>(m, "TraceRow")
      .def_readonly("t", &TraceRow::t)
      .def_readonly("true_x", &TraceRow::true_x)
      .def_readonly("true_y", &TraceRow::true_y)
      .def_readonly("true_theta", &TraceRow::true_theta)
      .def_readonly("est_x", &TraceRow::est_x)
      .def_readonly("est_y", &TraceRow::est_y)
      .def_readonly("est_theta", &TraceRow::est_theta)
      .def_readonly("e1", &TraceRow::e1)
      .def_readonly("e2", &TraceRow::e2)
      .def_readonly("e3", &TraceRow::e3)
      .def_readonly("nu_b", &TraceRow::nu_b)
      .def_readonly("omega_b", &TraceRow::omega_b)
      .def_readonly("nu_f", &TraceRow::nu_f)
      .def_readonly("omega_f", &TraceRow::omega_f)
      .def_readonly("nu_cmd", &TraceRow::nu_cmd)
      .def_readonly("omega_cmd", &TraceRow::omega_cmd)
      .def_readonly("k_nu_1", &TraceRow::k_nu_1)
      .def_readonly("k_nu_0", &TraceRow::k_nu_0)
      .def_readonly("k_omega_1", &TraceRow::k_omega_1)
      .def_readonly("k_omega_0", &TraceRow::k_omega_0)
      .def_readonly("lyapunov", &TraceRow::lyapunov)
      .def_readonly("euclid_err", &TraceRow::euclid_err);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("summary", &RunResult::summary)
      .def_readonly("trace", &RunResult::trace);

  py::class_<ComparisonReport>(m, "ComparisonReport")
      .def_readonly("traditional", &ComparisonReport::traditional)
      .def_readonly("telc", &ComparisonReport::telc)
      .def_readonly("error_ratio", &ComparisonReport::error_ratio);

  py::class_<SweepEntry>(m, "SweepEntry")
      .def_readonly("seed", &SweepEntry::seed)
      .def_readonly("traditional_mean_error", &SweepEntry::traditional_mean_error)
      .def_readonly("telc_mean_error", &SweepEntry::telc_mean_error)
      .def_readonly("ratio", &SweepEntry::ratio);

  py::class_<SweepReport>(m, "SweepReport")
      .def_readonly("entries", &SweepReport::entries)
      .def_readonly("mean_ratio", &SweepReport::mean_ratio)
      .def_readonly("std_ratio", &SweepReport::std_ratio)
      .def_readonly("mean_traditional_error", &SweepReport::mean_traditional_error)
      .def_readonly("mean_telc_error", &SweepReport::mean_telc_error);

  m.def("run_scenario", &run_scenario, py::arg("cfg"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_scenario_to_dir", &run_scenario_to_dir, py::arg("cfg"), py::arg("prefix"),
        py::arg("emit_plot_data") = false, py::call_guard<py::gil_scoped_release>());
  m.def("compare", &compare, py::arg("cfg"), py::call_guard<py::gil_scoped_release>());
  m.def("sweep", &sweep, py::arg("cfg"), py::arg("n_seeds"),
        py::call_guard<py::gil_scoped_release>());
  m.def("euclidean_error", &euclidean_error, py::arg("truth"), py::arg("ref"));
}
