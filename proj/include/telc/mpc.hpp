#pragma once

#include <Eigen/Dense>

#include <span>

#include "telc/error_model.hpp"
#include "telc/types.hpp"

namespace telc {

struct MpcConfig {
  int n_p = 20;                 // prediction horizon (steps)
  int n_c = 5;                  // control horizon (steps)
  double t_step = 0.2;          // s
  double q_weights[3] = {1.0, 1.0, 1.0};
  double r_weights[2] = {1.0, 1.0};
  double nu_e_bound = 0.1;      // m/s
  double omega_e_bound = 0.1;   // rad/s
  bool frozen_model = false;    // ablation: freeze A(i) at the current reference controls
  double solver_tol = 1e-8;
  int max_iterations = 500;

  /// Throws ConfigError on invariant violations.
  void validate() const;
};

/// Previously applied error-input; the receding-horizon recursion
/// u_e(k+1) = du*(k+1) + u_e(k) runs through this.
struct MpcState {
  ErrorInput last_u_e;
};

/// Condensed QP over the input-increment sequence dU (2 n_c variables):
///   min 1/2 dU' H dU + g' dU   s.t.  lower <= u_offset + C dU <= upper
/// C is the block lower-triangular summation map from increments to
/// cumulative inputs; u_offset stacks last_u_e.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd C;
  Eigen::VectorXd u_offset;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double cost_offset = 0.0;  // dU-independent part of the predicted cost
};

struct QpSolution {
  Eigen::VectorXd delta_u;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool converged = true;
};

struct MpcDiagnostics {
  double predicted_cost = 0.0;
  int qp_iterations = 0;
  int active_constraints = 0;
  bool converged = true;
};

struct MpcStepResult {
  ErrorInput u_b;
  MpcDiagnostics diagnostics;
};

/// Builds the condensed QP from the current error estimate, the reference
/// controls along the lookahead (ref_horizon[i] governs the propagation from
/// step i to i+1; must hold at least n_p entries) and the previous input.
/// Throws DimensionMismatch.
QpProblem condense(const ErrorState& e_hat, std::span<const VelocityCommand> ref_horizon,
                   const MpcConfig& cfg, const ErrorInput& last_u_e);

/// Solves the box-constrained QP by projected Newton in cumulative-input
/// coordinates (the box is axis-aligned there). Terminates when the natural
/// KKT residual drops below tol; if max_iterations is exhausted the best
/// iterate is returned with converged = false.
/// Throws Infeasible if the box is empty (lower > upper), which only happens
/// when last_u_e violates the bounds — an invariant breach upstream.
QpSolution solve_qp(const QpProblem& problem, double tol, int max_iterations = 500);

/// One receding-horizon step: condense, solve, apply the first increment.
/// The returned u_b is exactly projected onto the input box and stored back
/// into state.last_u_e.
MpcStepResult mpc_step(const ErrorState& e_hat, std::span<const VelocityCommand> ref_horizon,
                       const MpcConfig& cfg, MpcState& state);

}  // namespace telc
