#include "telc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "telc/errors.hpp"

namespace telc {

void MpcConfig::validate() const {
  if (!(n_c >= 1 && n_c <= n_p)) throw ConfigError("require 1 <= n_c <= n_p");
  if (!(t_step > 0.0)) throw ConfigError("mpc t_step must be positive");
  if (!(nu_e_bound > 0.0 && omega_e_bound > 0.0)) throw ConfigError("input bounds must be positive");
  double q_sum = 0.0;
  for (double q : q_weights) {
    if (q < 0.0) throw ConfigError("q weights must be nonnegative");
    q_sum += q;
  }
  if (q_sum == 0.0) throw ConfigError("q weights must not all be zero");
  for (double r : r_weights) {
    if (r < 0.0) throw ConfigError("r weights must be nonnegative");
  }
  if (!(solver_tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
}

QpProblem condense(const ErrorState& e_hat, std::span<const VelocityCommand> ref_horizon,
                   const MpcConfig& cfg, const ErrorInput& last_u_e) {
  const int n_p = cfg.n_p;
  const int n_c = cfg.n_c;
  if (static_cast<int>(ref_horizon.size()) < n_p) {
    throw DimensionMismatch("ref_horizon shorter than the prediction horizon");
  }

  // Discretized time-varying models along the lookahead; ref_horizon[i]
  // governs the propagation from step i to i+1.
  std::vector<Eigen::Matrix3d> Ad(n_p);
  std::vector<Eigen::Matrix<double, 3, 2>> Bd(n_p);
  for (int i = 0; i < n_p; ++i) {
    const VelocityCommand& rc = cfg.frozen_model ? ref_horizon[0] : ref_horizon[i];
    const DiscreteErrorModel dm = discretize(linearized_model(rc.nu, rc.omega), cfg.t_step);
    Ad[i] = dm.A;
    Bd[i] = dm.B;
  }

  // Stacked prediction e(1..n_p) = Psi e0 + Phi dU + Loff last_u_e, where the
  // input at step m is last_u_e + sum_{j <= min(m, n_c-1)} du_j.
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(3 * n_p, 2 * n_c);
  Eigen::MatrixXd Psi(3 * n_p, 3);
  Eigen::MatrixXd Loff = Eigen::MatrixXd::Zero(3 * n_p, 2);

  Eigen::Matrix3d state_trans = Eigen::Matrix3d::Identity();
  for (int i = 1; i <= n_p; ++i) {
    state_trans = Ad[i - 1] * state_trans;  // Ad(i-1)...Ad(0)
    Psi.block<3, 3>(3 * (i - 1), 0) = state_trans;

    Eigen::Matrix3d prod = Eigen::Matrix3d::Identity();  // Ad(i-1)...Ad(m+1)
    for (int m = i - 1; m >= 0; --m) {
      const Eigen::Matrix<double, 3, 2> G = prod * Bd[m];
      Loff.block<3, 2>(3 * (i - 1), 0) += G;
      const int j_max = std::min(m, n_c - 1);
      for (int j = 0; j <= j_max; ++j) {
        Phi.block<3, 2>(3 * (i - 1), 2 * j) += G;
      }
      prod = prod * Ad[m];
    }
  }

  Eigen::VectorXd q_diag(3 * n_p);
  for (int i = 0; i < n_p; ++i) {
    for (int k = 0; k < 3; ++k) q_diag(3 * i + k) = cfg.q_weights[k];
  }
  Eigen::VectorXd r_diag(2 * n_c);
  for (int i = 0; i < n_c; ++i) {
    for (int k = 0; k < 2; ++k) r_diag(2 * i + k) = cfg.r_weights[k];
  }

  const Eigen::Vector3d e0(e_hat.e1, e_hat.e2, e_hat.e3);
  const Eigen::Vector2d u_prev(last_u_e.nu_e, last_u_e.omega_e);
  const Eigen::VectorXd free_response = Psi * e0 + Loff * u_prev;

  QpProblem p;
  p.H = Phi.transpose() * q_diag.asDiagonal() * Phi;
  p.H.diagonal() += r_diag;
  p.H = 0.5 * (p.H + p.H.transpose().eval());  // enforce exact symmetry
  p.g = Phi.transpose() * (q_diag.asDiagonal() * free_response);
  p.cost_offset = 0.5 * free_response.dot(q_diag.asDiagonal() * free_response);

  p.C = Eigen::MatrixXd::Zero(2 * n_c, 2 * n_c);
  for (int i = 0; i < n_c; ++i) {
    for (int j = 0; j <= i; ++j) {
      p.C.block<2, 2>(2 * i, 2 * j) = Eigen::Matrix2d::Identity();
    }
  }
  p.u_offset = u_prev.replicate(n_c, 1);
  p.lower = Eigen::Vector2d(-cfg.nu_e_bound, -cfg.omega_e_bound).replicate(n_c, 1);
  p.upper = Eigen::Vector2d(cfg.nu_e_bound, cfg.omega_e_bound).replicate(n_c, 1);
  return p;
}

namespace {

// Natural-residual map for the box QP: ||v - proj(v - grad)||_inf.
double kkt_residual(const Eigen::VectorXd& v, const Eigen::VectorXd& grad,
                    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  double res = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double proj = std::clamp(v(i) - grad(i), lo(i), hi(i));
    res = std::max(res, std::abs(v(i) - proj));
  }
  return res;
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem, double tol, int max_iterations) {
  const Eigen::Index n = problem.g.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (problem.lower(i) > problem.upper(i)) {
      throw Infeasible("empty input box; last_u_e violates the bounds");
    }
  }

  // Change of variables v = u_offset + C dU: the feasible set becomes the
  // axis-aligned box [lower, upper] and C is invertible (unit lower-tri).
  const Eigen::MatrixXd C_inv =
      problem.C.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd Hv = C_inv.transpose() * problem.H * C_inv;
  const Eigen::VectorXd gv = C_inv.transpose() * problem.g - Hv * problem.u_offset;

  Eigen::VectorXd v = problem.u_offset.cwiseMax(problem.lower).cwiseMin(problem.upper);

  auto objective = [&](const Eigen::VectorXd& w) {
    return 0.5 * w.dot(Hv * w) + gv.dot(w);
  };

  QpSolution sol;
  sol.converged = false;
  Eigen::VectorXd grad = Hv * v + gv;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    const double res = kkt_residual(v, grad, problem.lower, problem.upper);
    sol.kkt_residual = res;
    if (res <= tol) {
      sol.converged = true;
      break;
    }

    // Projected Newton: gradient step on the binding set, Newton on the rest.
    const double eps_act = 1e-12;
    std::vector<Eigen::Index> free_idx;
    free_idx.reserve(n);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = v(i) <= problem.lower(i) + eps_act && grad(i) > 0.0;
      const bool at_hi = v(i) >= problem.upper(i) - eps_act && grad(i) < 0.0;
      if (at_lo || at_hi) {
        dir(i) = -grad(i);
      } else {
        free_idx.push_back(i);
      }
    }
    if (!free_idx.empty()) {
      const auto nf = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd Hf(nf, nf);
      Eigen::VectorXd gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf(a) = grad(free_idx[a]);
        for (Eigen::Index b = 0; b < nf; ++b) Hf(a, b) = Hv(free_idx[a], free_idx[b]);
      }
      // Ridge keeps the step defined when R has zero weights.
      Hf.diagonal().array() += 1e-12;
      const Eigen::VectorXd df = Hf.ldlt().solve(-gf);
      for (Eigen::Index a = 0; a < nf; ++a) dir(free_idx[a]) = df(a);
    }

    // Backtracking along the projection arc.
    const double f0 = objective(v);
    double alpha = 1.0;
    Eigen::VectorXd v_next = v;
    for (int ls = 0; ls < 60; ++ls) {
      v_next = (v + alpha * dir).cwiseMax(problem.lower).cwiseMin(problem.upper);
      const double f1 = objective(v_next);
      const double decrease = grad.dot(v - v_next);
      if (f1 <= f0 - 1e-4 * decrease || (v_next - v).lpNorm<Eigen::Infinity>() == 0.0) break;
      alpha *= 0.5;
    }
    v = v_next;
    grad = Hv * v + gv;
  }
  sol.iterations = iter;
  if (!sol.converged) {
    sol.kkt_residual = kkt_residual(v, grad, problem.lower, problem.upper);
  }
  sol.delta_u = problem.C.triangularView<Eigen::Lower>().solve(v - problem.u_offset);
  return sol;
}

MpcStepResult mpc_step(const ErrorState& e_hat, std::span<const VelocityCommand> ref_horizon,
                       const MpcConfig& cfg, MpcState& state) {
  const QpProblem problem = condense(e_hat, ref_horizon, cfg, state.last_u_e);
  const QpSolution sol = solve_qp(problem, cfg.solver_tol, cfg.max_iterations);

  ErrorInput u_b{state.last_u_e.nu_e + sol.delta_u(0), state.last_u_e.omega_e + sol.delta_u(1)};
  u_b.nu_e = std::clamp(u_b.nu_e, -cfg.nu_e_bound, cfg.nu_e_bound);
  u_b.omega_e = std::clamp(u_b.omega_e, -cfg.omega_e_bound, cfg.omega_e_bound);
  state.last_u_e = u_b;

  MpcStepResult result;
  result.u_b = u_b;
  result.diagnostics.predicted_cost = 0.5 * sol.delta_u.dot(problem.H * sol.delta_u) +
                                      problem.g.dot(sol.delta_u) + problem.cost_offset;
  result.diagnostics.qp_iterations = sol.iterations;
  result.diagnostics.converged = sol.converged;
  const Eigen::VectorXd u_seq = problem.u_offset + problem.C * sol.delta_u;
  int active = 0;
  for (Eigen::Index i = 0; i < u_seq.size(); ++i) {
    if (u_seq(i) <= problem.lower(i) + 1e-9 || u_seq(i) >= problem.upper(i) - 1e-9) ++active;
  }
  result.diagnostics.active_constraints = active;
  return result;
}

}  // namespace telc
