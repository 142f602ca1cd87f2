#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "telc/types.hpp"

namespace telc {

enum class Direction { kForward, kReverse };

/// One piece of a segment-composed path: constant reference controls held for
/// a duration. nu_mps must be nonzero (the error model loses controllability
/// and the feedforward curvature collapses at nu_r = 0).
struct PathSegment {
  double duration_s = 0.0;
  double nu_mps = 0.0;
  double omega_radps = 0.0;
};

/// One time-indexed point of the target trajectory.
struct ReferenceSample {
  double x = 0.0;          // m
  double y = 0.0;          // m
  double theta = 0.0;      // rad, in (-pi, pi]
  double nu = 0.0;         // m/s, reference control held over [t_i, t_i + t_step)
  double omega = 0.0;      // rad/s
  Direction direction = Direction::kForward;
};

/// Fixed-step reference trajectory. Consecutive samples satisfy the exact
/// constant-twist unicycle recurrence under their own reference controls.
class ReferenceTrajectory {
 public:
  ReferenceTrajectory(std::vector<ReferenceSample> samples, double t_start, double t_step);

  double t_start() const { return t_start_; }
  double t_step() const { return t_step_; }
  double t_end() const { return t_start_ + t_step_ * static_cast<double>(samples_.size() - 1); }
  double duration() const { return t_end() - t_start(); }

  std::size_t size() const { return samples_.size(); }
  const ReferenceSample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<ReferenceSample>& samples() const { return samples_; }

  /// Step index of the sample holding at time t (zero-order hold).
  /// Throws OutOfRange for t outside [t_start, t_end].
  std::size_t index_at(double t) const;

  /// Zero-order-hold lookup: the sample at the enclosing step index.
  const ReferenceSample& sample_at(double t) const { return samples_[index_at(t)]; }

 private:
  std::vector<ReferenceSample> samples_;
  double t_start_ = 0.0;
  double t_step_ = 0.0;
};

/// Integrates the unicycle model under piecewise-constant reference controls.
/// The segment active at a step's start time governs the whole step; each step
/// uses the exact constant-twist solution, so the trajectory is self-consistent
/// with its own (nu_r, omega_r) to machine precision.
/// Throws EmptySegmentList, NonPositiveStep, ZeroReferenceVelocity.
ReferenceTrajectory build_trajectory(std::span<const PathSegment> segments,
                                     const Pose& initial_pose, double t_step);

/// Recovers reference controls from a tabulated twice-differentiable curve:
///   nu_r    = +-sqrt(xdot^2 + ydot^2)         (sign per direction)
///   theta_r = atan2(ydot, xdot) + gamma*pi    (wrapped)
///   omega_r = (xdot yddot - ydot xddot) / (xdot^2 + ydot^2)
/// Derivatives by central differences at t_step (one-sided at the endpoints).
/// Throws DegenerateVelocity if the speed drops below 1e-9 anywhere.
std::vector<ReferenceSample> reference_controls_from_curve(std::span<const double> x,
                                                           std::span<const double> y,
                                                           double t_step,
                                                           Direction direction);

/// Exact pose advance under constant (nu, omega) over dt (constant-twist arc;
/// straight-line limit below |omega| = 1e-12). Heading wrapped to (-pi, pi].
Pose unicycle_step_exact(const Pose& pose, double nu, double omega, double dt);

}  // namespace telc
