#include "telc/reference.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>

#include "telc/angles.hpp"
#include "telc/errors.hpp"

namespace telc {

namespace {
constexpr double kBoundaryEps = 1e-9;   // s, guard for grid/boundary comparisons
constexpr double kStraightOmega = 1e-12;
}  // namespace

Pose unicycle_step_exact(const Pose& pose, double nu, double omega, double dt) {
  const double theta_new = pose.theta + omega * dt;
  Pose out;
  if (std::abs(omega) < kStraightOmega) {
    out.x = pose.x + nu * dt * std::cos(pose.theta);
    out.y = pose.y + nu * dt * std::sin(pose.theta);
  } else {
    const double r = nu / omega;
    out.x = pose.x + r * (std::sin(theta_new) - std::sin(pose.theta));
    out.y = pose.y - r * (std::cos(theta_new) - std::cos(pose.theta));
  }
  out.theta = wrap_angle(theta_new);
  return out;
}

ReferenceTrajectory::ReferenceTrajectory(std::vector<ReferenceSample> samples, double t_start,
                                         double t_step)
    : samples_(std::move(samples)), t_start_(t_start), t_step_(t_step) {
  if (samples_.empty()) throw EmptySegmentList();
  if (!(t_step_ > 0.0)) throw NonPositiveStep();
}

std::size_t ReferenceTrajectory::index_at(double t) const {
  const double rel = (t - t_start_) / t_step_;
  if (rel < -kBoundaryEps || rel > static_cast<double>(samples_.size() - 1) + kBoundaryEps) {
    throw OutOfRange("sample time outside trajectory span");
  }
  const auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(rel + kBoundaryEps)));
  return std::min(idx, samples_.size() - 1);
}

ReferenceTrajectory build_trajectory(std::span<const PathSegment> segments,
                                     const Pose& initial_pose, double t_step) {
  if (segments.empty()) throw EmptySegmentList();
  if (!(t_step > 0.0)) throw NonPositiveStep();
  double total = 0.0;
  for (const auto& seg : segments) {
    if (!(seg.duration_s > 0.0)) throw ConfigError("segment duration must be positive");
    if (seg.nu_mps == 0.0) throw ZeroReferenceVelocity();
    total += seg.duration_s;
  }

  const auto n_steps = static_cast<std::size_t>(std::ceil(total / t_step - kBoundaryEps));

  // Cumulative segment end times; the segment active at a step's start time
  // governs the whole step, and controls hold past the last boundary.
  std::vector<double> ends(segments.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    acc += segments[i].duration_s;
    ends[i] = acc;
  }
  auto segment_at = [&](double t) -> const PathSegment& {
    for (std::size_t i = 0; i < ends.size(); ++i) {
      if (t < ends[i] - kBoundaryEps) return segments[i];
    }
    return segments.back();
  };

  std::vector<ReferenceSample> samples;
  samples.reserve(n_steps + 1);
  Pose pose = initial_pose;
  pose.theta = wrap_angle(pose.theta);
  for (std::size_t i = 0; i <= n_steps; ++i) {
    const double t = static_cast<double>(i) * t_step;
    const PathSegment& seg = segment_at(t);
    const Direction dir = seg.nu_mps >= 0.0 ? Direction::kForward : Direction::kReverse;
    samples.push_back({pose.x, pose.y, pose.theta, seg.nu_mps, seg.omega_radps, dir});
    pose = unicycle_step_exact(pose, seg.nu_mps, seg.omega_radps, t_step);
  }
  return ReferenceTrajectory(std::move(samples), 0.0, t_step);
}

std::vector<ReferenceSample> reference_controls_from_curve(std::span<const double> x,
                                                           std::span<const double> y,
                                                           double t_step,
                                                           Direction direction) {
  if (x.size() != y.size()) throw DimensionMismatch("curve coordinate arrays differ in length");
  if (x.size() < 3) throw DimensionMismatch("curve needs at least 3 samples");
  if (!(t_step > 0.0)) throw NonPositiveStep();

  const std::size_t n = x.size();
  const double h = t_step;
  auto d1 = [&](std::span<const double> f, std::size_t i) {
    if (i == 0) return (f[1] - f[0]) / h;
    if (i == n - 1) return (f[n - 1] - f[n - 2]) / h;
    return (f[i + 1] - f[i - 1]) / (2.0 * h);
  };
  auto d2 = [&](std::span<const double> f, std::size_t i) {
    const std::size_t c = i == 0 ? 1 : (i == n - 1 ? n - 2 : i);
    return (f[c + 1] - 2.0 * f[c] + f[c - 1]) / (h * h);
  };

  const double sign = direction == Direction::kForward ? 1.0 : -1.0;
  const double gamma_pi = direction == Direction::kForward ? 0.0 : M_PI;

  std::vector<ReferenceSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xd = d1(x, i), yd = d1(y, i);
    const double xdd = d2(x, i), ydd = d2(y, i);
    const double speed_sq = xd * xd + yd * yd;
    if (speed_sq < 1e-18) {
      throw DegenerateVelocity("curve speed below 1e-9; reference velocity must be nonzero");
    }
    ReferenceSample s;
    s.x = x[i];
    s.y = y[i];
    s.nu = sign * std::sqrt(speed_sq);
    s.theta = wrap_angle(std::atan2(yd, xd) + gamma_pi);
    s.omega = (xd * ydd - yd * xdd) / speed_sq;
    s.direction = direction;
    out.push_back(s);
  }
  return out;
}

}  // namespace telc
