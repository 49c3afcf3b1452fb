#include "fbgl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fbgl/errors.hpp"
#include "fbgl/geometry.hpp"

namespace fbgl {

Eigen::VectorXd RobotConfig::gainsAt(double t) const {
  if (gain_variation == 0.0) return gains;
  const double scale =
      1.0 + gain_variation * std::sin(2.0 * std::numbers::pi * t / gain_variation_period);
  return gains * scale;
}

double TrajectorySpec::effectiveDuration() const {
  if (duration > 0.0) return duration;
  switch (profile) {
    case Profile::Triangle:
      return 2.0 * period();
    case Profile::HoldExtendHold:
      return 2.0 * hold_time + stroke / velocity;
    case Profile::Excitation:
      return 25.0;
  }
  return 0.0;
}

double TrajectorySpec::targetLength(double t) const {
  const double bottom = start_length - stroke;
  switch (profile) {
    case Profile::Triangle: {
      const double p = period();
      const double phase = std::fmod(std::max(t, 0.0), p);
      const double travelled = phase < 0.5 * p ? velocity * phase : stroke - velocity * (phase - 0.5 * p);
      return start_length - std::clamp(travelled, 0.0, stroke);
    }
    case Profile::HoldExtendHold: {
      if (t <= hold_time) return bottom;
      return std::min(start_length, bottom + velocity * (t - hold_time));
    }
    case Profile::Excitation:
      break;
  }
  return start_length;
}

BendSegment TrajectorySpec::bendAt(double t) const {
  BendSegment active;
  for (const auto& seg : bend_schedule) {
    if (seg.start_time <= t) active = seg;
  }
  return active;
}

void validate(const RobotConfig& robot, const TrajectorySpec& traj) {
  if (robot.gains.size() < 1 || !robot.gains.allFinite()) {
    throw InvalidArgument("robot: gains must be finite and non-empty");
  }
  if (std::abs(robot.gains.sum()) < 1e-12) throw InvalidArgument("robot: gains sum to zero");
  if (!(robot.min_length > 0.0 && robot.min_length < robot.max_length)) {
    throw InvalidArgument("robot: need 0 < min_length < max_length");
  }
  if (!(robot.gain_variation_period > 0.0) || std::abs(robot.gain_variation) >= 1.0) {
    throw InvalidArgument("robot: gain variation must satisfy |a| < 1 with a positive period");
  }
  if (!(traj.velocity > 0.0)) throw InvalidArgument("trajectory: velocity must be > 0");
  if (!(traj.stroke > 0.0 && traj.stroke <= robot.max_length - robot.min_length)) {
    throw InvalidArgument("trajectory: stroke must lie in (0, l_max - l_min]");
  }
  if (traj.profile == Profile::Excitation) {
    if (traj.excitation_periods.size() != static_cast<std::size_t>(robot.actuators())) {
      throw InvalidArgument("trajectory: need one excitation period per actuator");
    }
    for (double p : traj.excitation_periods) {
      if (!(p > 0.0)) throw InvalidArgument("trajectory: excitation periods must be > 0");
    }
    if (robot.base_length < robot.min_length || robot.base_length > robot.max_length) {
      throw InvalidArgument("robot: base length outside [min_length, max_length]");
    }
  } else if (traj.start_length > robot.max_length ||
             traj.start_length - traj.stroke < robot.min_length) {
    throw InvalidArgument("trajectory: stroke leaves [min_length, max_length]");
  }
  if (traj.hold_time < 0.0) throw InvalidArgument("trajectory: hold time must be >= 0");
}

void validate(std::span<const DisturbanceEvent> events) {
  for (const auto& ev : events) {
    if (!(ev.start_time < ev.end_time)) throw InvalidArgument("disturbance: need t_start < t_end");
    if (ev.first_section > ev.last_section) {
      throw InvalidArgument("disturbance: need first_section <= last_section");
    }
    if (!std::isfinite(ev.curvature_offset)) {
      throw InvalidArgument("disturbance: curvature offset must be finite");
    }
  }
}

namespace {

Eigen::VectorXd actuation_at(const RobotConfig& robot, const TrajectorySpec& traj, double t) {
  const Eigen::Index n = robot.actuators();
  if (traj.profile == Profile::Excitation) {
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      q(i) = traj.excitation_amplitude *
             std::sin(2.0 * std::numbers::pi * t / traj.excitation_periods[static_cast<std::size_t>(i)]);
    }
    return q;
  }
  // Equal drive on every actuator.
  const Eigen::VectorXd g = robot.gainsAt(t);
  return Eigen::VectorXd::Constant(n, (traj.targetLength(t) - robot.base_length) / g.sum());
}

RobotTruth truth_at(const RobotConfig& robot, const TrajectorySpec& traj, double t) {
  RobotTruth s;
  s.time = t;
  s.q = actuation_at(robot, traj, t);
  s.qdot = Eigen::VectorXd::Zero(robot.actuators());
  s.gains = robot.gainsAt(t);
  s.base_length = robot.base_length;
  s.length = robot.base_length + s.gains.dot(s.q);
  const BendSegment bend = traj.bendAt(t);
  s.curvature = bend.curvature;
  s.plane = bend.plane;
  return s;
}

}  // namespace

RobotTruth initial_truth(const RobotConfig& robot, const TrajectorySpec& traj) {
  validate(robot, traj);
  return truth_at(robot, traj, 0.0);
}

RobotTruth robot_step(const RobotTruth& truth, const RobotConfig& robot,
                      const TrajectorySpec& traj, double t, double dt) {
  if (!(t >= 0.0) || !(dt > 0.0)) throw InvalidArgument("robot_step: need t >= 0 and dt > 0");
  RobotTruth next = truth_at(robot, traj, t + dt);
  next.qdot = (next.q - truth.q) / dt;
  return next;
}

std::size_t true_start_index(double length, const FiberConfig& fiber, const LengthDatum& datum) {
  const double offset = std::round((datum.length - length) / fiber.resolution);
  const double index = static_cast<double>(datum.index) + offset;
  if (!(index >= 0.0)) throw InvalidState("true_start_index: robot longer than the fiber allows");
  return static_cast<std::size_t>(index);
}

FiberFrame synth_frame(const RobotTruth& truth, const RobotConfig& robot,
                       const FiberConfig& fiber, const ChannelConfig& channel,
                       const LengthDatum& datum, const NoiseSpec& noise,
                       std::span<const DisturbanceEvent> events, double t, std::mt19937_64& rng) {
  if (!(truth.length >= robot.min_length && truth.length <= robot.max_length)) {
    throw InvalidState("synth_frame: length " + std::to_string(truth.length) +
                       " mm outside [l_min, l_max]");
  }
  const std::size_t m = fiber.sections;
  const std::size_t mu = true_start_index(truth.length, fiber, datum);
  if (mu < channel.window || mu + 1 >= m) {
    throw InvalidState("synth_frame: starting index " + std::to_string(mu) +
                       " leaves no channel window or robot section");
  }

  FiberFrame f;
  f.time = t;
  f.curvatures = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  f.twists = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  const auto first_channel = static_cast<Eigen::Index>(mu - channel.window);
  const auto robot_first = static_cast<Eigen::Index>(mu + 1);
  const auto robot_count = static_cast<Eigen::Index>(m - mu - 1);
  f.curvatures.segment(first_channel, static_cast<Eigen::Index>(channel.window_span()))
      .setConstant(channel.curvature);
  f.curvatures.segment(robot_first, robot_count).setConstant(truth.curvature);
  f.twists(robot_first) = wrap_angle(truth.plane);

  for (const auto& ev : events) {
    if (!ev.activeAt(t)) continue;
    const auto robot_sections = static_cast<std::size_t>(robot_count);
    if (ev.first_section >= robot_sections) continue;
    const std::size_t last = std::min(ev.last_section, robot_sections - 1);
    for (std::size_t k = ev.first_section; k <= last; ++k) {
      f.curvatures(static_cast<Eigen::Index>(m - 1 - k)) += ev.curvature_offset;
    }
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < f.curvatures.size(); ++i) {
    const double n = normal(rng);
    if (noise.curvature_sigma > 0.0) f.curvatures(i) += noise.curvature_sigma * n;
  }
  for (Eigen::Index i = 0; i < f.twists.size(); ++i) {
    const double n = normal(rng);
    if (noise.twist_sigma > 0.0) f.twists(i) += noise.twist_sigma * n;
  }
  return f;
}

Eigen::Vector3d true_endpoint(const RobotTruth& truth) {
  return cc_arc_endpoint(truth.curvature, truth.plane, truth.length);
}

}  // namespace fbgl
