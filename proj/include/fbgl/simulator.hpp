#ifndef FBGL_SIMULATOR_HPP
#define FBGL_SIMULATOR_HPP

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fbgl/fiber.hpp"
#include "fbgl/length_sensor.hpp"

namespace fbgl {

// Extensible single-section soft robot. Its true length is
//
//   l = base_length + g(t) . q
//
// with g(t) = gains * (1 + gain_variation * sin(2 pi t / gain_variation_period)).
struct RobotConfig {
  Eigen::VectorXd gains = (Eigen::VectorXd(3) << 0.30, 0.35, 0.40).finished();  // mm/mm
  double base_length = 90.0;  // l0, mm, length at q = 0
  double min_length = 60.0;   // mm
  double max_length = 112.2;  // mm
  double gain_variation = 0.0;
  double gain_variation_period = 60.0;  // s

  Eigen::Index actuators() const { return gains.size(); }
  Eigen::VectorXd gainsAt(double t) const;
};

enum class Profile {
  Triangle,         // compress by stroke at v, extend back, repeat
  HoldExtendHold,   // start compressed, hold, extend by stroke at v, hold
  Excitation,       // independent sinusoids per actuator
};

// Piecewise-constant deflection: active from start_time until the next entry.
struct BendSegment {
  double start_time = 0.0;  // s
  double curvature = 0.0;   // kappa_r, 1/mm
  double plane = 0.0;       // phi_r, rad
};

struct TrajectorySpec {
  Profile profile = Profile::Triangle;
  double velocity = 3.0;       // mm/s, length rate while moving
  double stroke = 30.0;        // mm
  double start_length = 105.0; // mm, top of the stroke
  double duration = 0.0;       // s, 0 selects two full periods
  double hold_time = 2.0;      // s, HoldExtendHold only
  double excitation_amplitude = 20.0;  // mm per actuator
  std::vector<double> excitation_periods{3.1, 4.3, 5.7};  // s, one per actuator
  std::vector<BendSegment> bend_schedule;

  double period() const { return 2.0 * stroke / velocity; }
  double effectiveDuration() const;
  // Commanded robot length for Triangle/HoldExtendHold.
  double targetLength(double t) const;
  BendSegment bendAt(double t) const;
};

// Curvature bump on robot sections while start_time <= t < end_time.
// Section indices count from the robot tip (0 = last fiber section) and are
// clipped to the sections currently on the robot.
struct DisturbanceEvent {
  double start_time = 0.0;
  double end_time = 0.0;
  std::size_t first_section = 0;
  std::size_t last_section = 0;
  double curvature_offset = 0.0;  // 1/mm

  bool activeAt(double t) const { return start_time <= t && t < end_time; }
};

struct NoiseSpec {
  double curvature_sigma = 0.05 / 30.0;  // 1/mm
  double twist_sigma = 0.01;             // rad
  std::uint64_t seed = 42;
};

struct RobotTruth {
  double time = 0.0;
  Eigen::VectorXd q;     // mm
  Eigen::VectorXd qdot;  // mm/s
  double length = 0.0;   // l_true, mm
  double curvature = 0.0;  // kappa_r
  double plane = 0.0;      // phi_r
  Eigen::VectorXd gains;   // true length Jacobian at time
  double base_length = 0.0;
};

void validate(const RobotConfig& robot, const TrajectorySpec& traj);
void validate(std::span<const DisturbanceEvent> events);

RobotTruth initial_truth(const RobotConfig& robot, const TrajectorySpec& traj);

// Advances from t to t + dt.
RobotTruth robot_step(const RobotTruth& truth, const RobotConfig& robot,
                      const TrajectorySpec& traj, double t, double dt);

// mu = datum.index + round((datum.length - l) / lambda).
std::size_t true_start_index(double length, const FiberConfig& fiber, const LengthDatum& datum);

// Channel sections [mu - L_c, mu] carry kappa_c, robot sections (mu, M-1]
// carry kappa_r, the first robot section carries twist phi_r and everything
// else is zero. Disturbances and then Gaussian noise are added; the rng
// always consumes 2M normal draws.
FiberFrame synth_frame(const RobotTruth& truth, const RobotConfig& robot,
                       const FiberConfig& fiber, const ChannelConfig& channel,
                       const LengthDatum& datum, const NoiseSpec& noise,
                       std::span<const DisturbanceEvent> events, double t, std::mt19937_64& rng);

// Tip position under the constant-curvature model.
Eigen::Vector3d true_endpoint(const RobotTruth& truth);

}  // namespace fbgl

#endif  // FBGL_SIMULATOR_HPP
