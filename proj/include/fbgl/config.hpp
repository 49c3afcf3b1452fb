#ifndef FBGL_CONFIG_HPP
#define FBGL_CONFIG_HPP

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbgl/estimator.hpp"
#include "fbgl/fiber.hpp"
#include "fbgl/length_sensor.hpp"
#include "fbgl/simulator.hpp"

namespace fbgl {

struct FilterSettings {
  double process_noise_length = 1e-4;    // mm^2
  double process_noise_jacobian = 1e-6;
  double process_noise_drift = 1e-8;
  std::optional<double> measurement_variance;       // default (lambda/2)^2
  std::optional<double> initial_variance_length;    // default lambda^2
  std::optional<double> initial_variance_jacobian;  // default 0.25 |J0|^2
  double initial_variance_drift = 1e-4;
  std::optional<Eigen::VectorXd> initial_jacobian;  // default gains * (1 + jacobian_error)
  double jacobian_error = 0.2;
  std::optional<Eigen::VectorXd> baseline_jacobian;  // default initial_jacobian
  bool joseph_form = false;
};

struct RunSettings {
  std::string task = "task1";
  double rate = 20.0;  // Hz
  std::vector<double> velocities{3.0, 6.0, 12.0};  // mm/s, used by compare
};

struct ExperimentConfig {
  FiberConfig fiber;
  ChannelConfig channel = ChannelConfig::derive(FiberConfig{}, 1.0 / 30.0, std::numbers::pi / 3.0);
  LengthDatum datum = default_datum(FiberConfig{}, channel);
  FilterSettings filter;
  RobotConfig robot;
  TrajectorySpec trajectory;
  NoiseSpec noise;
  std::vector<DisturbanceEvent> disturbances;
  RunSettings run;

  double dt() const { return 1.0 / run.rate; }
  Eigen::VectorXd initialJacobian() const;
  Eigen::VectorXd baselineJacobian() const;
  FilterConfigd filterConfig() const;
};

// Parses "[section]" headers and "key = value" lines ('#' and ';' start
// comments). Unknown sections or keys, malformed values and failed
// validation raise ConfigError naming the key and line.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

// Cross-field checks; throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

// Writes a config that parse_config reads back to the same experiment.
void write_config(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace fbgl

#endif  // FBGL_CONFIG_HPP
