#ifndef FBGL_PIPELINE_HPP
#define FBGL_PIPELINE_HPP

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbgl/config.hpp"
#include "fbgl/estimator.hpp"
#include "fbgl/metrics.hpp"
#include "fbgl/simulator.hpp"

namespace fbgl {

// Actuator positions known to the controller at a frame.
struct ActuationSample {
  double time = 0.0;
  Eigen::VectorXd q;
};

struct Simulation {
  std::vector<FiberFrame> frames;
  std::vector<RobotTruth> truth;
  std::vector<ActuationSample> actuation;
  // Closed-form arc tip, or the disturbed noise-free shape while a contact
  // is active.
  std::vector<Eigen::Vector3d> endpoints;
};

// Deterministic for a given config (noise.seed included).
Simulation simulate(const ExperimentConfig& cfg);

struct EstimateRow {
  double time = 0.0;
  LengthMeasurement measurement;
  bool initialized = false;
  int mode = 0;  // 0 before initialization, 1 update, 2 predict only
  double filter_length = 0.0;
  Eigen::VectorXd jacobian;
  Eigen::Vector3d filter_endpoint = Eigen::Vector3d::Zero();
  double baseline_length = 0.0;
  Eigen::Vector3d baseline_endpoint = Eigen::Vector3d::Zero();
  CovarianceHealth<double> health{0.0, 0.0};
};

struct EstimateSeries {
  std::vector<EstimateRow> rows;
  std::size_t updates = 0;
  std::size_t rejected = 0;  // invalid measurements
  CovarianceHealth<double> worst_health{0.0, std::numeric_limits<double>::infinity()};
};

// Length sensor, model-free filter and model-based baseline over recorded
// frames. actuation[k] must carry the actuator positions at frames[k].
EstimateSeries estimate(std::span<const FiberFrame> frames,
                        std::span<const ActuationSample> actuation, const ExperimentConfig& cfg);

// One report per method ("model-based", "filter") over initialized rows.
std::vector<MetricsReport> evaluate(const Simulation& sim, const EstimateSeries& est,
                                    const std::string& task);

struct RunResult {
  Simulation simulation;
  EstimateSeries estimates;
  std::vector<MetricsReport> reports;
};

RunResult run_experiment(const ExperimentConfig& cfg);

void write_truth_csv(const Simulation& sim, std::ostream& out);
void write_actuation_csv(std::span<const ActuationSample> actuation, std::ostream& out);
std::vector<ActuationSample> read_actuation_csv(std::istream& in);
void write_estimate_csv(const EstimateSeries& est, Eigen::Index actuators, std::ostream& out);
// t,l_true,l_baseline,l_filter
void write_length_series_csv(const Simulation& sim, const EstimateSeries& est, std::ostream& out);
// t,baseline,filter (endpoint errors, mm), then dtheta/dphi per method in degrees
void write_endpoint_series_csv(const Simulation& sim, const EstimateSeries& est, std::ostream& out);

// Output file names inside an output directory.
namespace files {
inline constexpr const char* kFrames = "frames.csv";
inline constexpr const char* kTruth = "truth.csv";
inline constexpr const char* kActuation = "actuation.csv";
inline constexpr const char* kEstimate = "estimate.csv";
inline constexpr const char* kReport = "report.csv";
inline constexpr const char* kLengthSeries = "length_series.csv";
inline constexpr const char* kEndpointSeries = "endpoint_error_series.csv";
inline constexpr const char* kConfig = "config_used.ini";
}  // namespace files

void write_run_outputs(const RunResult& result, const ExperimentConfig& cfg,
                       const std::filesystem::path& dir);

}  // namespace fbgl

#endif  // FBGL_PIPELINE_HPP
