#ifndef FBGL_METRICS_HPP
#define FBGL_METRICS_HPP

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fbgl {

// Mean, population standard deviation and maximum of a series of absolute
// errors.
struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;
  double max = 0.0;
};

ErrorStats error_stats(std::span<const double> errors);

// Statistics of |est_t - truth_t|. Throws InvalidArgument on size mismatch.
ErrorStats length_error_stats(std::span<const double> estimate, std::span<const double> truth);

double endpoint_error(const Eigen::Vector3d& estimate, const Eigen::Vector3d& truth);

struct ShapeError {
  double total = 0.0;  // degrees
  double bend = 0.0;   // theta_est - theta_true, degrees
  double plane = 0.0;  // wrapped phi_est - phi_true, degrees
};

// Bend/plane angles of both endpoints under the constant-curvature model;
// total = sqrt(dtheta^2 + (sin(theta_true) dphi)^2).
ShapeError shape_error(const Eigen::Vector3d& estimate, const Eigen::Vector3d& truth);

struct MetricsReport {
  std::string task;
  std::string method;
  ErrorStats length;
  ErrorStats endpoint;
  ErrorStats shape;
  ErrorStats bend;   // |dtheta|, degrees
  ErrorStats plane;  // |dphi|, degrees
};

// task,method,length_mean,length_std,length_max,endpoint_mean,...,shape_max,
// bend_mean,...,plane_max
void write_report_csv(std::span<const MetricsReport> reports, std::ostream& out);

}  // namespace fbgl

#endif  // FBGL_METRICS_HPP
