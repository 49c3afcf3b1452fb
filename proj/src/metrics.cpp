#include "fbgl/metrics.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "fbgl/csv.hpp"
#include "fbgl/errors.hpp"
#include "fbgl/geometry.hpp"

namespace fbgl {

ErrorStats error_stats(std::span<const double> errors) {
  ErrorStats s;
  if (errors.empty()) return s;
  double sum = 0.0;
  for (double e : errors) {
    const double a = std::abs(e);
    sum += a;
    if (a > s.max) s.max = a;
  }
  s.mean = sum / static_cast<double>(errors.size());
  double var = 0.0;
  for (double e : errors) {
    const double d = std::abs(e) - s.mean;
    var += d * d;
  }
  s.std = std::sqrt(var / static_cast<double>(errors.size()));
  return s;
}

ErrorStats length_error_stats(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) {
    throw InvalidArgument("length_error_stats: series lengths differ");
  }
  std::vector<double> err(estimate.size());
  for (std::size_t i = 0; i < err.size(); ++i) err[i] = std::abs(estimate[i] - truth[i]);
  return error_stats(err);
}

double endpoint_error(const Eigen::Vector3d& estimate, const Eigen::Vector3d& truth) {
  return (estimate - truth).norm();
}

ShapeError shape_error(const Eigen::Vector3d& estimate, const Eigen::Vector3d& truth) {
  constexpr double kDeg = 180.0 / std::numbers::pi;
  const auto est = cc_angles_from_endpoint(estimate);
  const auto tru = cc_angles_from_endpoint(truth);
  const double dtheta = est.bend - tru.bend;
  const double dphi = wrap_angle(est.plane - tru.plane);
  const double weighted = std::sin(tru.bend) * dphi;
  return {std::hypot(dtheta, weighted) * kDeg, dtheta * kDeg, dphi * kDeg};
}

void write_report_csv(std::span<const MetricsReport> reports, std::ostream& out) {
  out << "task,method";
  for (const char* metric : {"length", "endpoint", "shape", "bend", "plane"}) {
    out << ',' << metric << "_mean," << metric << "_std," << metric << "_max";
  }
  out << '\n';
  for (const auto& r : reports) {
    out << r.task << ',' << r.method;
    for (const ErrorStats* s : {&r.length, &r.endpoint, &r.shape, &r.bend, &r.plane}) {
      out << ',' << csv::format_number(s->mean) << ',' << csv::format_number(s->std) << ','
          << csv::format_number(s->max);
    }
    out << '\n';
  }
}

}  // namespace fbgl
