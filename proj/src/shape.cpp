#include "fbgl/shape.hpp"

#include <cmath>
#include <string>

#include "fbgl/errors.hpp"

namespace fbgl {

RobotArcs robot_arcs(const FiberFrame& frame, const FiberConfig& fiber, std::size_t start_index,
                     double length) {
  const std::size_t m = frame.sections();
  if (start_index + 1 >= m) {
    throw InvalidArgument("robot_arcs: no robot sections above index " +
                          std::to_string(start_index));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw DegenerateInput("robot_arcs: robot length must be positive");
  }
  const double lambda = fiber.resolution;
  const std::size_t available = m - 1 - start_index;
  std::size_t used = available;
  if (length <= static_cast<double>(available - 1) * lambda) {
    used = static_cast<std::size_t>(std::ceil(length / lambda));
    if (used == 0) used = 1;
  }
  const std::size_t first = m - used;

  RobotArcs out;
  // A match one section late would otherwise lose the twist carried by the
  // first robot section.
  double dropped_twist = 0.0;
  for (std::size_t s = start_index; s < first; ++s) {
    dropped_twist += frame.twists(static_cast<Eigen::Index>(s));
  }
  out.base = Transformd::fromRotation(rotZ(dropped_twist));

  out.arcs.reserve(used);
  for (std::size_t s = first; s < m; ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    out.arcs.push_back({frame.curvatures(i), frame.twists(i), lambda});
  }
  out.arcs.front().arc_length = length - static_cast<double>(used - 1) * lambda;
  return out;
}

std::vector<Transformd> reconstruct_robot(const FiberFrame& frame, const FiberConfig& fiber,
                                          std::size_t start_index, double length) {
  const RobotArcs r = robot_arcs(frame, fiber, start_index, length);
  return reconstruct_shape(r.arcs, r.base);
}

Eigen::Vector3d sense_endpoint(const FiberFrame& frame, const FiberConfig& fiber,
                               std::size_t start_index, double length) {
  return reconstruct_robot(frame, fiber, start_index, length).back().translation;
}

}  // namespace fbgl
