#ifndef FBGL_SHAPE_HPP
#define FBGL_SHAPE_HPP

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "fbgl/fiber.hpp"
#include "fbgl/geometry.hpp"

namespace fbgl {

struct RobotArcs {
  Transformd base;  // twist of the last channel section and of dropped sections
  std::vector<SectionArcd> arcs;
};

// Sections above start_index that span exactly `length` mm ending at the tip.
// Distal sections keep their nominal arc length; the proximal-most used
// section absorbs the remainder, so the chain length is continuous in length.
RobotArcs robot_arcs(const FiberFrame& frame, const FiberConfig& fiber, std::size_t start_index,
                     double length);

std::vector<Transformd> reconstruct_robot(const FiberFrame& frame, const FiberConfig& fiber,
                                          std::size_t start_index, double length);

Eigen::Vector3d sense_endpoint(const FiberFrame& frame, const FiberConfig& fiber,
                               std::size_t start_index, double length);

}  // namespace fbgl

#endif  // FBGL_SHAPE_HPP
