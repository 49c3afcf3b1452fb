#ifndef FBGL_LENGTH_SENSOR_HPP
#define FBGL_LENGTH_SENSOR_HPP

#include <Eigen/Core>

#include <cstddef>
#include <optional>

#include "fbgl/fiber.hpp"

namespace fbgl {

// Known (starting index, length) pair anchoring the index-to-length map.
// {0, l_max} reproduces l_e = l_max - lambda * mu.
struct LengthDatum {
  std::size_t index = 0;
  double length = 0.0;  // mm
};

struct LengthMeasurement {
  std::size_t start_index = 0;    // mu, last section inside the channel
  double effective_length = 0.0;  // l_e, mm
  double residual = 0.0;          // matching cost at mu
  bool valid = false;
  double time = 0.0;  // s
};

// |sum_{i = mu - L_c}^{mu} kappa_i - kappa_c (L_c + 1)|.
// Throws InvalidArgument unless mu lies in [L_c, M - 1].
double matching_cost(const Eigen::Ref<const Eigen::VectorXd>& curvatures, std::size_t index,
                     const ChannelConfig& channel);

// Costs closer than this (relative to kappa_c (L_c + 1)) count as ties.
inline constexpr double kMatchTieTolerance = 1e-12;

// Scans every admissible window and returns the best match. The result is
// invalid when its residual exceeds the channel's match tolerance or when it
// jumps more than max_index_jump sections from prev (the last valid match).
LengthMeasurement match_channel_index(const FiberFrame& frame, const FiberConfig& fiber,
                                      const ChannelConfig& channel, const LengthDatum& datum,
                                      const std::optional<LengthMeasurement>& prev);

// l_e = datum.length - lambda (mu - datum.index). Throws InconsistentGeometry
// when the result is negative.
double effective_length(std::size_t index, double resolution, const LengthDatum& datum);

// Datum placing the channel at the proximal end of the fiber and the robot on
// the remaining M - 1 - L_c sections.
LengthDatum default_datum(const FiberConfig& fiber, const ChannelConfig& channel);

}  // namespace fbgl

#endif  // FBGL_LENGTH_SENSOR_HPP
