#include "fbgl/length_sensor.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fbgl/errors.hpp"

namespace fbgl {

double matching_cost(const Eigen::Ref<const Eigen::VectorXd>& curvatures, std::size_t index,
                     const ChannelConfig& channel) {
  const auto sections = static_cast<std::size_t>(curvatures.size());
  if (index < channel.window || index >= sections) {
    throw InvalidArgument("matching_cost: index " + std::to_string(index) + " outside [" +
                          std::to_string(channel.window) + ", " + std::to_string(sections) +
                          ")");
  }
  const auto span = static_cast<Eigen::Index>(channel.window_span());
  const auto first = static_cast<Eigen::Index>(index - channel.window);
  const double sum = curvatures.segment(first, span).sum();
  return std::abs(sum - channel.curvature * static_cast<double>(span));
}

LengthMeasurement match_channel_index(const FiberFrame& frame, const FiberConfig& fiber,
                                      const ChannelConfig& channel, const LengthDatum& datum,
                                      const std::optional<LengthMeasurement>& prev) {
  const std::size_t sections = frame.sections();
  LengthMeasurement m;
  m.time = frame.time;
  if (sections < channel.window_span()) {
    m.valid = false;
    m.residual = std::numeric_limits<double>::infinity();
    m.effective_length = std::numeric_limits<double>::quiet_NaN();
    return m;
  }

  const double tie = kMatchTieTolerance * channel.curvature *
                     static_cast<double>(channel.window_span());
  std::size_t best = channel.window;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t mu = channel.window; mu < sections; ++mu) {
    const double cost = matching_cost(frame.curvatures, mu, channel);
    if (cost < best_cost - tie) {
      best = mu;
      best_cost = cost;
    }
  }
  if (prev && prev->start_index >= channel.window && prev->start_index < sections &&
      prev->start_index != best) {
    const double prev_cost = matching_cost(frame.curvatures, prev->start_index, channel);
    if (prev_cost <= best_cost + tie) {
      best = prev->start_index;
      best_cost = prev_cost;
    }
  }

  m.start_index = best;
  m.residual = best_cost;
  m.valid = std::isfinite(best_cost) && best_cost <= channel.match_tolerance;
  if (m.valid && prev) {
    const std::size_t jump =
        best > prev->start_index ? best - prev->start_index : prev->start_index - best;
    m.valid = jump <= channel.max_index_jump;
  }

  const double le =
      datum.length - fiber.resolution * (static_cast<double>(best) - static_cast<double>(datum.index));
  if (le < 0.0) {
    m.valid = false;
    m.effective_length = std::numeric_limits<double>::quiet_NaN();
  } else {
    m.effective_length = le;
  }
  return m;
}

double effective_length(std::size_t index, double resolution, const LengthDatum& datum) {
  const double le =
      datum.length - resolution * (static_cast<double>(index) - static_cast<double>(datum.index));
  if (le < 0.0) {
    throw InconsistentGeometry("effective length negative at index " + std::to_string(index));
  }
  return le;
}

LengthDatum default_datum(const FiberConfig& fiber, const ChannelConfig& channel) {
  const std::size_t robot_sections = fiber.sections - 1 - channel.window;
  return {channel.window, static_cast<double>(robot_sections) * fiber.resolution};
}

}  // namespace fbgl
