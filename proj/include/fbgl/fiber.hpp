#ifndef FBGL_FIBER_HPP
#define FBGL_FIBER_HPP

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace fbgl {

// FBG array discretization. Sections are indexed 0..sections-1 from the free
// (proximal) end of the fiber; the last section is fixed at the robot tip.
struct FiberConfig {
  std::size_t sections = 45;  // M
  double resolution = 3.3;    // lambda, mm; also the section arc length

  double section_length() const { return resolution; }
  double total_length() const { return static_cast<double>(sections) * resolution; }
};

// Rigid curved channel at the robot base plus the matcher thresholds.
struct ChannelConfig {
  double curvature = 1.0 / 30.0;                // kappa_c, 1/mm
  double bend_angle = std::numbers::pi / 3.0;   // beta_c, rad
  double arc_length = 0.0;                      // l_c = beta_c / kappa_c, mm
  std::size_t window = 0;                       // L_c = round(l_c / lambda)
  double max_length = 0.0;                      // l_max = M lambda - l_c, mm
  double match_tolerance = 0.0;                 // epsilon_match, (1/mm) * sections
  std::size_t max_index_jump = 3;               // mu_jump_max, sections

  // Fills every derived field from curvature and bend angle.
  static ChannelConfig derive(const FiberConfig& fiber, double curvature, double bend_angle);

  // Number of sections summed by the matching window (L_c + 1).
  std::size_t window_span() const { return window + 1; }
};

// Throws InconsistentGeometry naming the first violated relation.
void validate_geometry(const FiberConfig& fiber, const ChannelConfig& channel);

// One interrogation sample of the whole fiber.
struct FiberFrame {
  double time = 0.0;         // s
  Eigen::VectorXd curvatures;  // 1/mm, one per section
  Eigen::VectorXd twists;      // rad, one per section

  std::size_t sections() const { return static_cast<std::size_t>(curvatures.size()); }
  bool isValid(std::size_t expected_sections) const;
};

bool operator==(const FiberFrame& a, const FiberFrame& b);

// Frame files: header "t,kappa_0..kappa_{M-1},tau_0..tau_{M-1}", one frame per
// row, 17 significant digits, LF line endings.
void write_frames(std::span<const FiberFrame> frames, std::size_t sections, std::ostream& out);
std::vector<FiberFrame> read_frames(std::istream& in);

void write_frames_file(std::span<const FiberFrame> frames, std::size_t sections,
                       const std::string& path);
std::vector<FiberFrame> read_frames_file(const std::string& path);

}  // namespace fbgl

#endif  // FBGL_FIBER_HPP
