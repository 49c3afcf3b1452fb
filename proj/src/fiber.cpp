#include "fbgl/fiber.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "fbgl/csv.hpp"
#include "fbgl/errors.hpp"

namespace fbgl {

namespace csv {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view field, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  if (field.empty()) throw ParseError(line, "empty numeric field");
  double value = 0.0;
  const char* first = field.data();
  if (*first == '+') ++first;
  auto res = std::from_chars(first, field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParseError(line, "not a number: '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view row, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = row.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(row.substr(start));
      return out;
    }
    out.push_back(row.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& fields, char delim) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += delim;
    out += fields[i];
  }
  return out;
}

}  // namespace csv

ChannelConfig ChannelConfig::derive(const FiberConfig& fiber, double curvature,
                                    double bend_angle) {
  ChannelConfig c;
  c.curvature = curvature;
  c.bend_angle = bend_angle;
  c.arc_length = bend_angle / curvature;
  c.window = static_cast<std::size_t>(std::lround(c.arc_length / fiber.resolution));
  c.max_length = fiber.total_length() - c.arc_length;
  c.match_tolerance = 0.25 * curvature * static_cast<double>(c.window_span());
  c.max_index_jump = 3;
  return c;
}

void validate_geometry(const FiberConfig& fiber, const ChannelConfig& channel) {
  auto fail = [](const std::string& what) { throw InconsistentGeometry(what); };
  const double lambda = fiber.resolution;

  if (!(std::isfinite(lambda) && lambda > 0.0)) fail("fiber resolution lambda must be > 0");
  if (fiber.sections < 2) fail("fiber sections M must be >= 2");
  if (!(std::isfinite(channel.curvature) && channel.curvature > 0.0)) {
    fail("channel curvature kappa_c must be > 0");
  }
  if (!(channel.bend_angle > 0.0 && channel.bend_angle <= std::numbers::pi)) {
    fail("channel bend angle beta_c must lie in (0, pi]");
  }
  const double expected_arc = channel.bend_angle / channel.curvature;
  if (!(std::abs(channel.arc_length - expected_arc) <= 1e-9 * expected_arc)) {
    fail("channel arc length l_c != beta_c / kappa_c");
  }
  if (channel.window < 2) fail("channel window L_c must be >= 2");
  if (channel.window != static_cast<std::size_t>(std::lround(channel.arc_length / lambda))) {
    fail("channel window L_c != round(l_c / lambda)");
  }
  if (channel.window_span() > fiber.sections) fail("channel window longer than the fiber");
  if (!(channel.max_length > 0.0)) fail("maximum length l_max must be > 0");
  const double gap = channel.max_length + channel.arc_length - fiber.total_length();
  if (!(std::abs(gap) <= lambda)) {
    fail("l_max + l_c = M * lambda violated by " + csv::format_number(gap) + " mm");
  }
  if (!(channel.match_tolerance > 0.0)) fail("match tolerance epsilon_match must be > 0");
}

bool FiberFrame::isValid(std::size_t expected_sections) const {
  return std::isfinite(time) && sections() == expected_sections &&
         static_cast<std::size_t>(twists.size()) == expected_sections && curvatures.allFinite() &&
         twists.allFinite();
}

bool operator==(const FiberFrame& a, const FiberFrame& b) {
  return a.time == b.time && a.curvatures.size() == b.curvatures.size() &&
         a.twists.size() == b.twists.size() && a.curvatures == b.curvatures &&
         a.twists == b.twists;
}

void write_frames(std::span<const FiberFrame> frames, std::size_t sections, std::ostream& out) {
  std::string header = "t";
  for (std::size_t i = 0; i < sections; ++i) header += ",kappa_" + std::to_string(i);
  for (std::size_t i = 0; i < sections; ++i) header += ",tau_" + std::to_string(i);
  out << header << '\n';

  for (const auto& f : frames) {
    if (f.sections() != sections || static_cast<std::size_t>(f.twists.size()) != sections) {
      throw InvalidArgument("write_frames: frame section count does not match header");
    }
    std::string row = csv::format_number(f.time);
    for (Eigen::Index i = 0; i < f.curvatures.size(); ++i) {
      row += ',' + csv::format_number(f.curvatures(i));
    }
    for (Eigen::Index i = 0; i < f.twists.size(); ++i) row += ',' + csv::format_number(f.twists(i));
    out << row << '\n';
  }
}

std::vector<FiberFrame> read_frames(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(lineno, "missing frame header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = csv::split(line);
  if (header.empty() || header.front() != "t" || header.size() % 2 != 1 || header.size() < 3) {
    throw ParseError(lineno, "frame header must be t,kappa_0..,tau_0..");
  }
  const std::size_t sections = (header.size() - 1) / 2;
  for (std::size_t i = 0; i < sections; ++i) {
    if (header[1 + i] != "kappa_" + std::to_string(i) ||
        header[1 + sections + i] != "tau_" + std::to_string(i)) {
      throw ParseError(lineno, "unexpected frame header column");
    }
  }

  std::vector<FiberFrame> frames;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " columns, got " +
                                   std::to_string(fields.size()));
    }
    FiberFrame f;
    f.time = csv::parse_number(fields[0], lineno);
    f.curvatures.resize(static_cast<Eigen::Index>(sections));
    f.twists.resize(static_cast<Eigen::Index>(sections));
    for (std::size_t i = 0; i < sections; ++i) {
      f.curvatures(static_cast<Eigen::Index>(i)) = csv::parse_number(fields[1 + i], lineno);
      f.twists(static_cast<Eigen::Index>(i)) = csv::parse_number(fields[1 + sections + i], lineno);
    }
    if (!f.isValid(sections)) throw ParseError(lineno, "non-finite value in frame");
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_frames_file(std::span<const FiberFrame> frames, std::size_t sections,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_frames(frames, sections, out);
}

std::vector<FiberFrame> read_frames_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path);
  return read_frames(in);
}

}  // namespace fbgl
