#include "fbgl/config.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>

#include "fbgl/csv.hpp"
#include "fbgl/errors.hpp"

namespace fbgl {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Entry {
  std::string key;
  std::string value;
  std::size_t line;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"fiber", {"sections", "resolution"}},
      {"channel",
       {"curvature", "bend_angle_deg", "window", "max_length", "match_tolerance",
        "max_index_jump", "datum_index", "datum_length"}},
      {"filter",
       {"process_noise_length", "process_noise_jacobian", "process_noise_drift",
        "measurement_variance", "initial_variance_length", "initial_variance_jacobian",
        "initial_variance_drift", "initial_jacobian", "jacobian_error", "baseline_jacobian",
        "joseph_form"}},
      {"robot",
       {"gains", "base_length", "min_length", "max_length", "gain_variation",
        "gain_variation_period"}},
      {"trajectory",
       {"profile", "velocity", "stroke", "start_length", "duration", "hold_time",
        "excitation_amplitude", "excitation_periods", "bend"}},
      {"noise", {"curvature_sigma", "twist_sigma", "seed"}},
      {"disturbances", {"event"}},
      {"run", {"task", "rate", "velocities"}},
  };
  return keys;
}

bool repeatable(const std::string& qualified) {
  return qualified == "trajectory.bend" || qualified == "disturbances.event";
}

class Reader {
 public:
  explicit Reader(std::map<std::string, std::vector<Entry>> entries) : entries_(std::move(entries)) {}

  const Entry* find(const std::string& qualified) const {
    auto it = entries_.find(qualified);
    return it == entries_.end() ? nullptr : &it->second.back();
  }

  const std::vector<Entry>* all(const std::string& qualified) const {
    auto it = entries_.find(qualified);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::optional<double> number(const std::string& k) const {
    const Entry* e = find(k);
    if (!e) return std::nullopt;
    return to_number(k, *e, e->value);
  }

  std::optional<std::size_t> count(const std::string& k) const {
    auto v = number(k);
    if (!v) return std::nullopt;
    if (*v < 0.0 || std::floor(*v) != *v) {
      throw ConfigError(k, find(k)->line, "expected a non-negative integer");
    }
    return static_cast<std::size_t>(*v);
  }

  std::optional<std::vector<double>> list(const std::string& k) const {
    const Entry* e = find(k);
    if (!e) return std::nullopt;
    return to_list(k, *e);
  }

  std::optional<bool> flag(const std::string& k) const {
    const Entry* e = find(k);
    if (!e) return std::nullopt;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw ConfigError(k, e->line, "expected true or false, got '" + e->value + "'");
  }

  static double to_number(const std::string& k, const Entry& e, std::string_view text) {
    try {
      const double v = csv::parse_number(text, e.line);
      if (!std::isfinite(v)) throw ConfigError(k, e.line, "value must be finite");
      return v;
    } catch (const ParseError&) {
      throw ConfigError(k, e.line, "expected a number, got '" + std::string(text) + "'");
    }
  }

  static std::vector<double> to_list(const std::string& k, const Entry& e) {
    std::vector<double> out;
    for (auto field : csv::split(e.value)) out.push_back(to_number(k, e, field));
    return out;
  }

 private:
  std::map<std::string, std::vector<Entry>> entries_;
};

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::size_t line_of(const Reader& r, const std::string& k) {
  const Entry* e = r.find(k);
  return e ? e->line : 0;
}

[[noreturn]] void fail(const Reader& r, const std::string& k, const std::string& what) {
  throw ConfigError(k, line_of(r, k), what);
}

}  // namespace

Eigen::VectorXd ExperimentConfig::initialJacobian() const {
  if (filter.initial_jacobian) return *filter.initial_jacobian;
  return robot.gains * (1.0 + filter.jacobian_error);
}

Eigen::VectorXd ExperimentConfig::baselineJacobian() const {
  if (filter.baseline_jacobian) return *filter.baseline_jacobian;
  return initialJacobian();
}

FilterConfigd ExperimentConfig::filterConfig() const {
  const Eigen::VectorXd j0 = initialJacobian();
  FilterConfigd c = FilterConfigd::defaults(j0, fiber.resolution, dt());
  const Eigen::Index n = j0.size();
  Eigen::VectorXd q(2 * n + 1);
  q(0) = filter.process_noise_length;
  q.segment(1, n).setConstant(filter.process_noise_jacobian);
  q.segment(n + 1, n).setConstant(filter.process_noise_drift);
  c.process_noise = q.asDiagonal();
  if (filter.measurement_variance) c.measurement_variance = *filter.measurement_variance;

  Eigen::VectorXd p = c.initial_covariance.diagonal();
  if (filter.initial_variance_length) p(0) = *filter.initial_variance_length;
  if (filter.initial_variance_jacobian) p.segment(1, n).setConstant(*filter.initial_variance_jacobian);
  p.segment(n + 1, n).setConstant(filter.initial_variance_drift);
  c.initial_covariance = p.asDiagonal();
  c.joseph_form = filter.joseph_form;
  return c;
}

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, std::vector<Entry>> entries;
  std::string section;
  std::string raw;
  std::size_t lineno = 0;
  const auto& keys = known_keys();

  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view view(raw);
    const auto comment = view.find_first_of("#;");
    if (comment != std::string_view::npos) view = view.substr(0, comment);
    const std::string text = trim(view);
    if (text.empty()) continue;

    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(text, lineno, "malformed section header");
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (!keys.count(section)) throw ConfigError(section, lineno, "unknown section");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(text, lineno, "expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (section.empty()) throw ConfigError(key, lineno, "key outside of any [section]");
    const std::string qualified = section + "." + key;
    if (!keys.at(section).count(key)) throw ConfigError(qualified, lineno, "unknown key");
    if (value.empty()) throw ConfigError(qualified, lineno, "empty value");
    auto& slot = entries[qualified];
    if (!slot.empty() && !repeatable(qualified)) {
      throw ConfigError(qualified, lineno,
                        "duplicate key (first set on line " + std::to_string(slot.front().line) + ")");
    }
    slot.push_back({qualified, value, lineno});
  }

  const Reader r(std::move(entries));
  ExperimentConfig cfg;

  // [fiber]
  if (auto v = r.count("fiber.sections")) cfg.fiber.sections = *v;
  if (auto v = r.number("fiber.resolution")) cfg.fiber.resolution = *v;
  if (!(cfg.fiber.resolution > 0.0)) {
    fail(r, "fiber.resolution", "spatial resolution lambda must be > 0");
  }
  if (cfg.fiber.sections < 2) fail(r, "fiber.sections", "need at least 2 FBG-sections (M >= 2)");

  // [channel]: derived from fiber, then overridden.
  double curvature = r.number("channel.curvature").value_or(1.0 / 30.0);
  double bend = r.number("channel.bend_angle_deg").value_or(60.0) * kDeg;
  if (!(curvature > 0.0)) fail(r, "channel.curvature", "channel curvature kappa_c must be > 0");
  if (!(bend > 0.0 && bend <= std::numbers::pi)) {
    fail(r, "channel.bend_angle_deg", "channel bend angle must lie in (0, 180] degrees");
  }
  cfg.channel = ChannelConfig::derive(cfg.fiber, curvature, bend);
  if (auto v = r.count("channel.window")) cfg.channel.window = *v;
  if (auto v = r.number("channel.max_length")) cfg.channel.max_length = *v;
  if (auto v = r.number("channel.match_tolerance")) {
    cfg.channel.match_tolerance = *v;
  } else {
    cfg.channel.match_tolerance = 0.25 * curvature * static_cast<double>(cfg.channel.window_span());
  }
  if (auto v = r.count("channel.max_index_jump")) cfg.channel.max_index_jump = *v;
  try {
    validate_geometry(cfg.fiber, cfg.channel);
  } catch (const InconsistentGeometry& e) {
    throw ConfigError("channel", 0, e.what());
  }
  if (cfg.channel.window + 2 > cfg.fiber.sections) {
    fail(r, "channel.window", "channel window leaves no robot sections");
  }
  cfg.datum = default_datum(cfg.fiber, cfg.channel);
  if (auto v = r.count("channel.datum_index")) cfg.datum.index = *v;
  if (auto v = r.number("channel.datum_length")) cfg.datum.length = *v;

  // [robot]
  if (auto v = r.list("robot.gains")) cfg.robot.gains = to_vector(*v);
  if (auto v = r.number("robot.base_length")) cfg.robot.base_length = *v;
  if (auto v = r.number("robot.min_length")) cfg.robot.min_length = *v;
  // Longest robot that still leaves the full channel window on the fiber.
  const double reachable = cfg.datum.length + cfg.fiber.resolution *
                                                  (static_cast<double>(cfg.datum.index) -
                                                   static_cast<double>(cfg.channel.window));
  cfg.robot.max_length = r.number("robot.max_length").value_or(std::min(cfg.channel.max_length, reachable));
  if (auto v = r.number("robot.gain_variation")) cfg.robot.gain_variation = *v;
  if (auto v = r.number("robot.gain_variation_period")) cfg.robot.gain_variation_period = *v;

  // [trajectory]
  if (const Entry* e = r.find("trajectory.profile")) {
    if (e->value == "triangle") {
      cfg.trajectory.profile = Profile::Triangle;
    } else if (e->value == "hold-extend-hold") {
      cfg.trajectory.profile = Profile::HoldExtendHold;
    } else if (e->value == "excitation") {
      cfg.trajectory.profile = Profile::Excitation;
    } else {
      throw ConfigError(e->key, e->line,
                        "profile must be triangle, hold-extend-hold or excitation");
    }
  }
  if (auto v = r.number("trajectory.velocity")) cfg.trajectory.velocity = *v;
  if (auto v = r.number("trajectory.stroke")) cfg.trajectory.stroke = *v;
  if (auto v = r.number("trajectory.start_length")) cfg.trajectory.start_length = *v;
  if (auto v = r.number("trajectory.duration")) cfg.trajectory.duration = *v;
  if (auto v = r.number("trajectory.hold_time")) cfg.trajectory.hold_time = *v;
  if (auto v = r.number("trajectory.excitation_amplitude")) cfg.trajectory.excitation_amplitude = *v;
  if (auto v = r.list("trajectory.excitation_periods")) cfg.trajectory.excitation_periods = *v;
  if (const auto* bends = r.all("trajectory.bend")) {
    for (const auto& e : *bends) {
      const auto v = Reader::to_list(e.key, e);
      if (v.size() != 3) throw ConfigError(e.key, e.line, "bend = t, curvature, plane_deg");
      cfg.trajectory.bend_schedule.push_back({v[0], v[1], v[2] * kDeg});
    }
  }

  // [noise]
  if (auto v = r.number("noise.curvature_sigma")) cfg.noise.curvature_sigma = *v;
  if (auto v = r.number("noise.twist_sigma")) cfg.noise.twist_sigma = *v;
  if (auto v = r.count("noise.seed")) cfg.noise.seed = *v;
  if (cfg.noise.curvature_sigma < 0.0) fail(r, "noise.curvature_sigma", "sigma must be >= 0");
  if (cfg.noise.twist_sigma < 0.0) fail(r, "noise.twist_sigma", "sigma must be >= 0");

  // [disturbances]
  if (const auto* events = r.all("disturbances.event")) {
    for (const auto& e : *events) {
      const auto v = Reader::to_list(e.key, e);
      if (v.size() != 5 || v[2] < 0 || v[3] < 0 || std::floor(v[2]) != v[2] ||
          std::floor(v[3]) != v[3]) {
        throw ConfigError(e.key, e.line, "event = t_start, t_end, first, last, dkappa");
      }
      DisturbanceEvent ev{v[0], v[1], static_cast<std::size_t>(v[2]),
                          static_cast<std::size_t>(v[3]), v[4]};
      try {
        validate(std::span<const DisturbanceEvent>(&ev, 1));
      } catch (const InvalidArgument& err) {
        throw ConfigError(e.key, e.line, err.what());
      }
      cfg.disturbances.push_back(ev);
    }
  }

  // [filter]
  if (auto v = r.number("filter.process_noise_length")) cfg.filter.process_noise_length = *v;
  if (auto v = r.number("filter.process_noise_jacobian")) cfg.filter.process_noise_jacobian = *v;
  if (auto v = r.number("filter.process_noise_drift")) cfg.filter.process_noise_drift = *v;
  cfg.filter.measurement_variance = r.number("filter.measurement_variance");
  cfg.filter.initial_variance_length = r.number("filter.initial_variance_length");
  cfg.filter.initial_variance_jacobian = r.number("filter.initial_variance_jacobian");
  if (auto v = r.number("filter.initial_variance_drift")) cfg.filter.initial_variance_drift = *v;
  if (auto v = r.list("filter.initial_jacobian")) cfg.filter.initial_jacobian = to_vector(*v);
  if (auto v = r.number("filter.jacobian_error")) cfg.filter.jacobian_error = *v;
  if (auto v = r.list("filter.baseline_jacobian")) cfg.filter.baseline_jacobian = to_vector(*v);
  if (auto v = r.flag("filter.joseph_form")) cfg.filter.joseph_form = *v;

  // [run]
  if (const Entry* e = r.find("run.task")) cfg.run.task = e->value;
  if (auto v = r.number("run.rate")) cfg.run.rate = *v;
  if (auto v = r.list("run.velocities")) cfg.run.velocities = *v;

  // Re-raise model-level failures against the key that caused them.
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    if (e.line() == 0 && line_of(r, e.key()) != 0) {
      const std::string what = e.what();
      const auto colon = what.find(": ");
      throw ConfigError(e.key(), line_of(r, e.key()),
                        colon == std::string::npos ? what : what.substr(colon + 2));
    }
    throw;
  }
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (!(cfg.fiber.resolution > 0.0)) {
    throw ConfigError("fiber.resolution", 0, "spatial resolution lambda must be > 0");
  }
  try {
    validate_geometry(cfg.fiber, cfg.channel);
  } catch (const InconsistentGeometry& e) {
    throw ConfigError("channel", 0, e.what());
  }
  if (!(cfg.run.rate > 0.0)) throw ConfigError("run.rate", 0, "loop rate must be > 0");
  if (cfg.run.velocities.empty()) throw ConfigError("run.velocities", 0, "need at least one velocity");
  for (double v : cfg.run.velocities) {
    if (!(v > 0.0)) throw ConfigError("run.velocities", 0, "velocities must be > 0");
  }
  const double longest =
      cfg.datum.length + cfg.fiber.resolution * (static_cast<double>(cfg.datum.index) -
                                                 static_cast<double>(cfg.channel.window));
  if (cfg.robot.max_length > longest + 0.5 * cfg.fiber.resolution) {
    throw ConfigError("robot.max_length", 0,
                      "robot longer than the fiber can cover with the channel window (" +
                          csv::format_number(longest) + " mm)");
  }
  const double shortest =
      cfg.datum.length - cfg.fiber.resolution * (static_cast<double>(cfg.fiber.sections) - 2.0 -
                                                 static_cast<double>(cfg.datum.index));
  if (cfg.robot.min_length < shortest - 0.5 * cfg.fiber.resolution) {
    throw ConfigError("robot.min_length", 0, "robot shorter than one FBG-section beyond the channel");
  }
  try {
    validate(cfg.robot, cfg.trajectory);
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    throw ConfigError(what.rfind("robot", 0) == 0 ? "robot" : "trajectory", 0, what);
  }
  try {
    validate(std::span<const DisturbanceEvent>(cfg.disturbances));
  } catch (const InvalidArgument& e) {
    throw ConfigError("disturbances.event", 0, e.what());
  }
  const Eigen::Index n = cfg.robot.actuators();
  if (cfg.filter.initial_jacobian && cfg.filter.initial_jacobian->size() != n) {
    throw ConfigError("filter.initial_jacobian", 0, "need one entry per actuator");
  }
  if (cfg.filter.baseline_jacobian && cfg.filter.baseline_jacobian->size() != n) {
    throw ConfigError("filter.baseline_jacobian", 0, "need one entry per actuator");
  }
  try {
    cfg.filterConfig().validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("filter", 0, e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file " + path);
  return parse_config(in);
}

void write_config(const ExperimentConfig& cfg, std::ostream& out) {
  auto num = [](double v) { return csv::format_number(v); };
  auto vec = [&](const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v(i));
    return s;
  };
  auto list = [&](const std::vector<double>& v) { return vec(to_vector(v)); };

  out << "[fiber]\n"
      << "sections = " << cfg.fiber.sections << '\n'
      << "resolution = " << num(cfg.fiber.resolution) << "\n\n";
  out << "[channel]\n"
      << "curvature = " << num(cfg.channel.curvature) << '\n'
      << "bend_angle_deg = " << num(cfg.channel.bend_angle / kDeg) << '\n'
      << "window = " << cfg.channel.window << '\n'
      << "max_length = " << num(cfg.channel.max_length) << '\n'
      << "match_tolerance = " << num(cfg.channel.match_tolerance) << '\n'
      << "max_index_jump = " << cfg.channel.max_index_jump << '\n'
      << "datum_index = " << cfg.datum.index << '\n'
      << "datum_length = " << num(cfg.datum.length) << "\n\n";

  const FilterConfigd fc = cfg.filterConfig();
  out << "[filter]\n"
      << "process_noise_length = " << num(cfg.filter.process_noise_length) << '\n'
      << "process_noise_jacobian = " << num(cfg.filter.process_noise_jacobian) << '\n'
      << "process_noise_drift = " << num(cfg.filter.process_noise_drift) << '\n'
      << "measurement_variance = " << num(fc.measurement_variance) << '\n'
      << "initial_variance_length = " << num(fc.initial_covariance(0, 0)) << '\n'
      << "initial_variance_jacobian = " << num(fc.initial_covariance(1, 1)) << '\n'
      << "initial_variance_drift = " << num(cfg.filter.initial_variance_drift) << '\n'
      << "initial_jacobian = " << vec(cfg.initialJacobian()) << '\n'
      << "baseline_jacobian = " << vec(cfg.baselineJacobian()) << '\n'
      << "joseph_form = " << (cfg.filter.joseph_form ? "true" : "false") << "\n\n";

  out << "[robot]\n"
      << "gains = " << vec(cfg.robot.gains) << '\n'
      << "base_length = " << num(cfg.robot.base_length) << '\n'
      << "min_length = " << num(cfg.robot.min_length) << '\n'
      << "max_length = " << num(cfg.robot.max_length) << '\n'
      << "gain_variation = " << num(cfg.robot.gain_variation) << '\n'
      << "gain_variation_period = " << num(cfg.robot.gain_variation_period) << "\n\n";

  const char* profile = cfg.trajectory.profile == Profile::Triangle         ? "triangle"
                        : cfg.trajectory.profile == Profile::HoldExtendHold ? "hold-extend-hold"
                                                                            : "excitation";
  out << "[trajectory]\n"
      << "profile = " << profile << '\n'
      << "velocity = " << num(cfg.trajectory.velocity) << '\n'
      << "stroke = " << num(cfg.trajectory.stroke) << '\n'
      << "start_length = " << num(cfg.trajectory.start_length) << '\n'
      << "duration = " << num(cfg.trajectory.duration) << '\n'
      << "hold_time = " << num(cfg.trajectory.hold_time) << '\n'
      << "excitation_amplitude = " << num(cfg.trajectory.excitation_amplitude) << '\n'
      << "excitation_periods = " << list(cfg.trajectory.excitation_periods) << '\n';
  for (const auto& b : cfg.trajectory.bend_schedule) {
    out << "bend = " << num(b.start_time) << ", " << num(b.curvature) << ", "
        << num(b.plane / kDeg) << '\n';
  }
  out << '\n';

  out << "[noise]\n"
      << "curvature_sigma = " << num(cfg.noise.curvature_sigma) << '\n'
      << "twist_sigma = " << num(cfg.noise.twist_sigma) << '\n'
      << "seed = " << cfg.noise.seed << "\n\n";

  out << "[disturbances]\n";
  for (const auto& e : cfg.disturbances) {
    out << "event = " << num(e.start_time) << ", " << num(e.end_time) << ", " << e.first_section
        << ", " << e.last_section << ", " << num(e.curvature_offset) << '\n';
  }
  out << '\n';

  out << "[run]\n"
      << "task = " << cfg.run.task << '\n'
      << "rate = " << num(cfg.run.rate) << '\n'
      << "velocities = " << list(cfg.run.velocities) << '\n';
}

}  // namespace fbgl
