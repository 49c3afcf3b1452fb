#include "fbgl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

#include "fbgl/csv.hpp"
#include "fbgl/errors.hpp"
#include "fbgl/length_sensor.hpp"
#include "fbgl/shape.hpp"

namespace fbgl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return out;
}

std::string fmt(double v) { return csv::format_number(v); }

}  // namespace

Simulation simulate(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const double dt = cfg.dt();
  const auto steps = static_cast<std::size_t>(std::llround(cfg.trajectory.effectiveDuration() / dt));

  Simulation sim;
  sim.frames.reserve(steps + 1);
  sim.truth.reserve(steps + 1);
  sim.actuation.reserve(steps + 1);
  sim.endpoints.reserve(steps + 1);

  std::mt19937_64 rng(cfg.noise.seed);
  std::mt19937_64 unused_rng(0);
  const NoiseSpec noiseless{0.0, 0.0, 0};
  RobotTruth truth = initial_truth(cfg.robot, cfg.trajectory);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (k > 0) truth = robot_step(truth, cfg.robot, cfg.trajectory, static_cast<double>(k - 1) * dt, dt);
    sim.frames.push_back(synth_frame(truth, cfg.robot, cfg.fiber, cfg.channel, cfg.datum, cfg.noise,
                                     cfg.disturbances, t, rng));
    sim.truth.push_back(truth);
    sim.actuation.push_back({t, truth.q});

    const bool contact = std::any_of(cfg.disturbances.begin(), cfg.disturbances.end(),
                                     [t](const DisturbanceEvent& e) { return e.activeAt(t); });
    if (contact) {
      const FiberFrame clean = synth_frame(truth, cfg.robot, cfg.fiber, cfg.channel, cfg.datum,
                                           noiseless, cfg.disturbances, t, unused_rng);
      sim.endpoints.push_back(sense_endpoint(
          clean, cfg.fiber, true_start_index(truth.length, cfg.fiber, cfg.datum), truth.length));
    } else {
      sim.endpoints.push_back(true_endpoint(truth));
    }
  }
  return sim;
}

EstimateSeries estimate(std::span<const FiberFrame> frames,
                        std::span<const ActuationSample> actuation, const ExperimentConfig& cfg) {
  if (frames.size() != actuation.size()) {
    throw InvalidArgument("estimate: frame and actuation series differ in length");
  }
  const FilterConfigd fc = cfg.filterConfig();
  fc.validate();
  const Eigen::VectorXd baseline_jacobian = cfg.baselineJacobian();
  const Eigen::Index n = fc.actuators;

  EstimateSeries out;
  out.rows.reserve(frames.size());
  std::optional<LengthMeasurement> last_valid;
  std::optional<FilterStated> state;
  double baseline = 0.0;

  for (std::size_t k = 0; k < frames.size(); ++k) {
    const FiberFrame& frame = frames[k];
    if (!frame.isValid(cfg.fiber.sections)) {
      throw InvalidArgument("estimate: frame " + std::to_string(k) + " has wrong shape");
    }
    if (actuation[k].q.size() != n) {
      throw InvalidArgument("estimate: actuation " + std::to_string(k) + " has wrong size");
    }

    EstimateRow row;
    row.time = frame.time;
    row.measurement = match_channel_index(frame, cfg.fiber, cfg.channel, cfg.datum, last_valid);
    if (row.measurement.valid) {
      last_valid = row.measurement;
    } else {
      ++out.rejected;
    }

    if (!state) {
      if (row.measurement.valid) {
        state = initialize_filter(fc, row.measurement);
        baseline = row.measurement.effective_length;
        row.mode = 1;
      }
    } else {
      const Eigen::VectorXd dq = actuation[k].q - actuation[k - 1].q;
      auto result = step(*state, dq, row.measurement, fc);
      state = std::move(result.state);
      state->time = frame.time;
      row.mode = static_cast<int>(result.mode);
      if (result.mode == FilterMode::Update) ++out.updates;
      baseline = baseline_integrate(baseline, baseline_jacobian, dq);
    }

    if (state) {
      row.initialized = true;
      row.filter_length = state->length();
      row.jacobian = state->jacobian();
      row.baseline_length = baseline;
      row.health = covariance_health(state->P);
      out.worst_health.asymmetry = std::max(out.worst_health.asymmetry, row.health.asymmetry);
      out.worst_health.min_eigenvalue =
          std::min(out.worst_health.min_eigenvalue, row.health.min_eigenvalue);
      if (!(row.filter_length > 0.0) || !(row.baseline_length > 0.0)) {
        throw NumericalError("estimate: non-positive length estimate at t = " + fmt(frame.time));
      }
      // Robot sections start after the last accepted channel index.
      row.filter_endpoint =
          sense_endpoint(frame, cfg.fiber, last_valid->start_index, row.filter_length);
      row.baseline_endpoint =
          sense_endpoint(frame, cfg.fiber, last_valid->start_index, row.baseline_length);
    } else {
      row.filter_length = kNaN;
      row.jacobian = Eigen::VectorXd::Constant(n, kNaN);
      row.baseline_length = kNaN;
      row.filter_endpoint.setConstant(kNaN);
      row.baseline_endpoint.setConstant(kNaN);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<MetricsReport> evaluate(const Simulation& sim, const EstimateSeries& est,
                                    const std::string& task) {
  if (sim.truth.size() != est.rows.size()) {
    throw InvalidArgument("evaluate: truth and estimate series differ in length");
  }
  std::vector<double> le_filter, le_base, ee_filter, ee_base, se_filter, se_base;
  std::vector<double> bend_filter, bend_base, plane_filter, plane_base;
  for (std::size_t k = 0; k < est.rows.size(); ++k) {
    const EstimateRow& r = est.rows[k];
    if (!r.initialized) continue;
    const RobotTruth& t = sim.truth[k];
    const Eigen::Vector3d& p_true = sim.endpoints[k];
    le_filter.push_back(r.filter_length - t.length);
    le_base.push_back(r.baseline_length - t.length);
    ee_filter.push_back(endpoint_error(r.filter_endpoint, p_true));
    ee_base.push_back(endpoint_error(r.baseline_endpoint, p_true));
    const ShapeError sf = shape_error(r.filter_endpoint, p_true);
    const ShapeError sb = shape_error(r.baseline_endpoint, p_true);
    se_filter.push_back(sf.total);
    se_base.push_back(sb.total);
    bend_filter.push_back(sf.bend);
    bend_base.push_back(sb.bend);
    plane_filter.push_back(sf.plane);
    plane_base.push_back(sb.plane);
  }
  return {
      {task, "model-based", error_stats(le_base), error_stats(ee_base), error_stats(se_base),
       error_stats(bend_base), error_stats(plane_base)},
      {task, "filter", error_stats(le_filter), error_stats(ee_filter), error_stats(se_filter),
       error_stats(bend_filter), error_stats(plane_filter)},
  };
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult r;
  r.simulation = simulate(cfg);
  r.estimates = estimate(r.simulation.frames, r.simulation.actuation, cfg);
  r.reports = evaluate(r.simulation, r.estimates, cfg.run.task);
  return r;
}

void write_truth_csv(const Simulation& sim, std::ostream& out) {
  const Eigen::Index n = sim.truth.empty() ? 0 : sim.truth.front().q.size();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",q_" << i;
  out << ",l_true,kappa_r,phi_r,x,y,z\n";
  for (std::size_t k = 0; k < sim.truth.size(); ++k) {
    const RobotTruth& t = sim.truth[k];
    const Eigen::Vector3d& p = sim.endpoints[k];
    out << fmt(t.time);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << fmt(t.q(i));
    out << ',' << fmt(t.length) << ',' << fmt(t.curvature) << ',' << fmt(t.plane) << ','
        << fmt(p.x()) << ',' << fmt(p.y()) << ',' << fmt(p.z()) << '\n';
  }
}

void write_actuation_csv(std::span<const ActuationSample> actuation, std::ostream& out) {
  const Eigen::Index n = actuation.empty() ? 0 : actuation.front().q.size();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",q_" << i;
  out << '\n';
  for (const auto& a : actuation) {
    out << fmt(a.time);
    for (Eigen::Index i = 0; i < a.q.size(); ++i) out << ',' << fmt(a.q(i));
    out << '\n';
  }
}

std::vector<ActuationSample> read_actuation_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(lineno, "missing actuation header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = csv::split(line);
  if (header.size() < 2 || header.front() != "t") {
    throw ParseError(lineno, "actuation header must be t,q_0..q_{n-1}");
  }
  const std::size_t n = header.size() - 1;
  std::vector<ActuationSample> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " columns, got " +
                                   std::to_string(fields.size()));
    }
    ActuationSample a;
    a.time = csv::parse_number(fields[0], lineno);
    a.q.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      a.q(static_cast<Eigen::Index>(i)) = csv::parse_number(fields[1 + i], lineno);
    }
    out.push_back(std::move(a));
  }
  return out;
}

void write_estimate_csv(const EstimateSeries& est, Eigen::Index actuators, std::ostream& out) {
  out << "t,mu,l_e,valid,mode,l_hat";
  for (Eigen::Index i = 0; i < actuators; ++i) out << ",J_hat_" << i;
  out << ",x,y,z,l_baseline,baseline_x,baseline_y,baseline_z\n";
  for (const auto& r : est.rows) {
    out << fmt(r.time) << ',' << r.measurement.start_index << ','
        << fmt(r.measurement.effective_length) << ',' << (r.measurement.valid ? 1 : 0) << ','
        << r.mode << ',' << fmt(r.filter_length);
    for (Eigen::Index i = 0; i < actuators; ++i) out << ',' << fmt(r.jacobian(i));
    out << ',' << fmt(r.filter_endpoint.x()) << ',' << fmt(r.filter_endpoint.y()) << ','
        << fmt(r.filter_endpoint.z()) << ',' << fmt(r.baseline_length) << ','
        << fmt(r.baseline_endpoint.x()) << ',' << fmt(r.baseline_endpoint.y()) << ','
        << fmt(r.baseline_endpoint.z()) << '\n';
  }
}

void write_length_series_csv(const Simulation& sim, const EstimateSeries& est, std::ostream& out) {
  out << "t,l_true,l_baseline,l_filter\n";
  for (std::size_t k = 0; k < est.rows.size() && k < sim.truth.size(); ++k) {
    const auto& r = est.rows[k];
    out << fmt(r.time) << ',' << fmt(sim.truth[k].length) << ',' << fmt(r.baseline_length) << ','
        << fmt(r.filter_length) << '\n';
  }
}

void write_endpoint_series_csv(const Simulation& sim, const EstimateSeries& est, std::ostream& out) {
  out << "t,baseline,filter,baseline_dtheta,baseline_dphi,filter_dtheta,filter_dphi\n";
  for (std::size_t k = 0; k < est.rows.size() && k < sim.truth.size(); ++k) {
    const auto& r = est.rows[k];
    const Eigen::Vector3d& p = sim.endpoints[k];
    out << fmt(r.time);
    if (!r.initialized) {
      for (int i = 0; i < 6; ++i) out << ',' << fmt(kNaN);
      out << '\n';
      continue;
    }
    const ShapeError sb = shape_error(r.baseline_endpoint, p);
    const ShapeError sf = shape_error(r.filter_endpoint, p);
    out << ',' << fmt(endpoint_error(r.baseline_endpoint, p)) << ','
        << fmt(endpoint_error(r.filter_endpoint, p)) << ',' << fmt(sb.bend) << ','
        << fmt(sb.plane) << ',' << fmt(sf.bend) << ',' << fmt(sf.plane) << '\n';
  }
}

void write_run_outputs(const RunResult& result, const ExperimentConfig& cfg,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_frames_file(result.simulation.frames, cfg.fiber.sections, (dir / files::kFrames).string());
  {
    auto out = open_out(dir / files::kTruth);
    write_truth_csv(result.simulation, out);
  }
  {
    auto out = open_out(dir / files::kActuation);
    write_actuation_csv(result.simulation.actuation, out);
  }
  {
    auto out = open_out(dir / files::kEstimate);
    write_estimate_csv(result.estimates, cfg.robot.actuators(), out);
  }
  {
    auto out = open_out(dir / files::kReport);
    write_report_csv(result.reports, out);
  }
  {
    auto out = open_out(dir / files::kLengthSeries);
    write_length_series_csv(result.simulation, result.estimates, out);
  }
  {
    auto out = open_out(dir / files::kEndpointSeries);
    write_endpoint_series_csv(result.simulation, result.estimates, out);
  }
  {
    auto out = open_out(dir / files::kConfig);
    write_config(cfg, out);
  }
}

}  // namespace fbgl
