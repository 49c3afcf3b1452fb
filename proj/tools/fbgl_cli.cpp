// Experiment runner: simulate, estimate, replay and compare.
//
//   fbgl_cli run --config task1.ini --out-dir out/
//   fbgl_cli replay --config task1.ini --frames out/frames.csv --out-dir replay/
//   fbgl_cli compare --config task1.ini --out-dir cmp/
//
// Exit codes: 0 ok, 2 config or parse error, 3 runtime numerical error.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fbgl/config.hpp"
#include "fbgl/csv.hpp"
#include "fbgl/errors.hpp"
#include "fbgl/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

int report_failure(const std::exception& e, int code) {
  std::cerr << "error: " << e.what() << '\n';
  return code;
}

// Maps library exceptions onto exit codes.
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const fbgl::ConfigError& e) {
    return report_failure(e, kConfigError);
  } catch (const fbgl::ParseError& e) {
    return report_failure(e, kConfigError);
  } catch (const fbgl::InconsistentGeometry& e) {
    return report_failure(e, kConfigError);
  } catch (const fbgl::InvalidArgument& e) {
    return report_failure(e, kConfigError);
  } catch (const fbgl::NumericalError& e) {
    return report_failure(e, kRuntimeError);
  } catch (const fbgl::InvalidState& e) {
    return report_failure(e, kRuntimeError);
  } catch (const fbgl::DegenerateInput& e) {
    return report_failure(e, kRuntimeError);
  } catch (const std::exception& e) {
    return report_failure(e, kRuntimeError);
  }
}

fbgl::ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
  fbgl::ExperimentConfig cfg = fbgl::load_config(path);
  if (seed) cfg.noise.seed = *seed;
  return cfg;
}

// Runs tasks with at most `jobs` in flight; returns the worst exit code.
int run_parallel(std::vector<std::function<int()>> tasks, unsigned jobs) {
  if (jobs == 0) jobs = 1;
  int worst = kOk;
  for (std::size_t start = 0; start < tasks.size(); start += jobs) {
    std::vector<std::future<int>> batch;
    for (std::size_t i = start; i < tasks.size() && i < start + jobs; ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] { return guarded(tasks[i]); }));
    }
    for (auto& f : batch) worst = std::max(worst, f.get());
  }
  return worst;
}

void print_report(const fbgl::MetricsReport& r) {
  std::printf("%-16s %-12s length %.4f/%.4f/%.4f mm  endpoint %.4f/%.4f/%.4f mm  shape %.4f/%.4f/%.4f deg\n",
              r.task.c_str(), r.method.c_str(), r.length.mean, r.length.std, r.length.max,
              r.endpoint.mean, r.endpoint.std, r.endpoint.max, r.shape.mean, r.shape.std,
              r.shape.max);
}

// One column per task, mean/std/max rows per method.
void print_compare_table(const std::vector<fbgl::MetricsReport>& reports) {
  std::vector<std::string> tasks;
  for (const auto& r : reports) {
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
  }
  struct Metric {
    const char* name;
    fbgl::ErrorStats fbgl::MetricsReport::*field;
  };
  const Metric metrics[] = {{"length (mm)", &fbgl::MetricsReport::length},
                            {"endpoint (mm)", &fbgl::MetricsReport::endpoint},
                            {"shape (deg)", &fbgl::MetricsReport::shape}};
  for (const auto& metric : metrics) {
    std::printf("\n%s\n%-12s %-5s", metric.name, "method", "stat");
    for (const auto& t : tasks) std::printf(" %14s", t.c_str());
    std::printf("\n");
    for (const char* method : {"model-based", "filter"}) {
      for (int stat = 0; stat < 3; ++stat) {
        std::printf("%-12s %-5s", stat == 0 ? method : "", stat == 0 ? "mean" : stat == 1 ? "std" : "max");
        for (const auto& t : tasks) {
          for (const auto& r : reports) {
            if (r.task != t || r.method != method) continue;
            const fbgl::ErrorStats& s = r.*(metric.field);
            std::printf(" %14.4f", stat == 0 ? s.mean : stat == 1 ? s.std : s.max);
          }
        }
        std::printf("\n");
      }
    }
  }
}

std::string velocity_label(const std::string& task, double v) {
  return task + "-v" + fbgl::csv::format_number(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FBG variable-length estimation and shape sensing"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string config;
  std::string out_dir = "out";
  std::string frames_path;
  std::string actuation_path;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "simulate, estimate and score one or more configs");
  run->add_option("--config", configs, "experiment config (repeatable)")->required();
  run->add_option("--out-dir", out_dir, "output directory");
  run->add_option("--seed", seed, "override noise.seed");
  run->add_option("--jobs", jobs, "configs run in parallel");

  auto* replay = app.add_subcommand("replay", "run the sensor and filter over recorded frames");
  replay->add_option("--config", config, "experiment config")->required();
  replay->add_option("--frames", frames_path, "frames CSV")->required();
  replay->add_option("--actuation", actuation_path,
                     "actuation CSV (default: actuation.csv next to the frames)");
  replay->add_option("--out-dir", out_dir, "output directory");

  auto* compare = app.add_subcommand("compare", "model-based vs filter at each run.velocities entry");
  compare->add_option("--config", config, "experiment config")->required();
  compare->add_option("--out-dir", out_dir, "output directory");
  compare->add_option("--seed", seed, "override noise.seed");
  compare->add_option("--jobs", jobs, "velocities run in parallel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (run->parsed()) {
    std::vector<std::function<int()>> tasks;
    for (const auto& path : configs) {
      const fs::path dir =
          configs.size() == 1 ? fs::path(out_dir) : fs::path(out_dir) / fs::path(path).stem();
      tasks.push_back([path, dir, seed] {
        const fbgl::ExperimentConfig cfg = load(path, seed);
        const fbgl::RunResult result = fbgl::run_experiment(cfg);
        fbgl::write_run_outputs(result, cfg, dir);
        for (const auto& r : result.reports) print_report(r);
        return kOk;
      });
    }
    return run_parallel(std::move(tasks), jobs);
  }

  if (replay->parsed()) {
    return guarded([&] {
      const fbgl::ExperimentConfig cfg = fbgl::load_config(config);
      const auto frames = fbgl::read_frames_file(frames_path);
      if (frames.empty()) throw fbgl::ParseError(1, "frames file " + frames_path + " has no frames");
      if (actuation_path.empty()) {
        actuation_path = (fs::path(frames_path).parent_path() / fbgl::files::kActuation).string();
      }
      std::ifstream act_in(actuation_path, std::ios::binary);
      if (!act_in) throw fbgl::ParseError(0, "cannot open " + actuation_path);
      const auto actuation = fbgl::read_actuation_csv(act_in);
      const fbgl::EstimateSeries est = fbgl::estimate(frames, actuation, cfg);
      fs::create_directories(out_dir);
      std::ofstream out(fs::path(out_dir) / fbgl::files::kEstimate, std::ios::binary);
      fbgl::write_estimate_csv(est, cfg.robot.actuators(), out);
      std::printf("replayed %zu frames: %zu updates, %zu rejected measurements\n",
                  est.rows.size(), est.updates, est.rejected);
      return kOk;
    });
  }

  if (compare->parsed()) {
    return guarded([&] {
      const fbgl::ExperimentConfig base = load(config, seed);
      std::vector<std::vector<fbgl::MetricsReport>> per_velocity(base.run.velocities.size());
      std::vector<std::function<int()>> tasks;
      for (std::size_t i = 0; i < base.run.velocities.size(); ++i) {
        tasks.push_back([&, i] {
          fbgl::ExperimentConfig cfg = base;
          cfg.trajectory.velocity = base.run.velocities[i];
          cfg.run.task = velocity_label(base.run.task, cfg.trajectory.velocity);
          fbgl::validate_config(cfg);
          per_velocity[i] = fbgl::run_experiment(cfg).reports;
          return kOk;
        });
      }
      const int code = run_parallel(std::move(tasks), jobs);
      if (code != kOk) return code;

      std::vector<fbgl::MetricsReport> reports;
      for (const auto& v : per_velocity) reports.insert(reports.end(), v.begin(), v.end());
      fs::create_directories(out_dir);
      std::ofstream out(fs::path(out_dir) / fbgl::files::kReport, std::ios::binary);
      fbgl::write_report_csv(reports, out);
      print_compare_table(reports);
      return kOk;
    });
  }
  return kConfigError;
}
