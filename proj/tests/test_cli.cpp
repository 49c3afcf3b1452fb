#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fbgl_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Result cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FBGL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  r.output.assign(std::istreambuf_iterator<char>(in), {});
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string config(const std::string& name) { return (fs::path(FBGL_CONFIG_DIR) / name).string(); }

}  // namespace

TEST_CASE("run is deterministic and replay reproduces the estimates") {
  const fs::path a = scratch("run_a");
  const fs::path b = scratch("run_b");
  const fs::path r = scratch("replay");
  REQUIRE(cli("run --config " + config("task1.ini") + " --out-dir " + a.string(), a / "log").code == 0);
  REQUIRE(cli("run --config " + config("task1.ini") + " --out-dir " + b.string(), b / "log").code == 0);
  for (const char* f : {"frames.csv", "truth.csv", "actuation.csv", "estimate.csv", "report.csv",
                        "length_series.csv", "endpoint_error_series.csv", "config_used.ini"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  const std::string report = slurp(a / "report.csv");
  CHECK(report.find("task1,model-based,") != std::string::npos);
  CHECK(report.find("task1,filter,") != std::string::npos);

  const Result rep = cli("replay --config " + config("task1.ini") + " --frames " +
                             (a / "frames.csv").string() + " --out-dir " + r.string(),
                         r / "log");
  REQUIRE(rep.code == 0);
  CHECK(slurp(r / "estimate.csv") == slurp(a / "estimate.csv"));
}

TEST_CASE("seed override changes the frames") {
  const fs::path a = scratch("seed_a");
  const fs::path b = scratch("seed_b");
  REQUIRE(cli("run --config " + config("task1.ini") + " --out-dir " + a.string(), a / "log").code == 0);
  REQUIRE(cli("run --config " + config("task1.ini") + " --seed 7 --out-dir " + b.string(), b / "log").code == 0);
  CHECK(slurp(a / "frames.csv") != slurp(b / "frames.csv"));
  CHECK(slurp(a / "truth.csv") == slurp(b / "truth.csv"));
}

TEST_CASE("replay input errors") {
  const fs::path d = scratch("replay_errors");
  const std::string cfg = config("task1.ini");

  {
    std::ofstream(d / "empty.csv") << "";
    const Result r = cli("replay --config " + cfg + " --frames " + (d / "empty.csv").string() +
                             " --out-dir " + (d / "o").string(),
                         d / "log1");
    CHECK(r.code == 2);
  }
  {
    std::ofstream(d / "header_only.csv") << "t,kappa_0,tau_0\n";
    const Result r = cli("replay --config " + cfg + " --frames " +
                             (d / "header_only.csv").string() + " --out-dir " + (d / "o").string(),
                         d / "log2");
    CHECK(r.code == 2);
  }
  {
    const fs::path run = scratch("replay_errors_run");
    REQUIRE(cli("run --config " + cfg + " --out-dir " + run.string(), run / "log").code == 0);
    std::string frames = slurp(run / "frames.csv");
    // Cut the fourth line (third frame) short.
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) pos = frames.find('\n', pos) + 1;
    const std::size_t end = frames.find('\n', pos);
    frames.erase(frames.rfind(',', end), end - frames.rfind(',', end));
    std::ofstream(run / "frames.csv", std::ios::binary) << frames;
    const Result r = cli("replay --config " + cfg + " --frames " + (run / "frames.csv").string() +
                             " --out-dir " + (d / "o").string(),
                         d / "log3");
    CHECK(r.code == 2);
    CHECK(r.output.find("line 4") != std::string::npos);
  }
}

TEST_CASE("config errors exit with code 2 and name the key") {
  const fs::path d = scratch("config_errors");
  std::ofstream(d / "bad.ini") << "[fiber]\nsections = 45\nresolution = -1\n";
  Result r = cli("run --config " + (d / "bad.ini").string() + " --out-dir " + (d / "o").string(),
                 d / "log1");
  CHECK(r.code == 2);
  CHECK(r.output.find("fiber.resolution") != std::string::npos);
  CHECK(r.output.find("line 3") != std::string::npos);

  std::ofstream(d / "unknown.ini") << "[noise]\nsigma = 1\n";
  r = cli("run --config " + (d / "unknown.ini").string() + " --out-dir " + (d / "o").string(),
          d / "log2");
  CHECK(r.code == 2);
  CHECK(r.output.find("noise.sigma") != std::string::npos);

  r = cli("run --config " + (d / "missing.ini").string(), d / "log3");
  CHECK(r.code == 2);

  r = cli("frobnicate", d / "log4");
  CHECK(r.code == 2);
}

TEST_CASE("compare emits one row per velocity and method") {
  const fs::path d = scratch("compare");
  const Result r = cli("compare --config " + config("task1.ini") + " --jobs 3 --out-dir " + d.string(),
                       d / "log");
  REQUIRE(r.code == 0);
  const std::string report = slurp(d / "report.csv");
  for (const char* v : {"3", "6", "12"}) {
    CHECK(report.find(std::string("task1-v") + v + ",model-based,") != std::string::npos);
    CHECK(report.find(std::string("task1-v") + v + ",filter,") != std::string::npos);
  }
  CHECK(std::count(report.begin(), report.end(), '\n') == 7);
  CHECK(r.output.find("length (mm)") != std::string::npos);
}

TEST_CASE("several configs run into per-config directories") {
  const fs::path d = scratch("multi");
  const Result r = cli("run --jobs 2 --config " + config("task1.ini") + " --config " +
                           config("task3.ini") + " --out-dir " + d.string(),
                       d / "log");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(d / "task1" / "report.csv"));
  CHECK(fs::exists(d / "task3" / "report.csv"));
}
