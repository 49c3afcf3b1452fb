#include <doctest.h>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "fbgl/errors.hpp"
#include "fbgl/geometry.hpp"
#include "fbgl/metrics.hpp"

using Eigen::Vector3d;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = 180.0 / kPi;

// Endpoint of a 100 mm arc with bend theta in plane phi.
Vector3d arc(double theta_deg, double phi_deg) {
  const double theta = theta_deg / kDeg;
  const double length = 100.0;
  return fbgl::cc_arc_endpoint(theta / length, phi_deg / kDeg, length);
}

}  // namespace

TEST_CASE("length_error_stats") {
  const std::vector<double> truth{1.0, 2.0, 3.0, 4.0};
  SUBCASE("identical") {
    const auto s = fbgl::length_error_stats(truth, truth);
    CHECK(s.mean == 0.0);
    CHECK(s.std == 0.0);
    CHECK(s.max == 0.0);
  }
  SUBCASE("constant bias") {
    std::vector<double> est = truth;
    for (double& x : est) x -= 0.7;
    const auto s = fbgl::length_error_stats(est, truth);
    CHECK(s.mean == doctest::Approx(0.7));
    CHECK(s.std == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.max == doctest::Approx(0.7));
  }
  SUBCASE("hand statistics") {
    const std::vector<double> est{2.0, 0.0, 6.0};
    const std::vector<double> t{1.0, 2.0, 3.0};
    const auto s = fbgl::length_error_stats(est, t);
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(s.std == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(s.max == doctest::Approx(3.0));
  }
  SUBCASE("size mismatch") {
    const std::vector<double> est{1.0, 2.0};
    CHECK_THROWS_AS(fbgl::length_error_stats(est, truth), fbgl::InvalidArgument);
  }
}

TEST_CASE("property: statistics invariants and permutation invariance") {
  std::mt19937_64 rng(10);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> errors(1 + trial);
    for (double& x : errors) x = e(rng);
    const auto s = fbgl::error_stats(errors);
    CHECK(s.max >= s.mean);
    CHECK(s.mean >= 0.0);
    CHECK(s.std >= 0.0);
    std::shuffle(errors.begin(), errors.end(), rng);
    const auto p = fbgl::error_stats(errors);
    CHECK(p.mean == doctest::Approx(s.mean).epsilon(1e-12));
    CHECK(p.std == doctest::Approx(s.std).epsilon(1e-9));
    CHECK(p.max == s.max);
  }
}

TEST_CASE("endpoint_error") {
  const Vector3d p(1, 2, 3);
  CHECK(fbgl::endpoint_error(p, p) == 0.0);
  CHECK(fbgl::endpoint_error(p + Vector3d(3, 4, 0), p) == doctest::Approx(5.0));
  CHECK(fbgl::endpoint_error(p + Vector3d(0, 0, 3.3), p) == doctest::Approx(3.3));
}

TEST_CASE("property: endpoint_error triangle inequality") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const Vector3d a(n(rng), n(rng), n(rng));
    const Vector3d b(n(rng), n(rng), n(rng));
    const Vector3d c(n(rng), n(rng), n(rng));
    CHECK(fbgl::endpoint_error(a, c) <=
          fbgl::endpoint_error(a, b) + fbgl::endpoint_error(b, c) + 1e-12);
  }
}

TEST_CASE("shape_error") {
  SUBCASE("identical") { CHECK(fbgl::shape_error(arc(40, 20), arc(40, 20)).total == 0.0); }
  SUBCASE("pure bend difference") {
    const auto e = fbgl::shape_error(arc(80, 0), arc(90, 0));
    CHECK(e.total == doctest::Approx(10.0));
    CHECK(e.bend == doctest::Approx(-10.0));
    CHECK(e.plane == doctest::Approx(0.0));
  }
  SUBCASE("straight truth ignores the plane") {
    const auto e = fbgl::shape_error(arc(5, 170), Vector3d(0, 0, 100));
    CHECK(e.total == doctest::Approx(5.0));
  }
  SUBCASE("plane difference weighted by the true bend") {
    const auto e = fbgl::shape_error(arc(90, 30), arc(90, 20));
    CHECK(e.total == doctest::Approx(10.0));
    const auto half = fbgl::shape_error(arc(30, 30), arc(30, 20));
    CHECK(half.total == doctest::Approx(10.0 * std::sin(30.0 / kDeg)));
  }
  SUBCASE("plane difference wraps") {
    const auto e = fbgl::shape_error(arc(90, 179), arc(90, -179));
    CHECK(e.plane == doctest::Approx(-2.0));
    CHECK(e.total == doctest::Approx(2.0));
  }
  SUBCASE("degenerate endpoint") {
    CHECK_THROWS_AS(fbgl::shape_error(Vector3d::Zero(), arc(10, 0)), fbgl::DegenerateInput);
    CHECK_THROWS_AS(fbgl::shape_error(arc(10, 0), Vector3d::Zero()), fbgl::DegenerateInput);
  }
}

TEST_CASE("property: shape_error is invariant to a common rotation about z") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> bend(1.0, 170.0);
  std::uniform_real_distribution<double> plane(-180.0, 180.0);
  for (int i = 0; i < 500; ++i) {
    const Vector3d a = arc(bend(rng), plane(rng));
    const Vector3d b = arc(bend(rng), plane(rng));
    const Eigen::Matrix3d r = Eigen::AngleAxisd(plane(rng) / kDeg, Vector3d::UnitZ()).toRotationMatrix();
    CHECK(fbgl::shape_error(r * a, r * b).total ==
          doctest::Approx(fbgl::shape_error(a, b).total).epsilon(1e-9));
  }
}

TEST_CASE("report csv") {
  fbgl::MetricsReport r{"task1", "filter", {1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}, {13, 14, 15}};
  std::ostringstream out;
  fbgl::write_report_csv(std::vector<fbgl::MetricsReport>{r}, out);
  std::istringstream in(out.str());
  std::string header;
  std::string row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header.rfind("task,method,length_mean,length_std,length_max,endpoint_mean", 0) == 0);
  CHECK(header.find("shape_max,bend_mean,bend_std,bend_max,plane_mean") != std::string::npos);
  CHECK(row == "task1,filter,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15");
}
