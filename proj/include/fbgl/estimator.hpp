#ifndef FBGL_ESTIMATOR_HPP
#define FBGL_ESTIMATOR_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "fbgl/errors.hpp"
#include "fbgl/length_sensor.hpp"

namespace fbgl {

// Model-free length filter. The state stacks the effective length, the
// length Jacobian (one entry per actuator) and its drift rate:
//
//   x = [l, J_1..J_n, delta_1..delta_n]
//
// Between samples l advances by J . dq and J advances by delta * dt.
// The only measurement is the length sensor output z = l_e.
template <typename Scalar>
struct FilterConfig {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Eigen::Index actuators = 3;
  Scalar dt = Scalar(0.05);  // s
  Matrix process_noise;      // Q, (2n+1) x (2n+1)
  Scalar measurement_variance = Scalar(0);  // Y, mm^2
  Matrix initial_covariance;                // P0
  Vector initial_jacobian;                  // J0, mm per actuator unit
  bool joseph_form = false;

  Eigen::Index stateSize() const { return 2 * actuators + 1; }

  // Q = diag(1e-4, 1e-6 I, 1e-8 I), Y = (lambda/2)^2,
  // P0 = diag(lambda^2, 0.25 |J0|^2 I, 1e-4 I).
  static FilterConfig defaults(const Vector& initial_jacobian, Scalar resolution,
                               Scalar dt = Scalar(0.05)) {
    FilterConfig c;
    const Eigen::Index n = initial_jacobian.size();
    c.actuators = n;
    c.dt = dt;
    c.initial_jacobian = initial_jacobian;
    c.measurement_variance = (resolution / Scalar(2)) * (resolution / Scalar(2));

    Vector q(2 * n + 1);
    q(0) = Scalar(1e-4);
    q.segment(1, n).setConstant(Scalar(1e-6));
    q.segment(n + 1, n).setConstant(Scalar(1e-8));
    c.process_noise = q.asDiagonal();

    Vector p(2 * n + 1);
    p(0) = resolution * resolution;
    p.segment(1, n).setConstant(Scalar(0.25) * initial_jacobian.squaredNorm());
    p.segment(n + 1, n).setConstant(Scalar(1e-4));
    c.initial_covariance = p.asDiagonal();
    return c;
  }

  // Throws InvalidArgument on shape or definiteness violations.
  void validate() const {
    const Eigen::Index s = stateSize();
    if (actuators < 1) throw InvalidArgument("filter: need at least one actuator");
    if (!(dt > Scalar(0)) || !std::isfinite(dt)) throw InvalidArgument("filter: dt must be > 0");
    if (!(measurement_variance > Scalar(0))) {
      throw InvalidArgument("filter: measurement variance must be > 0");
    }
    if (initial_jacobian.size() != actuators || !initial_jacobian.allFinite()) {
      throw InvalidArgument("filter: initial Jacobian must have one finite entry per actuator");
    }
    checkPsd(process_noise, s, "process noise Q");
    checkPsd(initial_covariance, s, "initial covariance P0");
  }

 private:
  static void checkPsd(const Matrix& m, Eigen::Index s, const char* name) {
    if (m.rows() != s || m.cols() != s || !m.allFinite()) {
      throw InvalidArgument(std::string("filter: ") + name + " has wrong shape");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12)) {
      throw InvalidArgument(std::string("filter: ") + name + " is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -Scalar(1e-12)) {
      throw InvalidArgument(std::string("filter: ") + name + " is not positive semidefinite");
    }
  }
};

template <typename Scalar>
struct FilterState {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector x;
  Matrix P;
  Scalar time = Scalar(0);
  std::optional<std::size_t> last_index;

  Eigen::Index actuators() const { return (x.size() - 1) / 2; }
  Scalar length() const { return x(0); }
  auto jacobian() const { return x.segment(1, actuators()); }
  auto drift() const { return x.segment(1 + actuators(), actuators()); }
};

using FilterConfigd = FilterConfig<double>;
using FilterStated = FilterState<double>;

template <typename Scalar>
struct CovarianceHealth {
  Scalar asymmetry;
  Scalar min_eigenvalue;

  bool ok(Scalar tol = Scalar(1e-9)) const { return asymmetry <= tol && min_eigenvalue >= -tol; }
};

template <typename Derived>
CovarianceHealth<typename Derived::Scalar> covariance_health(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Scalar asym = (p - p.transpose()).cwiseAbs().maxCoeff();
  Matrix sym = (p + p.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return {asym, es.eigenvalues().minCoeff()};
}

// Block transition matrix
//
//   [ 1  dq^T  0     ]
//   [ 0  I     dt I  ]
//   [ 0  0     I     ]
//
// where dq is the actuator displacement over the step.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> build_transition(
    const Eigen::MatrixBase<Derived>& dq, typename Derived::Scalar dt) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = dq.size();
  if (n < 1 || !dq.allFinite() || !std::isfinite(dt)) {
    throw InvalidArgument("build_transition: non-finite or empty actuation");
  }
  Matrix a = Matrix::Identity(2 * n + 1, 2 * n + 1);
  a.block(0, 1, 1, n) = dq.transpose();
  a.block(1, n + 1, n, n).diagonal().setConstant(dt);
  return a;
}

template <typename Scalar>
FilterState<Scalar> initialize_filter(const FilterConfig<Scalar>& cfg,
                                      const LengthMeasurement& m) {
  if (!m.valid || !std::isfinite(m.effective_length)) {
    throw InvalidArgument("initialize_filter: requires a valid length measurement");
  }
  const Eigen::Index n = cfg.actuators;
  FilterState<Scalar> s;
  s.x = FilterState<Scalar>::Vector::Zero(2 * n + 1);
  s.x(0) = Scalar(m.effective_length);
  s.x.segment(1, n) = cfg.initial_jacobian;
  s.P = cfg.initial_covariance;
  s.time = Scalar(m.time);
  s.last_index = m.start_index;
  return s;
}

template <typename Scalar, typename Derived>
FilterState<Scalar> predict(const FilterState<Scalar>& s, const Eigen::MatrixBase<Derived>& dq,
                            const FilterConfig<Scalar>& cfg) {
  if (dq.size() != s.actuators()) throw InvalidArgument("predict: actuation size mismatch");
  const auto a = build_transition(dq, cfg.dt);
  FilterState<Scalar> out;
  out.x = a * s.x;
  typename FilterState<Scalar>::Matrix p = a * s.P * a.transpose() + cfg.process_noise;
  out.P = (p + p.transpose()) / Scalar(2);
  out.time = s.time + cfg.dt;
  out.last_index = s.last_index;
  return out;
}

template <typename Scalar>
FilterState<Scalar> update(const FilterState<Scalar>& s, Scalar z, const FilterConfig<Scalar>& cfg) {
  using Matrix = typename FilterState<Scalar>::Matrix;
  using Vector = typename FilterState<Scalar>::Vector;
  if (!std::isfinite(z)) throw InvalidArgument("update: non-finite measurement");

  // H = [1 0 ... 0], so H P H^T is P(0,0) and P H^T is the first column.
  const Scalar innovation_variance = s.P(0, 0) + cfg.measurement_variance;
  if (!(innovation_variance > Scalar(0)) || !std::isfinite(innovation_variance)) {
    throw NumericalError("update: innovation variance is not positive");
  }
  const Vector k = s.P.col(0) / innovation_variance;

  FilterState<Scalar> out = s;
  out.x = s.x + k * (z - s.x(0));

  Matrix ikh = Matrix::Identity(s.P.rows(), s.P.cols());
  ikh.col(0) -= k;
  Matrix p;
  if (cfg.joseph_form) {
    p = ikh * s.P * ikh.transpose() + cfg.measurement_variance * k * k.transpose();
  } else {
    p = ikh * s.P;
  }
  out.P = (p + p.transpose()) / Scalar(2);
  if (!out.x.allFinite() || !out.P.allFinite()) throw NumericalError("update: non-finite state");
  return out;
}

enum class FilterMode { Update = 1, Predict = 2 };

template <typename Scalar>
struct StepResult {
  FilterState<Scalar> state;
  FilterMode mode;
};

// Mode 1 (valid measurement with a new starting index): predict, then
// update with z = l_e. Mode 2 otherwise: predict only.
template <typename Scalar, typename Derived>
StepResult<Scalar> step(const FilterState<Scalar>& s, const Eigen::MatrixBase<Derived>& dq,
                        const LengthMeasurement& m, const FilterConfig<Scalar>& cfg) {
  FilterState<Scalar> predicted = predict(s, dq, cfg);
  const bool fresh = m.valid && (!s.last_index || *s.last_index != m.start_index);
  if (!fresh) return {std::move(predicted), FilterMode::Predict};
  FilterState<Scalar> updated = update(predicted, Scalar(m.effective_length), cfg);
  updated.last_index = m.start_index;
  return {std::move(updated), FilterMode::Update};
}

// Model-based comparison: l + J . dq with a fixed Jacobian.
template <typename DerivedJ, typename DerivedQ>
typename DerivedJ::Scalar baseline_integrate(typename DerivedJ::Scalar length,
                                             const Eigen::MatrixBase<DerivedJ>& jacobian,
                                             const Eigen::MatrixBase<DerivedQ>& dq) {
  if (jacobian.size() != dq.size()) throw InvalidArgument("baseline_integrate: size mismatch");
  return length + jacobian.dot(dq);
}

}  // namespace fbgl

#endif  // FBGL_ESTIMATOR_HPP
