#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>

namespace lsindy {

struct IntegrationConfig {
  double t0 = 0.0;
  double t_end = 5.0;
  double dt_sample = 0.01;  // snapshot spacing, not the solver step
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  long max_steps = 1'000'000;
  // Upper bound on the adaptive step; mainly for convergence studies.
  double max_step_size = std::numeric_limits<double>::infinity();
};

void validate(const IntegrationConfig& cfg);

struct Trajectory {
  Eigen::VectorXd times;   // m samples on the arithmetic grid t0 + k*dt_sample
  Eigen::MatrixXd states;  // n x m, one column per sample
};

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Dormand-Prince 4(5) with the standard quartic dense-output interpolant.
// Samples land exactly on the arithmetic grid regardless of the adaptive
// steps taken. Throws NumericError (reporting the last good time) on step
// underflow or when max_steps is exceeded.
Trajectory integrate(const VectorField& f, const Eigen::VectorXd& x0, const IntegrationConfig& cfg);

}  // namespace lsindy
