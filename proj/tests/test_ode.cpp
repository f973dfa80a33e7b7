#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lsindy/errors.hpp"
#include "lsindy/ode.hpp"

using namespace lsindy;

TEST_SUITE("ode") {

TEST_CASE("zero vector field keeps the state constant") {
  IntegrationConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt_sample = 0.1;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 2.5);
  const Trajectory traj = integrate([](const Eigen::VectorXd& x) { return Eigen::VectorXd::Zero(x.size()); },
                                    x0, cfg);
  REQUIRE(traj.times.size() == 11);
  for (Eigen::Index k = 0; k < traj.times.size(); ++k) {
    CHECK(traj.states.col(k) == x0);
  }
}

TEST_CASE("exponential decay hits the closed form") {
  IntegrationConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt_sample = 0.01;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  const Trajectory traj = integrate([](const Eigen::VectorXd& x) { return (-x).eval(); },
                                    Eigen::VectorXd::Ones(1), cfg);
  REQUIRE(traj.times.size() == 101);
  CHECK(std::abs(traj.states(0, 100) - std::exp(-1.0)) < 1e-8);
  // Dense output should track the closed form on the whole grid.
  for (Eigen::Index k = 0; k < traj.times.size(); ++k) {
    CHECK(std::abs(traj.states(0, k) - std::exp(-traj.times[k])) < 1e-8);
  }
}

TEST_CASE("harmonic oscillator returns to its initial state after one period") {
  IntegrationConfig cfg;
  cfg.t_end = 2.0 * std::numbers::pi;
  cfg.dt_sample = 2.0 * std::numbers::pi / 100.0;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-11;
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  const auto rhs = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd d(2);
    d << x[1], -x[0];
    return d;
  };
  const Trajectory traj = integrate(rhs, x0, cfg);
  const Eigen::VectorXd last = traj.states.col(traj.times.size() - 1);
  CHECK((last - x0).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("observed convergence order is at least four under step halving") {
  const auto error_at = [](double max_step) {
    IntegrationConfig cfg;
    cfg.t_end = 2.0;
    cfg.dt_sample = 2.0;
    // Tolerances loose enough that the step bound is what limits the step.
    cfg.rel_tol = 1e6;
    cfg.abs_tol = 1e6;
    cfg.max_step_size = max_step;
    const Trajectory traj = integrate([](const Eigen::VectorXd& x) { return (-x).eval(); },
                                      Eigen::VectorXd::Ones(1), cfg);
    return std::abs(traj.states(0, 1) - std::exp(-2.0));
  };

  const double e_coarse = error_at(0.1);
  const double e_fine = error_at(0.05);
  REQUIRE(e_fine > 0.0);
  CHECK(e_coarse / e_fine >= 16.0 * 0.8);
}

TEST_CASE("samples sit exactly on the arithmetic grid") {
  IntegrationConfig cfg;
  cfg.t0 = 0.2;
  cfg.t_end = 5.2;
  cfg.dt_sample = 0.01;
  const Trajectory traj = integrate([](const Eigen::VectorXd& x) { return (-x).eval(); },
                                    Eigen::VectorXd::Ones(1), cfg);
  REQUIRE(traj.times.size() == 501);
  for (Eigen::Index k = 0; k < traj.times.size(); ++k) {
    CHECK(traj.times[k] == cfg.t0 + static_cast<double>(k) * cfg.dt_sample);
  }
}

TEST_CASE("step budget exhaustion reports a numerical failure") {
  IntegrationConfig cfg;
  cfg.t_end = 10.0;
  cfg.dt_sample = 1.0;
  cfg.max_steps = 3;
  cfg.max_step_size = 1e-3;
  CHECK_THROWS_AS(integrate([](const Eigen::VectorXd& x) { return (-x).eval(); },
                            Eigen::VectorXd::Ones(1), cfg),
                  NumericError);
}

TEST_CASE("invalid configs are rejected") {
  IntegrationConfig cfg;
  cfg.t_end = cfg.t0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = IntegrationConfig{};
  cfg.dt_sample = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = IntegrationConfig{};
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

}  // TEST_SUITE
