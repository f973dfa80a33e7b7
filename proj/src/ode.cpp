#include "lsindy/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsindy/errors.hpp"

namespace lsindy {

void validate(const IntegrationConfig& cfg) {
  if (!(cfg.t_end > cfg.t0)) throw ConfigError("integration: t_end must be > t0");
  if (!(cfg.dt_sample > 0.0)) throw ConfigError("integration: dt_sample must be > 0");
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) throw ConfigError("integration: tolerances must be > 0");
  if (cfg.max_steps < 1) throw ConfigError("integration: max_steps must be >= 1");
  if (!(cfg.max_step_size > 0.0)) throw ConfigError("integration: max_step_size must be > 0");
}

namespace {

// Dormand-Prince 4(5) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Difference between the 5th- and 4th-order weights (error estimate).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

// Weights of the quartic continuous extension (4th-order dense output).
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace

Trajectory integrate(const VectorField& f, const Eigen::VectorXd& x0, const IntegrationConfig& cfg) {
  validate(cfg);
  if (!x0.allFinite()) throw NumericError("integration: initial state is nonfinite");

  const double span = cfg.t_end - cfg.t0;
  const long m = static_cast<long>(std::floor(span / cfg.dt_sample + 1e-9)) + 1;
  const auto grid_time = [&](long k) { return cfg.t0 + static_cast<double>(k) * cfg.dt_sample; };
  const double t_last = grid_time(m - 1);

  Trajectory traj;
  traj.times.resize(m);
  for (long k = 0; k < m; ++k) traj.times[k] = grid_time(k);
  traj.states.resize(x0.size(), m);
  traj.states.col(0) = x0;
  if (m == 1) return traj;

  const long n = x0.size();
  Eigen::VectorXd y = x0;
  Eigen::VectorXd k1 = f(y);
  if (!k1.allFinite()) throw NumericError("integration: vector field nonfinite at initial state");
  if (k1.size() != n) throw NumericError("integration: vector field dimension mismatch");

  const auto scaled_rms = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1) {
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double q = v[i] / sc;
      acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
  };

  // Initial step heuristic.
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (long i = 0; i < n; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / static_cast<double>(n));
    d1 = std::sqrt(d1 / static_cast<double>(n));
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, span, cfg.max_step_size});
  }

  Eigen::VectorXd k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y1(n), yerr(n);
  double t = cfg.t0;
  long next_sample = 1;
  bool last_rejected = false;

  for (long step = 0; step < cfg.max_steps && next_sample < m; ++step) {
    h = std::min({h, cfg.max_step_size, t_last - t});
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw NumericError("integration: step size underflow at t = " + std::to_string(t));
    }

    k2 = f(y + h * (a21 * k1));
    k3 = f(y + h * (a31 * k1 + a32 * k2));
    k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = f(y1);  // FSAL stage, also used by the dense interpolant

    if (!y1.allFinite() || !k7.allFinite()) {
      throw NumericError("integration: solution became nonfinite near t = " + std::to_string(t));
    }

    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = scaled_rms(yerr, y, y1);

    if (err <= 1.0) {
      const double t_new = t + h;
      const double edge = t_new + 1e-12 * std::max(1.0, std::abs(t_new));
      if (next_sample < m && grid_time(next_sample) <= edge) {
        // Continuous extension over the accepted step: with ydiff = y1 - y,
        //   u(theta) = y + theta*(c2 + (1-theta)*(c3 + theta*(c4 + (1-theta)*c5))).
        const Eigen::VectorXd c2 = y1 - y;
        const Eigen::VectorXd c3 = h * k1 - c2;
        const Eigen::VectorXd c4 = c2 - h * k7 - c3;
        const Eigen::VectorXd c5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next_sample < m && grid_time(next_sample) <= edge) {
          const double ts = grid_time(next_sample);
          const double theta = (ts - t) / h;
          if (theta >= 1.0 - 1e-12) {
            traj.states.col(next_sample) = y1;
          } else {
            const double omt = 1.0 - theta;
            traj.states.col(next_sample) =
                y + theta * (c2 + omt * (c3 + theta * (c4 + omt * c5)));
          }
          ++next_sample;
        }
      }

      t = t_new;
      y.swap(y1);
      k1.swap(k7);

      double fac = (err == 0.0) ? 10.0 : 0.9 * std::pow(err, -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      h *= fac;
      last_rejected = false;
    } else {
      const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      h *= fac;
      last_rejected = true;
    }
  }

  if (next_sample < m) {
    throw NumericError("integration: max_steps exceeded, last good time t = " + std::to_string(t));
  }
  return traj;
}

}  // namespace lsindy
