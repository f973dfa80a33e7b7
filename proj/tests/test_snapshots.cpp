#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lsindy/errors.hpp"
#include "lsindy/grid_model.hpp"
#include "lsindy/ode.hpp"
#include "lsindy/reference.hpp"
#include "lsindy/snapshots.hpp"

using namespace lsindy;

namespace {

SnapshotSet simulated_3gen(std::uint64_t seed, DerivativeMode mode, EffectiveNetwork* net_out = nullptr) {
  SyntheticSpec spec;
  spec.n_g = 3;
  spec.seed = seed;
  const auto [net, eq] = generate_synthetic(spec);

  Eigen::VectorXd x0(6);
  x0.head(3) = eq + Eigen::Vector3d(0.08, -0.05, 0.02);
  x0.tail(3).setZero();

  IntegrationConfig cfg;  // [0, 5] at dt = 0.01
  const Trajectory traj = integrate([&net](const Eigen::VectorXd& x) { return vector_field_stacked(net, x); },
                                    x0, cfg);
  if (net_out) *net_out = net;
  return assemble(traj, net, mode);
}

}  // namespace

TEST_SUITE("snapshots") {

TEST_CASE("finite differences of a constant trajectory vanish") {
  Trajectory traj;
  traj.times = Eigen::VectorXd::LinSpaced(10, 0.0, 0.9);
  traj.states = Eigen::MatrixXd::Constant(2, 10, 1.7);

  EffectiveNetwork net;
  net.n_g = 1;
  net.H = Eigen::VectorXd::Constant(1, 3.0);
  net.D = Eigen::VectorXd::Zero(1);
  net.F = Eigen::VectorXd::Zero(1);
  net.K = Eigen::MatrixXd::Zero(1, 1);
  net.gamma = Eigen::MatrixXd::Zero(1, 1);

  const SnapshotSet s = assemble(traj, net, DerivativeMode::kFiniteDifference);
  CHECK(s.Xdot.isZero(0.0));
}

TEST_CASE("second-order stencils differentiate quadratics exactly") {
  const int m = 51;
  const double dt = 0.01;
  Eigen::MatrixXd x(2, m);
  for (int k = 0; k < m; ++k) {
    const double t = k * dt;
    x(0, k) = t * t;
    x(1, k) = 3.0 * t * t - 2.0 * t;
  }
  const Eigen::MatrixXd d = finite_difference(x, dt);
  for (int k = 0; k < m; ++k) {
    const double t = k * dt;
    CHECK(d(0, k) == doctest::Approx(2.0 * t).epsilon(1e-10));
    CHECK(d(1, k) == doctest::Approx(6.0 * t - 2.0).epsilon(1e-10));
  }
}

TEST_CASE("exact and finite-difference derivatives agree to stencil order") {
  const SnapshotSet exact = simulated_3gen(2, DerivativeMode::kExact);
  const SnapshotSet fd = simulated_3gen(2, DerivativeMode::kFiniteDifference);

  const double dt = exact.times[1] - exact.times[0];
  // Second-derivative scale estimated by differencing the exact derivatives.
  const double xddot_max = finite_difference(exact.Xdot, dt).cwiseAbs().maxCoeff();
  const double discrepancy = (exact.Xdot - fd.Xdot).cwiseAbs().maxCoeff();
  CHECK(discrepancy < 10.0 * dt * dt * xddot_max);
}

TEST_CASE("exact derivatives satisfy the vector field column by column") {
  EffectiveNetwork net;
  const SnapshotSet s = simulated_3gen(4, DerivativeMode::kExact, &net);
  for (Eigen::Index k = 0; k < s.X.cols(); k += 25) {
    const Eigen::VectorXd want = reference::swing_rhs(net, s.X.col(k));
    CHECK((s.Xdot.col(k) - want).lpNorm<Eigen::Infinity>() <=
          1e-14 * std::max(1.0, want.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("finite differencing is linear") {
  Eigen::MatrixXd x1 = Eigen::MatrixXd::Random(4, 40);
  Eigen::MatrixXd x2 = Eigen::MatrixXd::Random(4, 40);
  const double a = 0.7, b = -2.3, dt = 0.05;
  const Eigen::MatrixXd lhs = finite_difference(a * x1 + b * x2, dt);
  const Eigen::MatrixXd rhs = a * finite_difference(x1, dt) + b * finite_difference(x2, dt);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
}

TEST_CASE("finite differences require at least three samples") {
  Eigen::MatrixXd two = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(finite_difference(two, 0.1), ConfigError);
}

TEST_CASE("zero noise leaves states untouched") {
  const SnapshotSet s = simulated_3gen(6, DerivativeMode::kExact);
  const SnapshotSet noisy = add_noise(s, 0.0, 123);
  CHECK(noisy.X == s.X);
  CHECK(noisy.provenance.kind == Provenance::Kind::kNoisy);
}

TEST_CASE("noise is deterministic per seed") {
  const SnapshotSet s = simulated_3gen(6, DerivativeMode::kExact);
  const SnapshotSet a = add_noise(s, 0.01, 77);
  const SnapshotSet b = add_noise(s, 0.01, 77);
  CHECK(a.X == b.X);
  CHECK(a.Xdot == b.Xdot);
}

TEST_CASE("noise magnitude tracks the requested per-row std") {
  const SnapshotSet s = simulated_3gen(6, DerivativeMode::kExact);
  const double sigma_rel = 0.01;
  const SnapshotSet noisy = add_noise(s, sigma_rel, 2024);

  const Eigen::Index m = s.X.cols();
  for (Eigen::Index i = 0; i < s.X.rows(); ++i) {
    const double row_mean = s.X.row(i).mean();
    const double row_sd =
        std::sqrt((s.X.row(i).array() - row_mean).square().sum() / static_cast<double>(m - 1));

    const Eigen::ArrayXd diff = (noisy.X.row(i) - s.X.row(i)).array();
    const double noise_sd = std::sqrt((diff - diff.mean()).square().sum() / static_cast<double>(m - 1));
    CHECK(noise_sd == doctest::Approx(sigma_rel * row_sd).epsilon(0.2));
  }
}

TEST_CASE("csv pair round trips bit-identically") {
  const SnapshotSet s = simulated_3gen(8, DerivativeMode::kExact);
  const auto dir = std::filesystem::temp_directory_path() / "lsindy_snap_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / "snapshots.csv";

  save_csv(s, path);
  CHECK(std::filesystem::exists(derivative_path(path)));
  const SnapshotSet loaded = load_csv(path);
  CHECK(loaded.times == s.times);
  CHECK(loaded.X == s.X);
  CHECK(loaded.Xdot == s.Xdot);
  CHECK(loaded.provenance.kind == Provenance::Kind::kExternal);
}

}  // TEST_SUITE
