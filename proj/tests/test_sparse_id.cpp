#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "lsindy/errors.hpp"
#include "lsindy/grid_model.hpp"
#include "lsindy/ode.hpp"
#include "lsindy/rng.hpp"
#include "lsindy/snapshots.hpp"
#include "lsindy/sparse_id.hpp"

#include "swing_expansion.hpp"

using namespace lsindy;

namespace {

// z1' = -0.5 z2, z2' = 0.5 z1 - 0.1 z2
Eigen::VectorXd planted_rhs(const Eigen::VectorXd& z) {
  Eigen::VectorXd d(2);
  d << -0.5 * z[1], 0.5 * z[0] - 0.1 * z[1];
  return d;
}

struct PlantedData {
  Trajectory traj;
  CandidateLibrary lib;
  Eigen::MatrixXd derivatives;  // m x 2
};

PlantedData make_planted(int poly_order) {
  IntegrationConfig cfg;  // [0,5] at 0.01 -> 501 samples
  Eigen::VectorXd z0(2);
  z0 << 1.0, 0.0;
  PlantedData data;
  data.traj = integrate(planted_rhs, z0, cfg);

  LibrarySpec spec;
  spec.poly_order = poly_order;
  spec.coordinate_names = {"z1", "z2"};
  data.lib = build(data.traj.states, spec);

  data.derivatives.resize(data.traj.times.size(), 2);
  for (Eigen::Index k = 0; k < data.traj.times.size(); ++k) {
    data.derivatives.row(k) = planted_rhs(data.traj.states.col(k)).transpose();
  }
  return data;
}

std::set<int> support(const Eigen::MatrixXd& xi, int col) {
  std::set<int> s;
  for (Eigen::Index r = 0; r < xi.rows(); ++r) {
    if (xi(r, col) != 0.0) s.insert(static_cast<int>(r));
  }
  return s;
}

struct SwingFit {
  EffectiveNetwork net;
  CandidateLibrary lib;
  SparseModel model;
  Eigen::MatrixXd expected;
  SnapshotSet snaps;
};

SwingFit fit_3gen_full_state(std::uint64_t seed, double lambda) {
  SyntheticSpec spec;
  spec.n_g = 3;
  spec.seed = seed;
  auto [net, eq] = generate_synthetic(spec);

  Rng rng(seed + 50);
  Eigen::VectorXd x0(6);
  for (int i = 0; i < 3; ++i) x0[i] = eq[i] + rng.uniform(-0.1, 0.1);
  x0.tail(3).setZero();

  IntegrationConfig icfg;
  const Trajectory traj =
      integrate([&](const Eigen::VectorXd& x) { return vector_field_stacked(net, x); }, x0, icfg);

  SwingFit out;
  out.snaps = assemble(traj, net, DerivativeMode::kExact);

  LibrarySpec lspec;
  lspec.poly_order = 1;
  lspec.trig = TrigMode::kPairwiseDifference;
  lspec.trig_coordinates = {0, 1, 2};  // delta block
  out.lib = build(out.snaps.X, lspec);

  RegressionConfig rcfg;
  rcfg.lambda = lambda;
  out.model = fit(out.lib, out.snaps.Xdot.transpose(), rcfg);
  out.expected = oracles::expected_swing_coefficients(net, out.lib.terms);
  out.net = net;
  return out;
}

}  // namespace

TEST_SUITE("sparse_id") {

TEST_CASE("zero derivatives produce the zero model with warnings") {
  LibrarySpec spec;
  spec.poly_order = 2;
  Eigen::MatrixXd data = Eigen::MatrixXd::Random(2, 40);
  const CandidateLibrary lib = build(data, spec);

  const SparseModel model = fit(lib, Eigen::MatrixXd::Zero(40, 2), RegressionConfig{});
  CHECK(model.Xi.isZero(0.0));
  CHECK(model.empty_columns == std::vector<int>{0, 1});
}

TEST_CASE("exact linear system is recovered and the constant is thresholded away") {
  // x(t) = e^{-2t}; library [1, x]; dxdt = -2x
  const int m = 100;
  Eigen::MatrixXd data(1, m);
  Eigen::MatrixXd derivs(m, 1);
  for (int k = 0; k < m; ++k) {
    const double x = std::exp(-2.0 * 0.01 * k);
    data(0, k) = x;
    derivs(k, 0) = -2.0 * x;
  }
  LibrarySpec spec;
  spec.poly_order = 1;
  const CandidateLibrary lib = build(data, spec);

  RegressionConfig cfg;
  cfg.lambda = 0.1;
  const SparseModel model = fit(lib, derivs, cfg);
  CHECK(model.Xi(0, 0) == 0.0);
  CHECK(model.Xi(1, 0) == doctest::Approx(-2.0).epsilon(1e-10));

  // predict_derivative at x = 3 gives -6
  Eigen::VectorXd state(1);
  state << 3.0;
  CHECK(predict_derivative(model, state)[0] == doctest::Approx(-6.0).epsilon(1e-10));
}

TEST_CASE("planted two-dimensional system: exact support and coefficients") {
  const PlantedData data = make_planted(3);
  RegressionConfig cfg;
  cfg.lambda = 0.01;
  const SparseModel model = fit(data.lib, data.derivatives, cfg);

  const int z1 = data.lib.find_linear(0);
  const int z2 = data.lib.find_linear(1);
  CHECK(support(model.Xi, 0) == std::set<int>{z2});
  CHECK(support(model.Xi, 1) == std::set<int>{z1, z2});
  CHECK(model.Xi(z2, 0) == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(model.Xi(z1, 1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(model.Xi(z2, 1) == doctest::Approx(-0.1).epsilon(1e-6));

  Eigen::VectorXd state(2);
  state << 1.0, 1.0;
  const Eigen::VectorXd d = predict_derivative(model, state);
  CHECK(d[0] == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(d[1] == doctest::Approx(0.4).epsilon(1e-6));

  // Closed-loop self-consistency over the training window.
  IntegrationConfig icfg;
  Eigen::VectorXd z0(2);
  z0 << 1.0, 0.0;
  const ModelTrajectory sim = simulate_model(model, z0, icfg);
  CHECK(!sim.reconstructed.has_value());
  CHECK((sim.trajectory.states - data.traj.states).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("full-state swing fit recovers the analytic expansion") {
  const SwingFit f = fit_3gen_full_state(7, 0.01);

  for (int col = 0; col < 6; ++col) {
    CHECK(support(f.model.Xi, col) == support(f.expected, col));
  }
  double max_rel = 0.0;
  for (Eigen::Index r = 0; r < f.expected.rows(); ++r) {
    for (Eigen::Index c = 0; c < f.expected.cols(); ++c) {
      if (f.expected(r, c) == 0.0) continue;
      max_rel = std::max(max_rel,
                         std::abs(f.model.Xi(r, c) - f.expected(r, c)) / std::abs(f.expected(r, c)));
    }
  }
  CHECK(max_rel < 1e-6);
}

TEST_CASE("zero model integrates to a constant trajectory") {
  LibrarySpec spec;
  spec.poly_order = 1;
  SparseModel model;
  model.coordinate_dim = 2;
  model.library_spec = spec;
  model.terms = enumerate_terms(2, spec);
  model.descriptors = term_descriptors(2, spec, model.terms);
  model.Xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.terms.size()), 2);

  Eigen::VectorXd z0(2);
  z0 << 0.3, -0.7;
  IntegrationConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt_sample = 0.1;
  const ModelTrajectory sim = simulate_model(model, z0, cfg);
  for (Eigen::Index k = 0; k < sim.trajectory.times.size(); ++k) {
    CHECK(sim.trajectory.states.col(k) == z0);
  }
  CHECK(predict_derivative(model, z0).isZero(0.0));
}

TEST_CASE("estimate_HD inverts a directly constructed model") {
  EffectiveNetwork net;
  net.n_g = 1;
  net.H = Eigen::VectorXd::Constant(1, 4.0);
  net.D = Eigen::VectorXd::Constant(1, 1.0);
  net.F = Eigen::VectorXd::Constant(1, 0.5);
  net.K = Eigen::MatrixXd::Zero(1, 1);
  net.gamma = Eigen::MatrixXd::Zero(1, 1);

  LibrarySpec spec;
  spec.poly_order = 1;
  spec.trig = TrigMode::kPairwiseDifference;
  spec.trig_coordinates = {0};

  SparseModel model;
  model.coordinate_dim = 2;
  model.library_spec = spec;
  model.terms = enumerate_terms(2, spec);
  model.descriptors = term_descriptors(2, spec, model.terms);
  model.Xi = oracles::expected_swing_coefficients(net, model.terms);

  const auto est = estimate_HD(model, net);
  REQUIRE(est.size() == 1);
  CHECK(est[0].recoverable);
  CHECK(est[0].H == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(est[0].D == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est[0].route == "constant");
}

TEST_CASE("estimate_HD after a full pipeline fit is within one percent") {
  const SwingFit f = fit_3gen_full_state(7, 0.01);
  const auto est = estimate_HD(f.model, f.net);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(est[static_cast<std::size_t>(i)].recoverable);
    CHECK(est[static_cast<std::size_t>(i)].H == doctest::Approx(f.net.H[i]).epsilon(0.01));
    CHECK(est[static_cast<std::size_t>(i)].D == doctest::Approx(f.net.D[i]).epsilon(0.01));
  }
}

TEST_CASE("unforced isolated generator is marked unrecoverable") {
  EffectiveNetwork net;
  net.n_g = 1;
  net.H = Eigen::VectorXd::Constant(1, 4.0);
  net.D = Eigen::VectorXd::Constant(1, 1.0);
  net.F = Eigen::VectorXd::Zero(1);
  net.K = Eigen::MatrixXd::Zero(1, 1);
  net.gamma = Eigen::MatrixXd::Zero(1, 1);

  LibrarySpec spec;
  spec.poly_order = 1;
  spec.trig = TrigMode::kPairwiseDifference;
  spec.trig_coordinates = {0};

  SparseModel model;
  model.coordinate_dim = 2;
  model.library_spec = spec;
  model.terms = enumerate_terms(2, spec);
  model.descriptors = term_descriptors(2, spec, model.terms);
  model.Xi = oracles::expected_swing_coefficients(net, model.terms);

  const auto est = estimate_HD(model, net);
  CHECK(!est[0].recoverable);
}

TEST_CASE("latent models are rejected by estimate_HD") {
  const SwingFit f = fit_3gen_full_state(3, 0.01);
  SparseModel latent = f.model;
  latent.basis = ReducedBasis{};
  CHECK_THROWS_AS(estimate_HD(latent, f.net), ConfigError);
}

TEST_CASE("refitting on the recovered support keeps it stable") {
  const PlantedData data = make_planted(2);
  RegressionConfig cfg;
  cfg.lambda = 0.01;
  const SparseModel model = fit(data.lib, data.derivatives, cfg);

  for (int col = 0; col < 2; ++col) {
    const std::set<int> s = support(model.Xi, col);
    // Sub-library restricted to the fitted support of this coordinate.
    CandidateLibrary sub;
    sub.spec = data.lib.spec;
    sub.dim = data.lib.dim;
    sub.Theta.resize(data.lib.Theta.rows(), static_cast<Eigen::Index>(s.size()));
    Eigen::Index c = 0;
    for (int idx : s) {
      sub.Theta.col(c) = data.lib.Theta.col(idx);
      sub.terms.push_back(data.lib.terms[static_cast<std::size_t>(idx)]);
      sub.descriptors.push_back(data.lib.descriptors[static_cast<std::size_t>(idx)]);
      ++c;
    }
    sub.column_norms = sub.Theta.colwise().norm();

    const SparseModel refit = fit(sub, data.derivatives.col(col), cfg);
    CHECK(support(refit.Xi, 0).size() == s.size());
  }
}

TEST_CASE("support shrinks monotonically in lambda on the first iteration") {
  const PlantedData data = make_planted(3);
  RegressionConfig loose, tight;
  loose.lambda = 1e-4;
  tight.lambda = 1e-2;
  loose.max_iters = 1;
  tight.max_iters = 1;

  const SparseModel a = fit(data.lib, data.derivatives, loose);
  const SparseModel b = fit(data.lib, data.derivatives, tight);
  for (int col = 0; col < 2; ++col) {
    const std::set<int> sa = support(a.Xi, col);
    const std::set<int> sb = support(b.Xi, col);
    CHECK(std::includes(sa.begin(), sa.end(), sb.begin(), sb.end()));
  }
}

TEST_CASE("rescaling derivatives and lambda together preserves support") {
  const PlantedData data = make_planted(2);
  const double c = 37.5;

  RegressionConfig base;
  base.lambda = 0.01;
  RegressionConfig scaled = base;
  scaled.lambda = base.lambda * c;

  const SparseModel m1 = fit(data.lib, data.derivatives, base);
  const SparseModel m2 = fit(data.lib, (c * data.derivatives).eval(), scaled);
  for (int col = 0; col < 2; ++col) CHECK(support(m1.Xi, col) == support(m2.Xi, col));
  CHECK((m2.Xi - c * m1.Xi).cwiseAbs().maxCoeff() < 1e-12 * c * m1.Xi.cwiseAbs().maxCoeff());
}

TEST_CASE("fits are deterministic and thread-count independent") {
  const PlantedData data = make_planted(3);
  RegressionConfig parallel_cfg;
  parallel_cfg.lambda = 0.01;
  RegressionConfig serial_cfg = parallel_cfg;
  serial_cfg.parallel = false;

  const SparseModel a = fit(data.lib, data.derivatives, parallel_cfg);
  const SparseModel b = fit(data.lib, data.derivatives, parallel_cfg);
  const SparseModel c = fit(data.lib, data.derivatives, serial_cfg);
  CHECK(a.Xi == b.Xi);
  CHECK(a.Xi == c.Xi);
}

TEST_CASE("empty support column warns instead of failing") {
  // One useless candidate (constant) against pure noise-free zero data.
  LibrarySpec spec;
  spec.poly_order = 0;
  Eigen::MatrixXd data = Eigen::MatrixXd::Random(1, 20);
  const CandidateLibrary lib = build(data, spec);
  Eigen::MatrixXd derivs = Eigen::MatrixXd::Constant(20, 1, 1e-9);

  RegressionConfig cfg;
  cfg.lambda = 1.0;
  const SparseModel model = fit(lib, derivs, cfg);
  CHECK(model.Xi.isZero(0.0));
  CHECK(model.empty_columns == std::vector<int>{0});
}

TEST_CASE("model json round trips including a basis") {
  const SwingFit f = fit_3gen_full_state(9, 0.01);
  const auto dir = std::filesystem::temp_directory_path() / "lsindy_model_tests";
  std::filesystem::create_directories(dir);

  // Full-state model.
  save_model_json(f.model, dir / "full.json");
  const SparseModel full = load_model_json(dir / "full.json");
  CHECK(full.Xi == f.model.Xi);
  CHECK(full.descriptors == f.model.descriptors);
  CHECK(!full.basis.has_value());

  // Latent model with a basis attached.
  const ReducedBasis basis = compute_basis(f.snaps, {BasisCriterion::Kind::kFixedRank, 0.0, 4});
  const LatentSnapshots z = project(f.snaps, basis);
  LibrarySpec lspec;
  lspec.poly_order = 2;
  CandidateLibrary lib = build(z.Z, lspec);
  RegressionConfig rcfg;
  SparseModel latent = fit(lib, z.Zdot.transpose(), rcfg);
  latent.basis = basis;

  save_model_json(latent, dir / "latent.json", "latent_basis.csv");
  const SparseModel loaded = load_model_json(dir / "latent.json");
  REQUIRE(loaded.basis.has_value());
  CHECK(loaded.basis->Phi == basis.Phi);
  CHECK(loaded.Xi == latent.Xi);

  Eigen::VectorXd z0 = basis.Phi.transpose() * f.snaps.X.col(0);
  CHECK(predict_derivative(loaded, z0) == predict_derivative(latent, z0));
}

}  // TEST_SUITE
