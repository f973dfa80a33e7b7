#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <numbers>

namespace lsindy {

// Kron-reduced oscillator network ("effective network" load model): each
// generator i carries an inertia constant H_i [s], damping D_i [pu] and net
// power injection F_i [pu]; generators are coupled through strengths K_ij [pu]
// with phase shifts gamma_ij [rad]. Rotor speeds are tracked as deviations
// from the reference angular frequency omega_R, so a synchronous equilibrium
// sits at omega = 0.
struct EffectiveNetwork {
  static constexpr double kDefaultOmegaR = 2.0 * std::numbers::pi * 60.0;

  int n_g = 0;
  double omega_R = kDefaultOmegaR;
  Eigen::VectorXd H;      // > 0
  Eigen::VectorXd D;      // >= 0
  Eigen::VectorXd F;
  Eigen::MatrixXd K;      // >= 0 off-diagonal; diagonal unused
  Eigen::MatrixXd gamma;  // nonzero only where K is nonzero
};

// Throws ConfigError naming the offending field and index.
void validate(const EffectiveNetwork& net);

struct GridState {
  Eigen::VectorXd delta;  // rotor angles [rad]
  Eigen::VectorXd omega;  // speed deviations from omega_R [rad/s]
};

// Swing dynamics:
//   ddelta_i = omega_i
//   domega_i = (omega_R / 2 H_i) * (F_i - D_i/omega_R * omega_i
//              - sum_{j != i} K_ij sin(delta_i - delta_j - gamma_ij))
// Parallelized over generators; see reference::swing_rhs for the serial
// scalar implementation used by tests and benchmarks.
GridState vector_field(const EffectiveNetwork& net, const GridState& s);

// Same dynamics on the stacked vector [delta; omega], the layout used by the
// integrator and the snapshot matrices.
Eigen::VectorXd vector_field_stacked(const EffectiveNetwork& net, const Eigen::VectorXd& x);

enum class Topology { kRing, kRandomSparse };

struct ParameterRanges {
  std::array<double, 2> H{2.0, 6.0};
  std::array<double, 2> D{0.5, 2.0};
  std::array<double, 2> K{0.5, 2.0};
  std::array<double, 2> gamma{0.0, 0.3};
  // Target equilibrium angles are drawn from this range before F is balanced.
  std::array<double, 2> equilibrium_angle{-0.5, 0.5};
};

struct SyntheticSpec {
  int n_g = 3;
  Topology topology = Topology::kRing;
  double density = 0.1;  // edge probability, random-sparse only
  std::uint64_t seed = 0;
  ParameterRanges ranges;
  double omega_R = EffectiveNetwork::kDefaultOmegaR;
};

struct SyntheticResult {
  EffectiveNetwork net;
  Eigen::VectorXd equilibrium;  // angles delta* with vector_field(delta*, 0) = 0
};

// Couplings are drawn symmetrically (K_ij = K_ji, gamma_ij = gamma_ji) and F
// is balanced against a randomly drawn target equilibrium, so every generated
// network has a known operating point. Deterministic for a fixed seed.
SyntheticResult generate_synthetic(const SyntheticSpec& spec);

// Damped Newton iteration on the angle subsystem from the given guess.
// Throws NumericError if the residual cannot be driven below tol.
Eigen::VectorXd find_equilibrium(const EffectiveNetwork& net, const Eigen::VectorXd& guess,
                                 double tol = 1e-12, int max_iters = 50);
Eigen::VectorXd find_equilibrium(const EffectiveNetwork& net);

// JSON schema: n_g, omega_R, H, D, F, coupling[{i, j, K, gamma}]. Unknown keys
// are rejected; load(save(net)) is bit-identical.
EffectiveNetwork load_network(const std::filesystem::path& path);
void save_network(const EffectiveNetwork& net, const std::filesystem::path& path);

}  // namespace lsindy
