#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>

#include "lsindy/grid_model.hpp"
#include "lsindy/ode.hpp"

namespace lsindy {

enum class DerivativeMode { kExact, kFiniteDifference };

struct Provenance {
  enum class Kind { kExactDerivatives, kFiniteDifference, kNoisy, kExternal };
  Kind kind = Kind::kExactDerivatives;
  double sigma_rel = 0.0;
  std::uint64_t seed = 0;
};

// State matrix X (delta rows stacked above omega rows) and derivative matrix
// Xdot on a uniform time grid; one column per sample.
struct SnapshotSet {
  Eigen::VectorXd times;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Xdot;
  Provenance provenance;

  int n_g() const { return static_cast<int>(X.rows()) / 2; }
  int samples() const { return static_cast<int>(X.cols()); }
};

void validate(const SnapshotSet& s);

// Exact mode evaluates the network vector field at every stored state;
// finite-difference mode uses 2nd-order central stencils with 2nd-order
// one-sided stencils at the endpoints.
SnapshotSet assemble(const Trajectory& traj, const EffectiveNetwork& net, DerivativeMode mode);

// 2nd-order differentiation along rows of a uniformly sampled matrix.
// Requires at least 3 columns.
Eigen::MatrixXd finite_difference(const Eigen::MatrixXd& values, double dt);

// Perturbs each row of X with zero-mean Gaussian noise scaled by that row's
// sample std; derivatives are recomputed from the noisy states by finite
// differences, matching how measurement noise would propagate.
SnapshotSet add_noise(const SnapshotSet& s, double sigma_rel, std::uint64_t seed);

// CSV pair: `<path>` holds t,delta_1..,omega_1..; the sibling derivative file
// `<stem>_dot.csv` holds t,ddelta_1..,domega_1..
std::filesystem::path derivative_path(const std::filesystem::path& snapshot_path);
void save_csv(const SnapshotSet& s, const std::filesystem::path& path);
SnapshotSet load_csv(const std::filesystem::path& path);

}  // namespace lsindy
