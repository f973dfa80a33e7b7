#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "lsindy/snapshots.hpp"

namespace lsindy {

// Truncated left singular basis of the snapshot matrix plus the full
// singular-value spectrum. Columns are sign-fixed so the largest-magnitude
// entry of each is positive, making output reproducible across backends.
struct ReducedBasis {
  Eigen::MatrixXd Phi;              // n x r, orthonormal columns
  Eigen::VectorXd singular_values;  // full spectrum, nonincreasing
  int r = 0;
  double energy_captured = 0.0;
  bool centered = false;
  Eigen::VectorXd mean;  // only when centered
};

struct BasisCriterion {
  enum class Kind { kEnergy, kFixedRank };
  Kind kind = Kind::kEnergy;
  double tau = 0.999;  // energy fraction
  int r = 0;           // fixed rank
};

struct LatentSnapshots {
  Eigen::VectorXd times;
  Eigen::MatrixXd Z;     // r x m
  Eigen::MatrixXd Zdot;  // r x m
};

// Energy selects the smallest r whose cumulative squared singular values reach
// tau; fixed-rank clamps r to min(n, m). SVD is applied to the raw X unless
// center is set (which subtracts the row mean first).
ReducedBasis compute_basis(const SnapshotSet& s, const BasisCriterion& criterion, bool center = false);

// Z = Phi^T X, Zdot = Phi^T Xdot.
LatentSnapshots project(const SnapshotSet& s, const ReducedBasis& basis);

// Back-projection Phi * Z (plus the mean for centered bases).
Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& Z, const ReducedBasis& basis);

// `index,sigma,cumulative_energy` rows for spectrum/energy plots.
void save_spectrum_csv(const ReducedBasis& basis, const std::filesystem::path& path);

// Phi_r columns (plus a trailing mean column when centered).
void save_basis_csv(const ReducedBasis& basis, const std::filesystem::path& path);
ReducedBasis load_basis_csv(const std::filesystem::path& path);

}  // namespace lsindy
