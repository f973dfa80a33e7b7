#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lsindy/function_library.hpp"
#include "lsindy/grid_model.hpp"
#include "lsindy/ode.hpp"
#include "lsindy/reduction.hpp"

namespace lsindy {

struct RegressionConfig {
  double lambda = 0.001;  // hard coefficient threshold
  int max_iters = 10;
  bool normalize_columns = true;
  double rank_tolerance = 1e-12;
  bool parallel = true;  // per-coordinate subproblems; results identical either way
};

void validate(const RegressionConfig& cfg);

// Sparse coefficient matrix over a candidate library, integrable as an ODE.
// A present basis marks a latent-coordinate model whose trajectories can be
// back-projected to the full state.
struct SparseModel {
  Eigen::MatrixXd Xi;  // p x d; column k drives coordinate k
  std::vector<Term> terms;
  std::vector<std::string> descriptors;
  LibrarySpec library_spec;
  int coordinate_dim = 0;
  double lambda = 0.0;
  std::optional<ReducedBasis> basis;
  // Coordinates whose active set emptied during fitting (all-zero columns).
  std::vector<int> empty_columns;
};

// Sequential thresholded least squares, one regression per coordinate.
// Each iteration solves on the active set through a rank-revealing orthogonal
// decomposition, then deactivates coefficients below lambda (ties kept).
// The initial full-library factorization is shared across coordinates.
// derivatives is m x d (row per snapshot).
SparseModel fit(const CandidateLibrary& lib, const Eigen::MatrixXd& derivatives,
                const RegressionConfig& cfg);

Eigen::VectorXd predict_derivative(const SparseModel& model, const Eigen::VectorXd& state);

struct ModelTrajectory {
  Trajectory trajectory;                    // model coordinates
  std::optional<Trajectory> reconstructed;  // back-projected full state (latent models)
};

ModelTrajectory simulate_model(const SparseModel& model, const Eigen::VectorXd& z0,
                               const IntegrationConfig& cfg);

struct HDEstimate {
  bool recoverable = false;
  double H = 0.0;
  double D = 0.0;
  std::string route;  // "constant" or "coupling"
};

// Reads inertia and damping back out of a full-state model given the known
// network structure (F, K, gamma, omega_R):
//   constant coefficient  c0 = omega_R F_i / (2 H_i)
//   omega_i coefficient   cw = -D_i / (2 H_i)
// Generators with F_i = 0 (or a below-tolerance constant term) fall back to
// the sin-difference coefficient of their strongest neighbor. Latent models
// are rejected: reduced coordinates mix generators, so no per-generator
// readout exists there.
std::vector<HDEstimate> estimate_HD(const SparseModel& model, const EffectiveNetwork& structure,
                                    double c0_tolerance = 1e-9);

// JSON export with descriptors, (row, col, value) coefficient triplets, the
// library spec and lambda; a latent model's basis goes to a sibling CSV.
void save_model_json(const SparseModel& model, const std::filesystem::path& path,
                     const std::string& basis_filename = "basis.csv");
SparseModel load_model_json(const std::filesystem::path& path);

}  // namespace lsindy
