#include "lsindy/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsindy/csv.hpp"
#include "lsindy/errors.hpp"

namespace lsindy {

ReducedBasis compute_basis(const SnapshotSet& s, const BasisCriterion& criterion, bool center) {
  validate(s);
  if (s.X.cols() < 2) throw ConfigError("compute_basis: need at least 2 snapshots");

  Eigen::MatrixXd X = s.X;
  ReducedBasis basis;
  basis.centered = center;
  if (center) {
    basis.mean = X.rowwise().mean();
    X.colwise() -= basis.mean;
  }
  if (X.norm() == 0.0) throw NumericError("compute_basis: snapshot matrix is all zero");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double total = sigma.squaredNorm();

  int r;
  if (criterion.kind == BasisCriterion::Kind::kEnergy) {
    if (!(criterion.tau > 0.0 && criterion.tau <= 1.0)) {
      throw ConfigError("compute_basis: energy threshold must be in (0,1]");
    }
    double acc = 0.0;
    r = static_cast<int>(sigma.size());
    for (int i = 0; i < sigma.size(); ++i) {
      acc += sigma[i] * sigma[i];
      if (acc / total >= criterion.tau) {
        r = i + 1;
        break;
      }
    }
  } else {
    if (criterion.r < 1) throw ConfigError("compute_basis: fixed rank must be >= 1");
    r = std::min<int>(criterion.r, static_cast<int>(sigma.size()));
  }

  basis.Phi = svd.matrixU().leftCols(r);
  basis.singular_values = sigma;
  basis.r = r;
  basis.energy_captured = sigma.head(r).squaredNorm() / total;

  // Deterministic sign convention.
  for (int j = 0; j < r; ++j) {
    Eigen::Index imax;
    basis.Phi.col(j).cwiseAbs().maxCoeff(&imax);
    if (basis.Phi(imax, j) < 0.0) basis.Phi.col(j) = -basis.Phi.col(j);
  }
  return basis;
}

namespace {

void check_compatible(Eigen::Index n, const ReducedBasis& basis) {
  if (basis.Phi.rows() != n) {
    throw ConfigError("basis dimension " + std::to_string(basis.Phi.rows()) +
                      " does not match state dimension " + std::to_string(n));
  }
}

}  // namespace

LatentSnapshots project(const SnapshotSet& s, const ReducedBasis& basis) {
  validate(s);
  check_compatible(s.X.rows(), basis);
  LatentSnapshots z;
  z.times = s.times;
  if (basis.centered) {
    z.Z = basis.Phi.transpose() * (s.X.colwise() - basis.mean);
  } else {
    z.Z = basis.Phi.transpose() * s.X;
  }
  z.Zdot = basis.Phi.transpose() * s.Xdot;
  return z;
}

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& Z, const ReducedBasis& basis) {
  if (Z.rows() != basis.Phi.cols()) {
    throw ConfigError("reconstruct: latent dimension " + std::to_string(Z.rows()) +
                      " does not match basis rank " + std::to_string(basis.Phi.cols()));
  }
  Eigen::MatrixXd X = basis.Phi * Z;
  if (basis.centered) X.colwise() += basis.mean;
  return X;
}

void save_spectrum_csv(const ReducedBasis& basis, const std::filesystem::path& path) {
  const Eigen::Index k = basis.singular_values.size();
  const double total = basis.singular_values.squaredNorm();
  Eigen::MatrixXd table(k, 3);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += basis.singular_values[i] * basis.singular_values[i];
    table(i, 0) = static_cast<double>(i + 1);
    table(i, 1) = basis.singular_values[i];
    table(i, 2) = acc / total;
  }
  csv::write(path, {"index", "sigma", "cumulative_energy"}, table);
}

void save_basis_csv(const ReducedBasis& basis, const std::filesystem::path& path) {
  std::vector<std::string> header;
  for (int j = 1; j <= basis.r; ++j) header.push_back("phi_" + std::to_string(j));
  Eigen::MatrixXd table = basis.Phi;
  if (basis.centered) {
    header.push_back("mean");
    table.conservativeResize(Eigen::NoChange, table.cols() + 1);
    table.col(table.cols() - 1) = basis.mean;
  }
  csv::write(path, header, table);
}

ReducedBasis load_basis_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  ReducedBasis basis;
  Eigen::Index cols = table.values.cols();
  if (cols == 0 || table.values.rows() == 0) throw IoError(path.string() + ": empty basis file");
  if (!table.header.empty() && table.header.back() == "mean") {
    basis.centered = true;
    basis.mean = table.values.col(cols - 1);
    --cols;
  }
  basis.Phi = table.values.leftCols(cols);
  basis.r = static_cast<int>(cols);
  return basis;
}

}  // namespace lsindy
