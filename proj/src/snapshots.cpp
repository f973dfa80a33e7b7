#include "lsindy/snapshots.hpp"

#include <cmath>
#include <string>

#include "lsindy/csv.hpp"
#include "lsindy/errors.hpp"
#include "lsindy/rng.hpp"

namespace lsindy {

void validate(const SnapshotSet& s) {
  if (s.X.rows() % 2 != 0) throw ConfigError("snapshots: row count must be even (delta/omega blocks)");
  if (s.X.cols() != s.times.size() || s.Xdot.cols() != s.times.size()) {
    throw ConfigError("snapshots: column counts must match the time vector");
  }
  if (s.Xdot.rows() != s.X.rows()) throw ConfigError("snapshots: X and Xdot row counts differ");
  if (!s.X.allFinite() || !s.Xdot.allFinite() || !s.times.allFinite()) {
    throw NumericError("snapshots: nonfinite entries");
  }
}

Eigen::MatrixXd finite_difference(const Eigen::MatrixXd& values, double dt) {
  const Eigen::Index m = values.cols();
  if (m < 3) throw ConfigError("finite differences need at least 3 samples");
  if (!(dt > 0.0)) throw ConfigError("finite differences: dt must be > 0");

  // One-sided stencils in difference form so constants differentiate to an
  // exact zero.
  Eigen::MatrixXd d(values.rows(), m);
  const double inv2h = 1.0 / (2.0 * dt);
  d.col(0) = (4.0 * (values.col(1) - values.col(0)) - (values.col(2) - values.col(0))) * inv2h;
  for (Eigen::Index k = 1; k + 1 < m; ++k) d.col(k) = (values.col(k + 1) - values.col(k - 1)) * inv2h;
  d.col(m - 1) =
      (4.0 * (values.col(m - 1) - values.col(m - 2)) - (values.col(m - 1) - values.col(m - 3))) * inv2h;
  return d;
}

namespace {

double uniform_dt(const Eigen::VectorXd& times) {
  if (times.size() < 2) throw ConfigError("snapshots: need at least 2 samples");
  const double dt = times[1] - times[0];
  for (Eigen::Index k = 1; k + 1 < times.size(); ++k) {
    const double step = times[k + 1] - times[k];
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw ConfigError("snapshots: time grid is not uniform");
    }
  }
  return dt;
}

}  // namespace

SnapshotSet assemble(const Trajectory& traj, const EffectiveNetwork& net, DerivativeMode mode) {
  if (traj.states.rows() != 2 * net.n_g) {
    throw ConfigError("assemble: trajectory dimension " + std::to_string(traj.states.rows()) +
                      " does not match 2*n_g = " + std::to_string(2 * net.n_g));
  }
  SnapshotSet s;
  s.times = traj.times;
  s.X = traj.states;

  if (mode == DerivativeMode::kExact) {
    s.Xdot.resize(s.X.rows(), s.X.cols());
    for (Eigen::Index k = 0; k < s.X.cols(); ++k) {
      s.Xdot.col(k) = vector_field_stacked(net, s.X.col(k));
    }
    s.provenance.kind = Provenance::Kind::kExactDerivatives;
  } else {
    s.Xdot = finite_difference(s.X, uniform_dt(s.times));
    s.provenance.kind = Provenance::Kind::kFiniteDifference;
  }
  validate(s);
  return s;
}

SnapshotSet add_noise(const SnapshotSet& s, double sigma_rel, std::uint64_t seed) {
  validate(s);
  if (sigma_rel < 0.0) throw ConfigError("add_noise: sigma_rel must be >= 0");

  SnapshotSet out;
  out.times = s.times;
  out.X = s.X;
  out.provenance = Provenance{Provenance::Kind::kNoisy, sigma_rel, seed};

  if (sigma_rel > 0.0) {
    Rng rng(seed);
    const Eigen::Index m = s.X.cols();
    for (Eigen::Index i = 0; i < s.X.rows(); ++i) {
      const double mean = s.X.row(i).mean();
      const double var = (s.X.row(i).array() - mean).square().sum() / static_cast<double>(m - 1);
      const double sd = sigma_rel * std::sqrt(var);
      for (Eigen::Index k = 0; k < m; ++k) out.X(i, k) += sd * rng.normal();
    }
  }
  out.Xdot = finite_difference(out.X, uniform_dt(out.times));
  return out;
}

std::filesystem::path derivative_path(const std::filesystem::path& snapshot_path) {
  std::filesystem::path p = snapshot_path;
  p.replace_filename(snapshot_path.stem().string() + "_dot" + snapshot_path.extension().string());
  return p;
}

void save_csv(const SnapshotSet& s, const std::filesystem::path& path) {
  validate(s);
  const int n = s.n_g();
  const Eigen::Index m = s.times.size();

  std::vector<std::string> header{"t"};
  for (int i = 1; i <= n; ++i) header.push_back("delta_" + std::to_string(i));
  for (int i = 1; i <= n; ++i) header.push_back("omega_" + std::to_string(i));

  Eigen::MatrixXd table(m, 1 + 2 * n);
  table.col(0) = s.times;
  table.rightCols(2 * n) = s.X.transpose();
  csv::write(path, header, table);

  std::vector<std::string> dheader{"t"};
  for (int i = 1; i <= n; ++i) dheader.push_back("ddelta_" + std::to_string(i));
  for (int i = 1; i <= n; ++i) dheader.push_back("domega_" + std::to_string(i));
  table.rightCols(2 * n) = s.Xdot.transpose();
  csv::write(derivative_path(path), dheader, table);
}

SnapshotSet load_csv(const std::filesystem::path& path) {
  const csv::Table states = csv::read(path);
  const csv::Table derivs = csv::read(derivative_path(path));
  if (states.header.empty() || states.header[0] != "t") {
    throw IoError(path.string() + ": first column must be t");
  }
  if (states.header.size() != derivs.header.size() || states.values.rows() != derivs.values.rows()) {
    throw IoError(path.string() + ": snapshot and derivative files disagree in shape");
  }
  const Eigen::Index cols = static_cast<Eigen::Index>(states.header.size()) - 1;
  if (cols < 2 || cols % 2 != 0) throw IoError(path.string() + ": expected delta/omega column blocks");

  SnapshotSet s;
  s.times = states.values.col(0);
  if ((states.values.col(0) - derivs.values.col(0)).lpNorm<Eigen::Infinity>() > 0.0) {
    throw IoError(path.string() + ": derivative file time grid differs");
  }
  s.X = states.values.rightCols(cols).transpose();
  s.Xdot = derivs.values.rightCols(cols).transpose();
  s.provenance.kind = Provenance::Kind::kExternal;
  validate(s);
  return s;
}

}  // namespace lsindy
