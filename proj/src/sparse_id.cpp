#include "lsindy/sparse_id.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "lsindy/errors.hpp"

namespace lsindy {

void validate(const RegressionConfig& cfg) {
  if (cfg.lambda < 0.0) throw ConfigError("regression: lambda must be >= 0");
  if (cfg.max_iters < 1) throw ConfigError("regression: max_iters must be >= 1");
  if (cfg.rank_tolerance < 0.0) throw ConfigError("regression: rank_tolerance must be >= 0");
}

namespace {

Eigen::VectorXd solve_active(const Eigen::MatrixXd& theta_n, const std::vector<int>& active,
                             const Eigen::VectorXd& rhs, double rank_tol) {
  Eigen::MatrixXd sub(theta_n.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t c = 0; c < active.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = theta_n.col(active[c]);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
  if (rank_tol > 0.0) cod.setThreshold(rank_tol);
  return cod.solve(rhs);
}

}  // namespace

SparseModel fit(const CandidateLibrary& lib, const Eigen::MatrixXd& derivatives,
                const RegressionConfig& cfg) {
  validate(cfg);
  if (!lib.Theta.allFinite()) throw NumericError("fit: library matrix contains nonfinite entries");
  if (!derivatives.allFinite()) throw NumericError("fit: derivative matrix contains nonfinite entries");
  if (derivatives.rows() != lib.Theta.rows()) {
    throw ConfigError("fit: derivatives have " + std::to_string(derivatives.rows()) +
                      " rows, library has " + std::to_string(lib.Theta.rows()));
  }

  const Eigen::Index p = lib.Theta.cols();
  const Eigen::Index d = derivatives.cols();

  // Unit-norm columns for the solves; coefficients are un-scaled before
  // thresholding so lambda acts on the physical values.
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
  if (cfg.normalize_columns) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (lib.column_norms[j] > 0.0) scale[j] = lib.column_norms[j];
    }
  }
  Eigen::MatrixXd theta_n = lib.Theta * scale.cwiseInverse().asDiagonal();

  // Shared full-library factorization seeds every coordinate's iteration.
  Eigen::MatrixXd w0;
  {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(theta_n);
    if (cfg.rank_tolerance > 0.0) cod.setThreshold(cfg.rank_tolerance);
    w0 = cod.solve(derivatives);
  }

  SparseModel model;
  model.Xi = Eigen::MatrixXd::Zero(p, d);
  model.terms = lib.terms;
  model.descriptors = lib.descriptors;
  model.library_spec = lib.spec;
  model.coordinate_dim = static_cast<int>(d);
  model.lambda = cfg.lambda;

  std::vector<char> emptied(static_cast<std::size_t>(d), 0);

#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
  for (Eigen::Index k = 0; k < d; ++k) {
    std::vector<int> active(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) active[static_cast<std::size_t>(j)] = static_cast<int>(j);
    Eigen::VectorXd w = w0.col(k);

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
      std::vector<int> keep;
      keep.reserve(active.size());
      for (std::size_t c = 0; c < active.size(); ++c) {
        const double xi = w[static_cast<Eigen::Index>(c)] / scale[active[c]];
        if (std::abs(xi) >= cfg.lambda) keep.push_back(active[c]);
      }
      if (keep.empty()) {
        active.clear();
        break;
      }
      if (keep.size() == active.size()) break;  // stable
      active = std::move(keep);
      w = solve_active(theta_n, active, derivatives.col(k), cfg.rank_tolerance);
    }

    if (active.empty()) {
      emptied[static_cast<std::size_t>(k)] = 1;
      continue;
    }
    for (std::size_t c = 0; c < active.size(); ++c) {
      const double xi = w[static_cast<Eigen::Index>(c)] / scale[active[c]];
      // Final guard keeps the post-threshold sparsity invariant even when the
      // iteration budget ran out before the active set settled.
      if (std::abs(xi) >= cfg.lambda) model.Xi(active[c], k) = xi;
    }
  }

  for (Eigen::Index k = 0; k < d; ++k) {
    if (emptied[static_cast<std::size_t>(k)]) model.empty_columns.push_back(static_cast<int>(k));
  }
  if (!model.Xi.allFinite()) throw NumericError("fit: coefficients are nonfinite");
  return model;
}

Eigen::VectorXd predict_derivative(const SparseModel& model, const Eigen::VectorXd& state) {
  if (state.size() != model.coordinate_dim) {
    throw ConfigError("predict: state dimension " + std::to_string(state.size()) +
                      " does not match model dimension " + std::to_string(model.coordinate_dim));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.coordinate_dim);
  for (std::size_t j = 0; j < model.terms.size(); ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    if (model.Xi.row(row).isZero(0.0)) continue;
    const double theta = evaluate_term(model.terms[j], state, model.library_spec.trig_frequency);
    out += theta * model.Xi.row(row).transpose();
  }
  if (!out.allFinite()) throw NumericError("predict: nonfinite derivative");
  return out;
}

ModelTrajectory simulate_model(const SparseModel& model, const Eigen::VectorXd& z0,
                               const IntegrationConfig& cfg) {
  if (z0.size() != model.coordinate_dim) {
    throw ConfigError("simulate_model: initial state dimension mismatch");
  }

  // Model term rows with any active coefficient, evaluated per step.
  std::vector<int> active_rows;
  for (std::size_t j = 0; j < model.terms.size(); ++j) {
    if (!model.Xi.row(static_cast<Eigen::Index>(j)).isZero(0.0)) active_rows.push_back(static_cast<int>(j));
  }

  const auto rhs = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(model.coordinate_dim);
    for (int j : active_rows) {
      const double theta = evaluate_term(model.terms[static_cast<std::size_t>(j)], z,
                                         model.library_spec.trig_frequency);
      out += theta * model.Xi.row(j).transpose();
    }
    return out;
  };

  ModelTrajectory result;
  result.trajectory = integrate(rhs, z0, cfg);
  if (model.basis) {
    Trajectory full;
    full.times = result.trajectory.times;
    full.states = reconstruct(result.trajectory.states, *model.basis);
    result.reconstructed = std::move(full);
  }
  return result;
}

std::vector<HDEstimate> estimate_HD(const SparseModel& model, const EffectiveNetwork& structure,
                                    double c0_tolerance) {
  if (model.basis) {
    throw ConfigError("estimate_HD: latent models are not supported; identify in full-state coordinates");
  }
  const int n = structure.n_g;
  if (model.coordinate_dim != 2 * n) {
    throw ConfigError("estimate_HD: model dimension does not match the network");
  }
  if (model.library_spec.trig != TrigMode::kPairwiseDifference ||
      model.library_spec.trig_frequency != 1.0) {
    throw ConfigError("estimate_HD: model must use unit-frequency pairwise-difference trig terms");
  }

  const int constant_col = find_constant(model.terms);
  std::vector<HDEstimate> out(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    HDEstimate& est = out[static_cast<std::size_t>(i)];
    const Eigen::Index eq = n + i;  // omega-dot coordinate of generator i

    const double c0 = (constant_col >= 0) ? model.Xi(constant_col, eq) : 0.0;
    const int cw_col = find_linear(model.terms, n + i);
    const double cw = (cw_col >= 0) ? model.Xi(cw_col, eq) : 0.0;

    double h = 0.0;
    if (structure.F[i] != 0.0 && std::abs(c0) >= c0_tolerance) {
      h = structure.omega_R * structure.F[i] / (2.0 * c0);
      est.route = "constant";
    } else {
      // Strongest-neighbor sin-difference coefficient.
      int best = -1;
      for (int j = 0; j < n; ++j) {
        if (j == i || structure.K(i, j) <= 0.0) continue;
        if (best < 0 || structure.K(i, j) > structure.K(i, best)) best = j;
      }
      if (best < 0) continue;  // isolated and unforced: unrecoverable
      const int col = find_sin_diff(model.terms, i, best);
      if (col < 0) continue;
      const double coef = model.Xi(col, eq);
      if (std::abs(coef) < c0_tolerance) continue;
      h = structure.omega_R * structure.K(i, best) * std::cos(structure.gamma(i, best)) /
          (2.0 * std::abs(coef));
      est.route = "coupling";
    }

    if (!std::isfinite(h) || h <= 0.0) {
      est.route.clear();
      continue;
    }
    est.recoverable = true;
    est.H = h;
    est.D = -2.0 * h * cw;
  }
  return out;
}

namespace {

using nlohmann::json;

json library_spec_to_json(const LibrarySpec& spec) {
  json j;
  j["poly_order"] = spec.poly_order;
  j["include_constant"] = spec.include_constant;
  j["trig"] = trig_mode_to_string(spec.trig);
  j["trig_frequency"] = spec.trig_frequency;
  j["trig_coordinates"] = spec.trig_coordinates;
  j["poly_coordinates"] = spec.poly_coordinates;
  j["coordinate_names"] = spec.coordinate_names;
  j["memory_budget_mb"] = spec.memory_budget_mb;
  return j;
}

LibrarySpec library_spec_from_json(const json& j) {
  LibrarySpec spec;
  spec.poly_order = j.at("poly_order").get<int>();
  spec.include_constant = j.at("include_constant").get<bool>();
  spec.trig = trig_mode_from_string(j.at("trig").get<std::string>());
  spec.trig_frequency = j.at("trig_frequency").get<double>();
  spec.trig_coordinates = j.at("trig_coordinates").get<std::vector<int>>();
  spec.poly_coordinates = j.at("poly_coordinates").get<std::vector<int>>();
  spec.coordinate_names = j.at("coordinate_names").get<std::vector<std::string>>();
  spec.memory_budget_mb = j.at("memory_budget_mb").get<double>();
  return spec;
}

}  // namespace

void save_model_json(const SparseModel& model, const std::filesystem::path& path,
                     const std::string& basis_filename) {
  json j;
  j["coordinate_dim"] = model.coordinate_dim;
  j["lambda"] = model.lambda;
  j["library"] = library_spec_to_json(model.library_spec);
  j["descriptors"] = model.descriptors;
  j["empty_columns"] = model.empty_columns;

  json coeffs = json::array();
  for (Eigen::Index r = 0; r < model.Xi.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.Xi.cols(); ++c) {
      if (model.Xi(r, c) != 0.0) coeffs.push_back({r, c, model.Xi(r, c)});
    }
  }
  j["coefficients"] = std::move(coeffs);

  if (model.basis) {
    j["basis_file"] = basis_filename;
    save_basis_csv(*model.basis, path.parent_path() / basis_filename);
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

SparseModel load_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("model file " + path.string() + ": " + e.what());
  }

  SparseModel model;
  model.coordinate_dim = j.at("coordinate_dim").get<int>();
  model.lambda = j.at("lambda").get<double>();
  model.library_spec = library_spec_from_json(j.at("library"));
  model.empty_columns = j.at("empty_columns").get<std::vector<int>>();

  model.terms = enumerate_terms(model.coordinate_dim, model.library_spec);
  model.descriptors = term_descriptors(model.coordinate_dim, model.library_spec, model.terms);
  const auto stored = j.at("descriptors").get<std::vector<std::string>>();
  if (stored != model.descriptors) {
    throw ConfigError("model file " + path.string() + ": descriptors do not match the library spec");
  }

  model.Xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.terms.size()), model.coordinate_dim);
  for (const auto& triple : j.at("coefficients")) {
    if (!triple.is_array() || triple.size() != 3) {
      throw ConfigError("model file: coefficient entries must be [row, col, value]");
    }
    const auto r = triple[0].get<Eigen::Index>();
    const auto c = triple[1].get<Eigen::Index>();
    if (r < 0 || r >= model.Xi.rows() || c < 0 || c >= model.Xi.cols()) {
      throw ConfigError("model file: coefficient index out of range");
    }
    model.Xi(r, c) = triple[2].get<double>();
  }

  if (j.contains("basis_file")) {
    model.basis = load_basis_csv(path.parent_path() / j.at("basis_file").get<std::string>());
    if (model.basis->Phi.cols() != model.coordinate_dim) {
      throw ConfigError("model file: basis rank does not match coordinate_dim");
    }
  }
  return model;
}

}  // namespace lsindy
