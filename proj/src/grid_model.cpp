#include "lsindy/grid_model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lsindy/csv.hpp"
#include "lsindy/errors.hpp"
#include "lsindy/rng.hpp"

namespace lsindy {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void validate(const EffectiveNetwork& net) {
  require(net.n_g >= 1, "n_g must be >= 1");
  require(net.omega_R > 0.0 && std::isfinite(net.omega_R), "omega_R must be > 0");
  require(net.H.size() == net.n_g, "H must have length n_g");
  require(net.D.size() == net.n_g, "D must have length n_g");
  require(net.F.size() == net.n_g, "F must have length n_g");
  require(net.K.rows() == net.n_g && net.K.cols() == net.n_g, "K must be n_g x n_g");
  require(net.gamma.rows() == net.n_g && net.gamma.cols() == net.n_g, "gamma must be n_g x n_g");
  for (int i = 0; i < net.n_g; ++i) {
    require(std::isfinite(net.H[i]) && net.H[i] > 0.0, "H[" + std::to_string(i) + "] must be > 0");
    require(std::isfinite(net.D[i]) && net.D[i] >= 0.0, "D[" + std::to_string(i) + "] must be >= 0");
    require(std::isfinite(net.F[i]), "F[" + std::to_string(i) + "] must be finite");
  }
  for (int i = 0; i < net.n_g; ++i) {
    for (int j = 0; j < net.n_g; ++j) {
      if (i == j) continue;
      const std::string ij = "[" + std::to_string(i) + "," + std::to_string(j) + "]";
      require(std::isfinite(net.K(i, j)) && net.K(i, j) >= 0.0, "K" + ij + " must be >= 0");
      require(std::isfinite(net.gamma(i, j)), "gamma" + ij + " must be finite");
      // K and gamma share a sparsity pattern: a phase shift without a coupling
      // has no meaning in the model.
      require(!(net.K(i, j) == 0.0 && net.gamma(i, j) != 0.0),
              "gamma" + ij + " is nonzero where K" + ij + " is zero (sparsity mismatch)");
    }
  }
}

namespace {

void check_state(const EffectiveNetwork& net, const GridState& s) {
  if (s.delta.size() != net.n_g || s.omega.size() != net.n_g) {
    throw ConfigError("state dimension " + std::to_string(s.delta.size()) + "/" +
                      std::to_string(s.omega.size()) + " does not match n_g = " + std::to_string(net.n_g));
  }
  if (!s.delta.allFinite() || !s.omega.allFinite()) throw NumericError("nonfinite state rejected");
}

}  // namespace

GridState vector_field(const EffectiveNetwork& net, const GridState& s) {
  check_state(net, s);
  const int n = net.n_g;
  GridState out;
  out.delta = s.omega;
  out.omega.resize(n);

  const double* delta = s.delta.data();
  const double* omega = s.omega.data();
  double* domega = out.omega.data();

#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double coupling = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double k = net.K(i, j);
      if (k == 0.0) continue;
      coupling += k * std::sin(delta[i] - delta[j] - net.gamma(i, j));
    }
    domega[i] = net.omega_R / (2.0 * net.H[i]) *
                (net.F[i] - net.D[i] / net.omega_R * omega[i] - coupling);
  }

  if (!out.omega.allFinite()) throw NumericError("vector field produced nonfinite output");
  return out;
}

Eigen::VectorXd vector_field_stacked(const EffectiveNetwork& net, const Eigen::VectorXd& x) {
  const int n = net.n_g;
  if (x.size() != 2 * n) {
    throw ConfigError("stacked state has length " + std::to_string(x.size()) + ", expected " +
                      std::to_string(2 * n));
  }
  GridState s{x.head(n), x.tail(n)};
  GridState d = vector_field(net, s);
  Eigen::VectorXd out(2 * n);
  out.head(n) = d.delta;
  out.tail(n) = d.omega;
  return out;
}

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
  require(spec.n_g >= 1, "synthetic spec: n_g must be >= 1");
  require(spec.omega_R > 0.0, "synthetic spec: omega_R must be > 0");
  const auto check_range = [](const std::array<double, 2>& r, const std::string& name, double lower_min) {
    require(r[1] >= r[0], "synthetic spec: " + name + " range upper < lower");
    require(r[0] >= lower_min, "synthetic spec: " + name + " range lower bound too small");
  };
  check_range(spec.ranges.H, "H", 1e-12);
  check_range(spec.ranges.D, "D", 0.0);
  check_range(spec.ranges.K, "K", 0.0);
  require(spec.ranges.gamma[1] >= spec.ranges.gamma[0], "synthetic spec: gamma range upper < lower");
  require(spec.ranges.equilibrium_angle[1] >= spec.ranges.equilibrium_angle[0],
          "synthetic spec: equilibrium_angle range upper < lower");
  if (spec.topology == Topology::kRandomSparse) {
    require(spec.density > 0.0 && spec.density <= 1.0, "synthetic spec: density must be in (0,1]");
  }

  const int n = spec.n_g;
  Rng rng(spec.seed);

  EffectiveNetwork net;
  net.n_g = n;
  net.omega_R = spec.omega_R;
  net.H.resize(n);
  net.D.resize(n);
  net.F = Eigen::VectorXd::Zero(n);
  net.K = Eigen::MatrixXd::Zero(n, n);
  net.gamma = Eigen::MatrixXd::Zero(n, n);

  for (int i = 0; i < n; ++i) net.H[i] = rng.uniform(spec.ranges.H[0], spec.ranges.H[1]);
  for (int i = 0; i < n; ++i) net.D[i] = rng.uniform(spec.ranges.D[0], spec.ranges.D[1]);

  // Symmetric couplings on the selected edges.
  std::vector<std::pair<int, int>> edges;
  if (n >= 2) {
    if (spec.topology == Topology::kRing) {
      if (n == 2) {
        edges.emplace_back(0, 1);
      } else {
        for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
      }
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (rng.uniform01() < spec.density) edges.emplace_back(i, j);
    }
  }
  for (auto [i, j] : edges) {
    const double k = rng.uniform(spec.ranges.K[0], spec.ranges.K[1]);
    const double g = rng.uniform(spec.ranges.gamma[0], spec.ranges.gamma[1]);
    net.K(i, j) = net.K(j, i) = k;
    net.gamma(i, j) = net.gamma(j, i) = g;
  }

  // Balance F against a drawn target equilibrium so the network has a known
  // synchronous operating point.
  Eigen::VectorXd delta_star(n);
  for (int i = 0; i < n; ++i)
    delta_star[i] = rng.uniform(spec.ranges.equilibrium_angle[0], spec.ranges.equilibrium_angle[1]);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || net.K(i, j) == 0.0) continue;
      s += net.K(i, j) * std::sin(delta_star[i] - delta_star[j] - net.gamma(i, j));
    }
    net.F[i] = s;
  }

  validate(net);
  return SyntheticResult{std::move(net), std::move(delta_star)};
}

namespace {

// Residual of the angle subsystem at omega = 0: g_i(delta) = F_i - sum_j K_ij sin(...).
Eigen::VectorXd angle_residual(const EffectiveNetwork& net, const Eigen::VectorXd& delta) {
  const int n = net.n_g;
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || net.K(i, j) == 0.0) continue;
      s += net.K(i, j) * std::sin(delta[i] - delta[j] - net.gamma(i, j));
    }
    g[i] = net.F[i] - s;
  }
  return g;
}

}  // namespace

Eigen::VectorXd find_equilibrium(const EffectiveNetwork& net, const Eigen::VectorXd& guess,
                                 double tol, int max_iters) {
  validate(net);
  if (guess.size() != net.n_g) throw ConfigError("equilibrium guess dimension mismatch");
  const int n = net.n_g;

  Eigen::VectorXd delta = guess;
  Eigen::VectorXd g = angle_residual(net, delta);

  for (int iter = 0; iter < max_iters; ++iter) {
    const double rnorm = g.lpNorm<Eigen::Infinity>();
    if (rnorm < tol) return delta;

    // Jacobian of the residual; singular along the all-ones direction
    // (angle translation invariance), so the step is the min-norm solution.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i || net.K(i, j) == 0.0) continue;
        const double c = net.K(i, j) * std::cos(delta[i] - delta[j] - net.gamma(i, j));
        J(i, i) -= c;
        J(i, j) += c;
      }
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
    Eigen::VectorXd step = cod.solve(-g);
    if (!step.allFinite()) throw NumericError("equilibrium Newton step is nonfinite");

    // Backtracking line search on the residual norm.
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      Eigen::VectorXd trial = delta + alpha * step;
      Eigen::VectorXd gt = angle_residual(net, trial);
      if (gt.lpNorm<Eigen::Infinity>() < rnorm) {
        delta = std::move(trial);
        g = std::move(gt);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }

  if (g.lpNorm<Eigen::Infinity>() < tol) return delta;
  throw NumericError("equilibrium search did not converge (residual " +
                     std::to_string(g.lpNorm<Eigen::Infinity>()) + ")");
}

Eigen::VectorXd find_equilibrium(const EffectiveNetwork& net) {
  return find_equilibrium(net, Eigen::VectorXd::Zero(net.n_g));
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

Eigen::VectorXd parse_vector(const json& j, const std::string& name, int expect) {
  if (!j.is_array()) throw ConfigError("network file: " + name + " must be an array");
  if (static_cast<int>(j.size()) != expect) {
    throw ConfigError("network file: " + name + " must have length n_g = " + std::to_string(expect));
  }
  Eigen::VectorXd v(expect);
  for (int i = 0; i < expect; ++i) {
    if (!j[i].is_number()) throw ConfigError("network file: " + name + "[" + std::to_string(i) + "] must be a number");
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace

EffectiveNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("network file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("network file: top level must be an object");
  reject_unknown_keys(j, {"n_g", "omega_R", "H", "D", "F", "coupling"}, "network file");
  for (const char* key : {"n_g", "omega_R", "H", "D", "F", "coupling"}) {
    if (!j.contains(key)) throw ConfigError(std::string("network file: missing key '") + key + "'");
  }

  EffectiveNetwork net;
  if (!j["n_g"].is_number_integer()) throw ConfigError("network file: n_g must be an integer");
  net.n_g = j["n_g"].get<int>();
  if (net.n_g < 1) throw ConfigError("network file: n_g must be >= 1");
  if (!j["omega_R"].is_number()) throw ConfigError("network file: omega_R must be a number");
  net.omega_R = j["omega_R"].get<double>();
  net.H = parse_vector(j["H"], "H", net.n_g);
  net.D = parse_vector(j["D"], "D", net.n_g);
  net.F = parse_vector(j["F"], "F", net.n_g);
  net.K = Eigen::MatrixXd::Zero(net.n_g, net.n_g);
  net.gamma = Eigen::MatrixXd::Zero(net.n_g, net.n_g);

  if (!j["coupling"].is_array()) throw ConfigError("network file: coupling must be an array");
  std::set<std::pair<int, int>> seen;
  for (std::size_t e = 0; e < j["coupling"].size(); ++e) {
    const json& entry = j["coupling"][e];
    const std::string where = "network file: coupling[" + std::to_string(e) + "]";
    if (!entry.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown_keys(entry, {"i", "j", "K", "gamma"}, where);
    for (const char* key : {"i", "j", "K", "gamma"}) {
      if (!entry.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    }
    if (!entry["i"].is_number_integer() || !entry["j"].is_number_integer()) {
      throw ConfigError(where + ": i and j must be integers");
    }
    const int i = entry["i"].get<int>();
    const int jj = entry["j"].get<int>();
    if (i < 0 || i >= net.n_g || jj < 0 || jj >= net.n_g) throw ConfigError(where + ": index out of range");
    if (i == jj) throw ConfigError(where + ": i == j not allowed");
    if (!seen.insert({i, jj}).second) throw ConfigError(where + ": duplicate (i, j) pair");
    net.K(i, jj) = entry["K"].get<double>();
    net.gamma(i, jj) = entry["gamma"].get<double>();
  }

  validate(net);
  return net;
}

void save_network(const EffectiveNetwork& net, const std::filesystem::path& path) {
  validate(net);
  json j;
  j["n_g"] = net.n_g;
  j["omega_R"] = net.omega_R;
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["H"] = vec(net.H);
  j["D"] = vec(net.D);
  j["F"] = vec(net.F);
  json coupling = json::array();
  for (int i = 0; i < net.n_g; ++i) {
    for (int jj = 0; jj < net.n_g; ++jj) {
      if (i == jj) continue;
      if (net.K(i, jj) == 0.0 && net.gamma(i, jj) == 0.0) continue;
      coupling.push_back({{"i", i}, {"j", jj}, {"K", net.K(i, jj)}, {"gamma", net.gamma(i, jj)}});
    }
  }
  j["coupling"] = std::move(coupling);

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace lsindy
