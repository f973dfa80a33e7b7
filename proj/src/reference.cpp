#include "lsindy/reference.hpp"

#include <cmath>

#include "lsindy/errors.hpp"

namespace lsindy::reference {

Eigen::VectorXd swing_rhs(const EffectiveNetwork& net, const Eigen::VectorXd& x) {
  const int n = net.n_g;
  if (x.size() != 2 * n) throw ConfigError("reference swing_rhs: state dimension mismatch");

  Eigen::VectorXd out(2 * n);
  for (int i = 0; i < n; ++i) {
    out[i] = x[n + i];
  }
  for (int i = 0; i < n; ++i) {
    double rhs = net.F[i];
    rhs -= net.D[i] / net.omega_R * x[n + i];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      rhs -= net.K(i, j) * std::sin(x[i] - x[j] - net.gamma(i, j));
    }
    out[n + i] = net.omega_R / (2.0 * net.H[i]) * rhs;
  }
  return out;
}

Eigen::MatrixXd build_library(const Eigen::MatrixXd& data, const LibrarySpec& spec) {
  const int dim = static_cast<int>(data.rows());
  const std::vector<Term> terms = enumerate_terms(dim, spec);
  const Eigen::Index m = data.cols();

  Eigen::MatrixXd theta(m, static_cast<Eigen::Index>(terms.size()));
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::VectorXd state = data.col(k);
    for (std::size_t c = 0; c < terms.size(); ++c) {
      theta(k, static_cast<Eigen::Index>(c)) = evaluate_term(terms[c], state, spec.trig_frequency);
    }
  }
  return theta;
}

}  // namespace lsindy::reference
