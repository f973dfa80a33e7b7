// Analytic expansion of the swing dynamics over a {constant, linear,
// pairwise-difference trig} library: the coefficient matrix the regression
// should recover when the library spans the true dynamics.
//
//   ddelta_i = omega_i
//   domega_i = a_i F_i - (D_i / 2H_i) omega_i
//              - a_i sum_j K_ij [cos(g_ij) sin(d_i - d_j) - sin(g_ij) cos(d_i - d_j)]
//   with a_i = omega_R / (2 H_i), and sin(d_i - d_j) = -sin(d_j - d_i) mapped
//   onto the library's i<j column convention.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "lsindy/function_library.hpp"
#include "lsindy/grid_model.hpp"

namespace oracles {

inline int find_cos_diff(const std::vector<lsindy::Term>& terms, int a, int b) {
  const int lo = std::min(a, b), hi = std::max(a, b);
  for (std::size_t c = 0; c < terms.size(); ++c) {
    if (terms[c].kind == lsindy::Term::Kind::kCosDiff && terms[c].i == lo && terms[c].j == hi) {
      return static_cast<int>(c);
    }
  }
  return -1;
}

inline Eigen::MatrixXd expected_swing_coefficients(const lsindy::EffectiveNetwork& net,
                                                   const std::vector<lsindy::Term>& terms) {
  const int n = net.n_g;
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(terms.size()), 2 * n);

  for (int i = 0; i < n; ++i) {
    xi(lsindy::find_linear(terms, n + i), i) = 1.0;  // ddelta_i = omega_i
  }

  const int constant_col = lsindy::find_constant(terms);
  for (int i = 0; i < n; ++i) {
    const Eigen::Index eq = n + i;
    const double a = net.omega_R / (2.0 * net.H[i]);
    if (constant_col >= 0) xi(constant_col, eq) += a * net.F[i];
    xi(lsindy::find_linear(terms, n + i), eq) += -net.D[i] / (2.0 * net.H[i]);

    for (int j = 0; j < n; ++j) {
      if (j == i || net.K(i, j) == 0.0) continue;
      const double sign = (i < j) ? 1.0 : -1.0;  // sin(d_i - d_j) vs the i<j column
      const int sin_col = lsindy::find_sin_diff(terms, i, j);
      const int cos_col = find_cos_diff(terms, i, j);
      xi(sin_col, eq) += -a * net.K(i, j) * std::cos(net.gamma(i, j)) * sign;
      xi(cos_col, eq) += a * net.K(i, j) * std::sin(net.gamma(i, j));
    }
  }
  return xi;
}

}  // namespace oracles
