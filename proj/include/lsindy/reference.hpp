#pragma once

#include <Eigen/Dense>

#include "lsindy/function_library.hpp"
#include "lsindy/grid_model.hpp"

// Plain serial implementations kept alongside the parallel kernels. Tests use
// them as independent oracles and bench_kernels compares against them. They
// are written term by term with no shared code paths into the main kernels.
namespace lsindy::reference {

// Scalar evaluation of the swing dynamics, one term at a time.
Eigen::VectorXd swing_rhs(const EffectiveNetwork& net, const Eigen::VectorXd& x);

// Naive per-entry evaluation of a candidate library (no parallel loops, no
// Eigen expressions); data is d x m, result is m x p in library column order.
Eigen::MatrixXd build_library(const Eigen::MatrixXd& data, const LibrarySpec& spec);

}  // namespace lsindy::reference
