// Compares the parallel kernels against their serial reference
// implementations: swing right-hand side, candidate-library evaluation, and
// the per-coordinate regression loop.

#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lsindy/function_library.hpp"
#include "lsindy/grid_model.hpp"
#include "lsindy/metrics.hpp"
#include "lsindy/reference.hpp"
#include "lsindy/rng.hpp"
#include "lsindy/sparse_id.hpp"

namespace {

using namespace lsindy;

double time_loop(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  Stopwatch clock;
  for (int i = 0; i < reps; ++i) fn();
  return clock.seconds() / reps;
}

void print_row(const char* name, double serial_s, double parallel_s) {
  std::printf("%-28s %12.6f %12.6f %8.2fx\n", name, serial_s, parallel_s,
              parallel_s > 0 ? serial_s / parallel_s : 0.0);
}

void bench_swing_rhs(int n_g, int reps) {
  SyntheticSpec spec;
  spec.n_g = n_g;
  spec.topology = Topology::kRandomSparse;
  spec.density = 0.3;
  spec.seed = 17;
  const auto [net, eq] = generate_synthetic(spec);

  Rng rng(3);
  Eigen::VectorXd x(2 * n_g);
  for (int i = 0; i < n_g; ++i) x[i] = eq[i] + rng.uniform(-0.1, 0.1);
  for (int i = 0; i < n_g; ++i) x[n_g + i] = rng.uniform(-0.5, 0.5);

  Eigen::VectorXd sink;
  const double ts = time_loop(reps, [&] { sink = reference::swing_rhs(net, x); });
  const double tp = time_loop(reps, [&] { sink = vector_field_stacked(net, x); });
  char label[64];
  std::snprintf(label, sizeof(label), "swing_rhs n_g=%d", n_g);
  print_row(label, ts, tp);
}

void bench_library(int dim, int poly, int m) {
  Rng rng(5);
  Eigen::MatrixXd data(dim, m);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = rng.uniform(-1.0, 1.0);

  LibrarySpec spec;
  spec.poly_order = poly;
  spec.trig = TrigMode::kPerCoordinate;

  Eigen::MatrixXd sink;
  const double ts = time_loop(3, [&] { sink = reference::build_library(data, spec); });
  const double tp = time_loop(3, [&] { sink = build(data, spec).Theta; });
  char label[64];
  std::snprintf(label, sizeof(label), "library d=%d p=%d m=%d", dim, poly, m);
  print_row(label, ts, tp);
}

void bench_fit(int dim, int m) {
  Rng rng(7);
  Eigen::MatrixXd data(dim, m);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = rng.uniform(-1.0, 1.0);

  LibrarySpec spec;
  spec.poly_order = 3;
  CandidateLibrary lib = build(data, spec);

  Eigen::MatrixXd derivs(m, dim);
  for (Eigen::Index i = 0; i < derivs.size(); ++i) derivs.data()[i] = rng.uniform(-1.0, 1.0);

  RegressionConfig serial_cfg;
  serial_cfg.parallel = false;
  RegressionConfig parallel_cfg;

  SparseModel sink;
  const double ts = time_loop(3, [&] { sink = fit(lib, derivs, serial_cfg); });
  const double tp = time_loop(3, [&] { sink = fit(lib, derivs, parallel_cfg); });
  char label[64];
  std::snprintf(label, sizeof(label), "stlsq fit d=%d m=%d", dim, m);
  print_row(label, ts, tp);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled (serial build)\n");
#endif
  std::printf("%-28s %12s %12s %8s\n", "kernel", "serial [s]", "parallel [s]", "speedup");

  bench_swing_rhs(54, 200);
  bench_swing_rhs(510, 20);
  bench_library(12, 4, 501);
  bench_library(28, 3, 501);
  bench_fit(12, 501);
  bench_fit(28, 501);
  return 0;
}
