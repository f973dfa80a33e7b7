#include "lsindy/metrics.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "lsindy/csv.hpp"
#include "lsindy/errors.hpp"

namespace lsindy {

namespace {

Eigen::MatrixXd select_block(const Eigen::MatrixXd& states, Block block) {
  const Eigen::Index n = states.rows() / 2;
  switch (block) {
    case Block::kDelta:
      return states.topRows(n);
    case Block::kOmega:
      return states.bottomRows(n);
    case Block::kAll:
      return states;
  }
  return states;
}

}  // namespace

double relative_error(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate, Block block) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw ConfigError("relative_error: shape mismatch (" + std::to_string(truth.rows()) + "x" +
                      std::to_string(truth.cols()) + " vs " + std::to_string(estimate.rows()) + "x" +
                      std::to_string(estimate.cols()) + ")");
  }
  if (block != Block::kAll && truth.rows() % 2 != 0) {
    throw ConfigError("relative_error: block selection needs an even row count");
  }
  const Eigen::MatrixXd t = select_block(truth, block);
  const Eigen::MatrixXd e = select_block(estimate, block);
  const double denom = t.norm();
  if (denom == 0.0) throw NumericError("relative_error: truth block has zero norm");
  return (t - e).norm() / denom;
}

AverageSeries average_series(const Eigen::MatrixXd& states) {
  if (states.rows() % 2 != 0) throw ConfigError("average_series: even row count required");
  const Eigen::Index n = states.rows() / 2;
  AverageSeries s;
  s.avg_delta = states.topRows(n).colwise().mean();
  s.avg_omega = states.bottomRows(n).colwise().mean();
  return s;
}

ErrorSeries error_series(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw ConfigError("error_series: shape mismatch");
  }
  const Eigen::Index n = truth.rows() / 2;
  ErrorSeries e;
  e.err_delta = (truth.topRows(n) - estimate.topRows(n)).colwise().norm();
  e.err_omega = (truth.bottomRows(n) - estimate.bottomRows(n)).colwise().norm();
  return e;
}

void write_report(const EvaluationReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["err_delta"] = report.err_delta;
  j["err_omega"] = report.err_omega;
  j["r"] = report.r;
  j["lambda"] = report.lambda;
  j["poly_order"] = report.poly_order;
  j["trig"] = report.trig;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

void write_average_csv(const Eigen::VectorXd& times, const AverageSeries& truth,
                       const AverageSeries& estimate, const std::filesystem::path& path) {
  Eigen::MatrixXd table(times.size(), 5);
  table.col(0) = times;
  table.col(1) = truth.avg_delta;
  table.col(2) = estimate.avg_delta;
  table.col(3) = truth.avg_omega;
  table.col(4) = estimate.avg_omega;
  csv::write(path, {"t", "avg_delta_true", "avg_delta_est", "avg_domega_true", "avg_domega_est"}, table);
}

void write_error_csv(const Eigen::VectorXd& times, const ErrorSeries& errors,
                     const std::filesystem::path& path) {
  Eigen::MatrixXd table(times.size(), 3);
  table.col(0) = times;
  table.col(1) = errors.err_delta;
  table.col(2) = errors.err_omega;
  csv::write(path, {"t", "err_delta", "err_omega"}, table);
}

void write_timings(const TimingPair& timing, const std::filesystem::path& path) {
  nlohmann::json j;
  j["fom_time_s"] = timing.fom_time_s;
  j["rom_time_s"] = timing.rom_time_s;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace lsindy
