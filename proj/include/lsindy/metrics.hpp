#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <filesystem>

namespace lsindy {

enum class Block { kDelta, kOmega, kAll };

// ||truth - estimate||_F / ||truth||_F over the selected row block of a
// stacked [delta; omega] trajectory matrix. Throws on shape mismatch or a
// zero-norm truth block.
double relative_error(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate, Block block);

struct AverageSeries {
  Eigen::VectorXd avg_delta;  // mean over generators at each sample
  Eigen::VectorXd avg_omega;
};

AverageSeries average_series(const Eigen::MatrixXd& states);

// Per-sample l2 error of each block (absolute), for error-vs-time plots.
struct ErrorSeries {
  Eigen::VectorXd err_delta;
  Eigen::VectorXd err_omega;
};

ErrorSeries error_series(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Wall-clock seconds of the full-order solve vs the latent solve plus
// back-projection, measured around the solves only.
struct TimingPair {
  double fom_time_s = 0.0;
  double rom_time_s = 0.0;
};

struct EvaluationReport {
  double err_delta = 0.0;
  double err_omega = 0.0;
  // Configuration echo.
  int r = 0;
  double lambda = 0.0;
  int poly_order = 0;
  std::string trig;
};

// report.json plus the two plot CSVs (averages, per-time errors).
void write_report(const EvaluationReport& report, const std::filesystem::path& path);
void write_average_csv(const Eigen::VectorXd& times, const AverageSeries& truth,
                       const AverageSeries& estimate, const std::filesystem::path& path);
void write_error_csv(const Eigen::VectorXd& times, const ErrorSeries& errors,
                     const std::filesystem::path& path);
void write_timings(const TimingPair& timing, const std::filesystem::path& path);

}  // namespace lsindy
