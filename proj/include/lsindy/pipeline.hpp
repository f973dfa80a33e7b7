#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lsindy/function_library.hpp"
#include "lsindy/grid_model.hpp"
#include "lsindy/metrics.hpp"
#include "lsindy/ode.hpp"
#include "lsindy/reduction.hpp"
#include "lsindy/snapshots.hpp"
#include "lsindy/sparse_id.hpp"

namespace lsindy {

struct NetworkSource {
  enum class Kind { kFile, kSynthetic };
  Kind kind = Kind::kSynthetic;
  std::filesystem::path file;
  SyntheticSpec synthetic;
};

struct DisturbanceSpec {
  double angle_magnitude = 0.1;      // rad, uniform per generator
  double frequency_magnitude = 0.0;  // rad/s
  std::uint64_t seed = 1;
  // When nonempty (length n_g), these deterministic per-generator angle
  // offsets replace the seeded random draw.
  std::vector<double> angle_offsets;
};

struct NoiseSpec {
  double sigma_rel = 0.0;
  std::uint64_t seed = 2;
};

struct ReductionSpec {
  enum class Kind { kEnergy, kFixedRank, kFullState };
  Kind kind = Kind::kEnergy;
  double tau = 0.999;
  int r = 0;
  bool center = false;
};

// Input ledger for the whole identification pipeline. Every field has a
// default; all randomness flows from the three seeds.
struct PipelineConfig {
  NetworkSource network;
  DisturbanceSpec disturbance;
  IntegrationConfig integration;
  DerivativeMode derivative_mode = DerivativeMode::kExact;
  NoiseSpec noise;
  ReductionSpec reduction;
  LibrarySpec library;
  RegressionConfig regression;
  std::filesystem::path out_dir = "out";
  bool quiet = false;
};

// JSON config with defaults for every field; unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig default_config();

// Derived file locations inside the output directory.
struct OutputPaths {
  std::filesystem::path network, snapshots, model, basis, spectrum, prediction, report, averages,
      errors, timings, hd_estimates;
};
OutputPaths output_paths(const std::filesystem::path& out_dir);

// Stage commands; each consumes/produces files in cfg.out_dir so the pipeline
// is literally the composition of the stages. simulate and predict return the
// wall-clock seconds spent inside the solve.
void cmd_gen(const PipelineConfig& cfg);
double cmd_simulate(const PipelineConfig& cfg);
void cmd_identify(const PipelineConfig& cfg);
double cmd_predict(const PipelineConfig& cfg);
EvaluationReport cmd_evaluate(const PipelineConfig& cfg);
EvaluationReport cmd_pipeline(const PipelineConfig& cfg);

}  // namespace lsindy
