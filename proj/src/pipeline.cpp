#include "lsindy/pipeline.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include <nlohmann/json.hpp>

#include "lsindy/csv.hpp"
#include "lsindy/errors.hpp"
#include "lsindy/rng.hpp"

namespace lsindy {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
  }
}

std::array<double, 2> parse_range(const json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("config: " + name + " must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

void parse_synthetic(const json& j, SyntheticSpec& spec) {
  reject_unknown(j, {"n_g", "topology", "density", "seed", "omega_R", "ranges"}, "network.synthetic");
  if (j.contains("n_g")) spec.n_g = j["n_g"].get<int>();
  if (j.contains("topology")) {
    const auto t = j["topology"].get<std::string>();
    if (t == "ring") {
      spec.topology = Topology::kRing;
    } else if (t == "random_sparse") {
      spec.topology = Topology::kRandomSparse;
    } else {
      throw ConfigError("config: unknown topology '" + t + "'");
    }
  }
  if (j.contains("density")) spec.density = j["density"].get<double>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("omega_R")) spec.omega_R = j["omega_R"].get<double>();
  if (j.contains("ranges")) {
    const json& r = j["ranges"];
    reject_unknown(r, {"H", "D", "K", "gamma", "equilibrium_angle"}, "network.synthetic.ranges");
    if (r.contains("H")) spec.ranges.H = parse_range(r["H"], "ranges.H");
    if (r.contains("D")) spec.ranges.D = parse_range(r["D"], "ranges.D");
    if (r.contains("K")) spec.ranges.K = parse_range(r["K"], "ranges.K");
    if (r.contains("gamma")) spec.ranges.gamma = parse_range(r["gamma"], "ranges.gamma");
    if (r.contains("equilibrium_angle")) {
      spec.ranges.equilibrium_angle = parse_range(r["equilibrium_angle"], "ranges.equilibrium_angle");
    }
  }
}

}  // namespace

PipelineConfig default_config() { return PipelineConfig{}; }

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  reject_unknown(j,
                 {"network", "disturbance", "integration", "derivative_mode", "noise", "reduction",
                  "library", "regression", "output_dir"},
                 "top level");

  PipelineConfig cfg;

  if (j.contains("network")) {
    const json& n = j["network"];
    reject_unknown(n, {"file", "synthetic"}, "network");
    if (n.contains("file") && n.contains("synthetic")) {
      throw ConfigError("config: network must have exactly one of 'file' or 'synthetic'");
    }
    if (n.contains("file")) {
      cfg.network.kind = NetworkSource::Kind::kFile;
      cfg.network.file = n["file"].get<std::string>();
    } else if (n.contains("synthetic")) {
      cfg.network.kind = NetworkSource::Kind::kSynthetic;
      parse_synthetic(n["synthetic"], cfg.network.synthetic);
    }
  }

  if (j.contains("disturbance")) {
    const json& d = j["disturbance"];
    reject_unknown(d, {"angle_magnitude", "frequency_magnitude", "seed", "angle_offsets"}, "disturbance");
    if (d.contains("angle_magnitude")) cfg.disturbance.angle_magnitude = d["angle_magnitude"].get<double>();
    if (d.contains("frequency_magnitude")) {
      cfg.disturbance.frequency_magnitude = d["frequency_magnitude"].get<double>();
    }
    if (d.contains("seed")) cfg.disturbance.seed = d["seed"].get<std::uint64_t>();
    if (d.contains("angle_offsets")) cfg.disturbance.angle_offsets = d["angle_offsets"].get<std::vector<double>>();
  }

  if (j.contains("integration")) {
    const json& i = j["integration"];
    reject_unknown(i, {"t0", "t_end", "dt_sample", "rel_tol", "abs_tol", "max_steps", "max_step_size"},
                   "integration");
    if (i.contains("t0")) cfg.integration.t0 = i["t0"].get<double>();
    if (i.contains("t_end")) cfg.integration.t_end = i["t_end"].get<double>();
    if (i.contains("dt_sample")) cfg.integration.dt_sample = i["dt_sample"].get<double>();
    if (i.contains("rel_tol")) cfg.integration.rel_tol = i["rel_tol"].get<double>();
    if (i.contains("abs_tol")) cfg.integration.abs_tol = i["abs_tol"].get<double>();
    if (i.contains("max_steps")) cfg.integration.max_steps = i["max_steps"].get<long>();
    if (i.contains("max_step_size")) cfg.integration.max_step_size = i["max_step_size"].get<double>();
  }

  if (j.contains("derivative_mode")) {
    const auto m = j["derivative_mode"].get<std::string>();
    if (m == "exact") {
      cfg.derivative_mode = DerivativeMode::kExact;
    } else if (m == "finite_difference") {
      cfg.derivative_mode = DerivativeMode::kFiniteDifference;
    } else {
      throw ConfigError("config: unknown derivative_mode '" + m + "'");
    }
  }

  if (j.contains("noise")) {
    const json& n = j["noise"];
    reject_unknown(n, {"sigma_rel", "seed"}, "noise");
    if (n.contains("sigma_rel")) cfg.noise.sigma_rel = n["sigma_rel"].get<double>();
    if (n.contains("seed")) cfg.noise.seed = n["seed"].get<std::uint64_t>();
  }

  if (j.contains("reduction")) {
    const json& r = j["reduction"];
    reject_unknown(r, {"criterion", "tau", "r", "center"}, "reduction");
    if (r.contains("criterion")) {
      const auto c = r["criterion"].get<std::string>();
      if (c == "energy") {
        cfg.reduction.kind = ReductionSpec::Kind::kEnergy;
      } else if (c == "fixed_rank") {
        cfg.reduction.kind = ReductionSpec::Kind::kFixedRank;
      } else if (c == "none") {
        cfg.reduction.kind = ReductionSpec::Kind::kFullState;
      } else {
        throw ConfigError("config: unknown reduction criterion '" + c + "'");
      }
    }
    if (r.contains("tau")) cfg.reduction.tau = r["tau"].get<double>();
    if (r.contains("r")) cfg.reduction.r = r["r"].get<int>();
    if (r.contains("center")) cfg.reduction.center = r["center"].get<bool>();
  }

  if (j.contains("library")) {
    const json& l = j["library"];
    reject_unknown(l, {"poly_order", "include_constant", "trig", "trig_frequency", "memory_budget_mb"},
                   "library");
    if (l.contains("poly_order")) cfg.library.poly_order = l["poly_order"].get<int>();
    if (l.contains("include_constant")) cfg.library.include_constant = l["include_constant"].get<bool>();
    if (l.contains("trig")) cfg.library.trig = trig_mode_from_string(l["trig"].get<std::string>());
    if (l.contains("trig_frequency")) cfg.library.trig_frequency = l["trig_frequency"].get<double>();
    if (l.contains("memory_budget_mb")) cfg.library.memory_budget_mb = l["memory_budget_mb"].get<double>();
  }

  if (j.contains("regression")) {
    const json& r = j["regression"];
    reject_unknown(r, {"lambda", "max_iters", "normalize_columns", "rank_tolerance", "parallel"},
                   "regression");
    if (r.contains("lambda")) cfg.regression.lambda = r["lambda"].get<double>();
    if (r.contains("max_iters")) cfg.regression.max_iters = r["max_iters"].get<int>();
    if (r.contains("normalize_columns")) cfg.regression.normalize_columns = r["normalize_columns"].get<bool>();
    if (r.contains("rank_tolerance")) cfg.regression.rank_tolerance = r["rank_tolerance"].get<double>();
    if (r.contains("parallel")) cfg.regression.parallel = r["parallel"].get<bool>();
  }

  if (j.contains("output_dir")) cfg.out_dir = j["output_dir"].get<std::string>();
  return cfg;
}

OutputPaths output_paths(const std::filesystem::path& out_dir) {
  OutputPaths p;
  p.network = out_dir / "network.json";
  p.snapshots = out_dir / "snapshots.csv";
  p.model = out_dir / "model.json";
  p.basis = out_dir / "basis.csv";
  p.spectrum = out_dir / "spectrum.csv";
  p.prediction = out_dir / "prediction.csv";
  p.report = out_dir / "report.json";
  p.averages = out_dir / "averages.csv";
  p.errors = out_dir / "errors.csv";
  p.timings = out_dir / "timings.json";
  p.hd_estimates = out_dir / "hd_estimates.json";
  return p;
}

namespace {

void log(const PipelineConfig& cfg, const std::string& line) {
  if (!cfg.quiet) std::cout << line << '\n';
}

void ensure_out_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());
}

// Loads the network for a stage. Synthetic sources are regenerated (seeded,
// so identical to what gen wrote); the constructed equilibrium is reused when
// available, otherwise it is recovered by Newton iteration.
struct NetworkWithEquilibrium {
  EffectiveNetwork net;
  Eigen::VectorXd equilibrium;
};

NetworkWithEquilibrium obtain_network(const PipelineConfig& cfg) {
  if (cfg.network.kind == NetworkSource::Kind::kSynthetic) {
    SyntheticResult r = generate_synthetic(cfg.network.synthetic);
    return {std::move(r.net), std::move(r.equilibrium)};
  }
  EffectiveNetwork net = load_network(cfg.network.file);
  Eigen::VectorXd eq = find_equilibrium(net);
  return {std::move(net), std::move(eq)};
}

Eigen::VectorXd disturbed_initial_state(const NetworkWithEquilibrium& ne, const DisturbanceSpec& d) {
  const int n = ne.net.n_g;
  Rng rng(d.seed);
  Eigen::VectorXd x0(2 * n);
  if (!d.angle_offsets.empty()) {
    if (static_cast<int>(d.angle_offsets.size()) != n) {
      throw ConfigError("disturbance: angle_offsets must have length n_g = " + std::to_string(n));
    }
    for (int i = 0; i < n; ++i) x0[i] = ne.equilibrium[i] + d.angle_offsets[static_cast<std::size_t>(i)];
  } else {
    for (int i = 0; i < n; ++i) {
      x0[i] = ne.equilibrium[i] + rng.uniform(-d.angle_magnitude, d.angle_magnitude);
    }
  }
  for (int i = 0; i < n; ++i) {
    x0[n + i] = rng.uniform(-d.frequency_magnitude, d.frequency_magnitude);
  }
  return x0;
}

std::vector<std::string> state_header(int n) {
  std::vector<std::string> h{"t"};
  for (int i = 1; i <= n; ++i) h.push_back("delta_" + std::to_string(i));
  for (int i = 1; i <= n; ++i) h.push_back("omega_" + std::to_string(i));
  return h;
}

void save_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  const int n = static_cast<int>(traj.states.rows()) / 2;
  Eigen::MatrixXd table(traj.times.size(), 1 + traj.states.rows());
  table.col(0) = traj.times;
  table.rightCols(traj.states.rows()) = traj.states.transpose();
  csv::write(path, state_header(n), table);
}

Trajectory load_trajectory_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  if (t.header.empty() || t.header[0] != "t" || t.header.size() < 3) {
    throw IoError(path.string() + ": expected t,delta_*,omega_* columns");
  }
  Trajectory traj;
  traj.times = t.values.col(0);
  traj.states = t.values.rightCols(static_cast<Eigen::Index>(t.header.size()) - 1).transpose();
  return traj;
}

LibrarySpec library_for_latent(const PipelineConfig& cfg, int r) {
  LibrarySpec spec = cfg.library;
  spec.trig_coordinates.clear();  // latent coordinates mix angles and speeds
  spec.coordinate_names.clear();
  for (int i = 1; i <= r; ++i) spec.coordinate_names.push_back("z" + std::to_string(i));
  return spec;
}

LibrarySpec library_for_full_state(const PipelineConfig& cfg, int n_g) {
  LibrarySpec spec = cfg.library;
  spec.trig_coordinates.clear();
  spec.poly_coordinates.clear();
  if (spec.trig != TrigMode::kNone) {
    for (int i = 0; i < n_g; ++i) spec.trig_coordinates.push_back(i);  // delta block only
    // Monomials over the omega block; small-angle parts of the sine columns
    // would otherwise duplicate linear delta terms.
    for (int i = 0; i < n_g; ++i) spec.poly_coordinates.push_back(n_g + i);
  }
  spec.coordinate_names.clear();
  return spec;
}

}  // namespace

void cmd_gen(const PipelineConfig& cfg) {
  if (cfg.network.kind != NetworkSource::Kind::kSynthetic) {
    throw ConfigError("gen requires a synthetic network spec");
  }
  ensure_out_dir(cfg);
  const OutputPaths paths = output_paths(cfg.out_dir);

  SyntheticResult r = generate_synthetic(cfg.network.synthetic);
  save_network(r.net, paths.network);

  Eigen::VectorXd x(2 * r.net.n_g);
  x.head(r.net.n_g) = r.equilibrium;
  x.tail(r.net.n_g).setZero();
  const double residual = vector_field_stacked(r.net, x).lpNorm<Eigen::Infinity>();
  log(cfg, "gen: n_g=" + std::to_string(r.net.n_g) +
               " equilibrium_residual=" + csv::format_double(residual) + " -> " + paths.network.string());
}

double cmd_simulate(const PipelineConfig& cfg) {
  ensure_out_dir(cfg);
  const OutputPaths paths = output_paths(cfg.out_dir);

  NetworkWithEquilibrium ne = obtain_network(cfg);
  if (cfg.network.kind == NetworkSource::Kind::kSynthetic &&
      !std::filesystem::exists(paths.network)) {
    save_network(ne.net, paths.network);
  }

  const Eigen::VectorXd x0 = disturbed_initial_state(ne, cfg.disturbance);
  const auto rhs = [&ne](const Eigen::VectorXd& x) { return vector_field_stacked(ne.net, x); };

  Stopwatch clock;
  Trajectory traj = integrate(rhs, x0, cfg.integration);
  const double fom_time = clock.seconds();

  SnapshotSet snaps = assemble(traj, ne.net, cfg.derivative_mode);
  if (cfg.noise.sigma_rel > 0.0) snaps = add_noise(snaps, cfg.noise.sigma_rel, cfg.noise.seed);
  save_csv(snaps, paths.snapshots);

  log(cfg, "simulate: m=" + std::to_string(snaps.samples()) + " n=" + std::to_string(snaps.X.rows()) +
               " fom_time_s=" + csv::format_double(fom_time) + " -> " + paths.snapshots.string());
  return fom_time;
}

void cmd_identify(const PipelineConfig& cfg) {
  ensure_out_dir(cfg);
  const OutputPaths paths = output_paths(cfg.out_dir);
  const SnapshotSet snaps = load_csv(paths.snapshots);

  if (cfg.reduction.kind == ReductionSpec::Kind::kFullState) {
    const LibrarySpec spec = library_for_full_state(cfg, snaps.n_g());
    CandidateLibrary lib = build(snaps.X, spec);
    SparseModel model = fit(lib, snaps.Xdot.transpose(), cfg.regression);
    save_model_json(model, paths.model);
    log(cfg, "identify: full-state d=" + std::to_string(model.coordinate_dim) +
                 " library_size=" + std::to_string(lib.terms.size()) +
                 " lambda=" + csv::format_double(cfg.regression.lambda));

    // With the network structure at hand, read the physical parameters back
    // out of the identified coefficients.
    EffectiveNetwork net;
    bool have_net = false;
    if (cfg.network.kind == NetworkSource::Kind::kFile) {
      net = load_network(cfg.network.file);
      have_net = true;
    } else if (std::filesystem::exists(paths.network)) {
      net = load_network(paths.network);
      have_net = true;
    } else if (cfg.network.kind == NetworkSource::Kind::kSynthetic) {
      net = generate_synthetic(cfg.network.synthetic).net;
      have_net = true;
    }
    if (have_net && net.n_g * 2 == model.coordinate_dim && spec.trig == TrigMode::kPairwiseDifference) {
      const auto estimates = estimate_HD(model, net);
      nlohmann::json j = nlohmann::json::array();
      for (int i = 0; i < net.n_g; ++i) {
        const auto& e = estimates[static_cast<std::size_t>(i)];
        nlohmann::json entry;
        entry["generator"] = i;
        entry["recoverable"] = e.recoverable;
        if (e.recoverable) {
          entry["H"] = e.H;
          entry["D"] = e.D;
          entry["route"] = e.route;
        }
        j.push_back(std::move(entry));
      }
      std::ofstream out(paths.hd_estimates);
      if (!out) throw IoError("cannot open for writing: " + paths.hd_estimates.string());
      out << j.dump(2) << '\n';
      log(cfg, "identify: hd_estimates -> " + paths.hd_estimates.string());
    }
    return;
  }

  BasisCriterion criterion;
  if (cfg.reduction.kind == ReductionSpec::Kind::kEnergy) {
    criterion.kind = BasisCriterion::Kind::kEnergy;
    criterion.tau = cfg.reduction.tau;
  } else {
    criterion.kind = BasisCriterion::Kind::kFixedRank;
    criterion.r = cfg.reduction.r;
  }

  const ReducedBasis basis = compute_basis(snaps, criterion, cfg.reduction.center);
  save_spectrum_csv(basis, paths.spectrum);

  const LatentSnapshots latent = project(snaps, basis);
  const LibrarySpec spec = library_for_latent(cfg, basis.r);
  CandidateLibrary lib = build(latent.Z, spec);
  SparseModel model = fit(lib, latent.Zdot.transpose(), cfg.regression);
  model.basis = basis;
  save_model_json(model, paths.model);

  log(cfg, "identify: r=" + std::to_string(basis.r) +
               " energy=" + csv::format_double(basis.energy_captured) +
               " library_size=" + std::to_string(lib.terms.size()) +
               " lambda=" + csv::format_double(cfg.regression.lambda) + " -> " + paths.model.string());
}

double cmd_predict(const PipelineConfig& cfg) {
  const OutputPaths paths = output_paths(cfg.out_dir);
  const SparseModel model = load_model_json(paths.model);
  const SnapshotSet truth = load_csv(paths.snapshots);

  IntegrationConfig icfg = cfg.integration;
  icfg.t0 = truth.times[0];
  icfg.t_end = truth.times[truth.times.size() - 1];
  icfg.dt_sample = truth.times.size() > 1 ? truth.times[1] - truth.times[0] : cfg.integration.dt_sample;

  Eigen::VectorXd z0;
  if (model.basis) {
    Eigen::VectorXd x0 = truth.X.col(0);
    if (model.basis->centered) x0 -= model.basis->mean;
    z0 = model.basis->Phi.transpose() * x0;
  } else {
    z0 = truth.X.col(0);
  }

  Stopwatch clock;
  const ModelTrajectory sim = simulate_model(model, z0, icfg);
  const double rom_time = clock.seconds();

  const Trajectory& prediction = model.basis ? *sim.reconstructed : sim.trajectory;
  save_trajectory_csv(prediction, paths.prediction);
  log(cfg, "predict: m=" + std::to_string(prediction.times.size()) +
               " rom_time_s=" + csv::format_double(rom_time) + " -> " + paths.prediction.string());
  return rom_time;
}

EvaluationReport cmd_evaluate(const PipelineConfig& cfg) {
  const OutputPaths paths = output_paths(cfg.out_dir);
  const SnapshotSet truth = load_csv(paths.snapshots);
  const Trajectory prediction = load_trajectory_csv(paths.prediction);

  if (prediction.states.rows() != truth.X.rows() || prediction.states.cols() != truth.X.cols()) {
    throw ConfigError("evaluate: prediction shape " + std::to_string(prediction.states.rows()) + "x" +
                      std::to_string(prediction.states.cols()) + " does not match truth " +
                      std::to_string(truth.X.rows()) + "x" + std::to_string(truth.X.cols()));
  }

  EvaluationReport report;
  report.err_delta = relative_error(truth.X, prediction.states, Block::kDelta);
  report.err_omega = relative_error(truth.X, prediction.states, Block::kOmega);
  report.lambda = cfg.regression.lambda;
  report.poly_order = cfg.library.poly_order;
  report.trig = trig_mode_to_string(cfg.library.trig);
  if (std::filesystem::exists(paths.model)) {
    const SparseModel model = load_model_json(paths.model);
    if (model.basis) report.r = model.basis->r;
    report.lambda = model.lambda;
    report.poly_order = model.library_spec.poly_order;
    report.trig = trig_mode_to_string(model.library_spec.trig);
  }

  write_report(report, paths.report);
  write_average_csv(truth.times, average_series(truth.X), average_series(prediction.states),
                    paths.averages);
  write_error_csv(truth.times, error_series(truth.X, prediction.states), paths.errors);

  log(cfg, "evaluate: err_delta=" + csv::format_double(report.err_delta) +
               " err_omega=" + csv::format_double(report.err_omega) + " -> " + paths.report.string());
  return report;
}

EvaluationReport cmd_pipeline(const PipelineConfig& cfg) {
  PipelineConfig stage = cfg;
  if (cfg.network.kind == NetworkSource::Kind::kSynthetic) {
    cmd_gen(cfg);
    // Downstream stages consume the file gen wrote, exactly as they would
    // when run one at a time.
    stage.network.kind = NetworkSource::Kind::kFile;
    stage.network.file = output_paths(cfg.out_dir).network;
  }

  TimingPair timing;
  timing.fom_time_s = cmd_simulate(stage);
  cmd_identify(stage);
  timing.rom_time_s = cmd_predict(stage);
  EvaluationReport report = cmd_evaluate(stage);

  // Wall-clock numbers are the one intentionally non-reproducible output, so
  // they live in their own file rather than in report.json.
  write_timings(timing, output_paths(cfg.out_dir).timings);

  std::cout << "pipeline: err_delta=" << csv::format_double(report.err_delta)
            << " err_omega=" << csv::format_double(report.err_omega)
            << " fom_time_s=" << csv::format_double(timing.fom_time_s)
            << " rom_time_s=" << csv::format_double(timing.rom_time_s) << '\n';
  return report;
}

}  // namespace lsindy
