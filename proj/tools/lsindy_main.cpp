#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lsindy/errors.hpp"
#include "lsindy/pipeline.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config, "Pipeline config JSON");
  cmd->add_option("--out", opts.out, "Output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "Master seed (overrides config seeds)");
  cmd->add_flag("--quiet", opts.quiet, "Suppress progress output");
}

lsindy::PipelineConfig resolve(const CommonOpts& opts) {
  lsindy::PipelineConfig cfg =
      opts.config.empty() ? lsindy::default_config() : lsindy::load_config(opts.config);
  if (!opts.out.empty()) cfg.out_dir = opts.out;
  if (opts.seed) {
    // One master seed drives the whole run; the stages get fixed offsets.
    cfg.network.synthetic.seed = *opts.seed;
    cfg.disturbance.seed = *opts.seed + 1;
    cfg.noise.seed = *opts.seed + 2;
  }
  cfg.quiet = opts.quiet;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent sparse identification of swing-equation networks"};
  app.require_subcommand(1);

  CommonOpts gen_opts, sim_opts, id_opts, pred_opts, eval_opts, pipe_opts;
  add_common(app.add_subcommand("gen", "Generate a synthetic network file"), gen_opts);
  add_common(app.add_subcommand("simulate", "Integrate the network and write snapshots"), sim_opts);
  add_common(app.add_subcommand("identify", "Reduce and fit a sparse model from snapshots"), id_opts);
  add_common(app.add_subcommand("predict", "Integrate the identified model and back-project"), pred_opts);
  add_common(app.add_subcommand("evaluate", "Compare prediction against truth"), eval_opts);
  add_common(app.add_subcommand("pipeline", "Run gen/simulate/identify/predict/evaluate"), pipe_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("gen")) {
      lsindy::cmd_gen(resolve(gen_opts));
    } else if (app.got_subcommand("simulate")) {
      lsindy::cmd_simulate(resolve(sim_opts));
    } else if (app.got_subcommand("identify")) {
      lsindy::cmd_identify(resolve(id_opts));
    } else if (app.got_subcommand("predict")) {
      lsindy::cmd_predict(resolve(pred_opts));
    } else if (app.got_subcommand("evaluate")) {
      lsindy::cmd_evaluate(resolve(eval_opts));
    } else if (app.got_subcommand("pipeline")) {
      lsindy::cmd_pipeline(resolve(pipe_opts));
    }
  } catch (const lsindy::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const lsindy::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const lsindy::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
