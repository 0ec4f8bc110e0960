// driftdecomp: generate data, learn drift / potential / rotation, evaluate.
//
//   driftdecomp run --config cfg.json --out-dir out
//   driftdecomp generate | train-phase1 | train-phase2 | evaluate  (stagewise, same flags)
//   driftdecomp oracle-decompose --override benchmark=rough
//
// On failure the process prints `error: <Category>: <message>` to stderr and
// exits with 2 (usage/config), 3 (I/O or file format) or 4 (numerical).

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "driftdecomp/dataset.hpp"
#include "driftdecomp/error.hpp"
#include "driftdecomp/experiment.hpp"
#include "driftdecomp/field_io.hpp"
#include "driftdecomp/metrics.hpp"
#include "driftdecomp/mlp.hpp"
#include "driftdecomp/poisson.hpp"
#include "driftdecomp/reference.hpp"

namespace fs = std::filesystem;
using namespace driftdecomp;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Experiment config (JSON)");
  cmd->add_option("--out-dir", opts.out_dir, "Directory for artifacts (overrides out_dir)");
  cmd->add_option("--seed", opts.seed, "Base seed: data=seed, phase1=seed+1, phase2=seed+2");
  cmd->add_option("--override", opts.overrides, "key=value, dotted keys (e.g. phase1.epochs=2000)")
      ->allow_extra_args(false);
  cmd->add_flag("-q,--quiet", opts.quiet, "Suppress progress output");
}

ExperimentConfig resolve(const CommonOptions& opts) {
  ExperimentConfig cfg = opts.config_path.empty() ? default_config("double-well") : load_config(opts.config_path);
  if (opts.seed) cfg = with_seed(cfg, *opts.seed);
  for (const auto& o : opts.overrides) cfg = apply_override(cfg, o);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  validate(cfg);
  fs::create_directories(cfg.out_dir);
  return cfg;
}

std::string in_dir(const ExperimentConfig& cfg, const char* name) { return (fs::path(cfg.out_dir) / name).string(); }

LogFn logger(bool quiet) {
  if (quiet) return {};
  const auto start = std::chrono::steady_clock::now();
  return [start](const std::string& msg) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::fprintf(stderr, "[%8.1fs] %s\n", s, msg.c_str());
  };
}

EpochCallback epoch_logger(const LogFn& log, const char* phase, int total) {
  if (!log) return {};
  const int every = std::max(1, total / 10);
  return [=](int epoch, double loss) {
    if ((epoch + 1) % every == 0) {
      log(std::string(phase) + " epoch " + std::to_string(epoch + 1) + "/" + std::to_string(total) + " loss " +
          std::to_string(loss));
    }
  };
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  out << text;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::UnknownBenchmark:
      return 2;
    case ErrorKind::IoError:
    case ErrorKind::FormatVersionMismatch:
    case ErrorKind::ChecksumMismatch:
      return 3;
    default:
      return 4;
  }
}

void cmd_generate(const CommonOptions& opts) {
  const ExperimentConfig cfg = resolve(opts);
  const LogFn log = logger(opts.quiet);
  save_config(cfg, in_dir(cfg, "config.json"));
  if (log) log("generating " + std::to_string(cfg.count) + " snapshot pairs for " + cfg.benchmark);
  save_corpus(generate_corpus(cfg), in_dir(cfg, "corpus.bin"));
  if (log) log("wrote " + in_dir(cfg, "corpus.bin"));
}

void cmd_train_phase1(const CommonOptions& opts) {
  const ExperimentConfig cfg = resolve(opts);
  const LogFn log = logger(opts.quiet);
  const Corpus corpus = load_corpus(in_dir(cfg, "corpus.bin"));
  const TrainingResult r = run_phase1(cfg, corpus, epoch_logger(log, "phase 1", cfg.phase1.epochs));
  save_mlp(r.net, in_dir(cfg, "net_b.ckpt"));
  write_loss_curve(r.loss_curve, in_dir(cfg, "loss_phase1.csv"));
  if (log) log("wrote " + in_dir(cfg, "net_b.ckpt"));
}

void cmd_train_phase2(const CommonOptions& opts) {
  const ExperimentConfig cfg = resolve(opts);
  const LogFn log = logger(opts.quiet);
  const Mlp net_b = load_mlp(in_dir(cfg, "net_b.ckpt"));
  const TrainingResult r = run_phase2(cfg, net_b, epoch_logger(log, "phase 2", cfg.phase2.epochs));
  save_mlp(r.net, in_dir(cfg, "net_psi.ckpt"));
  write_loss_curve(r.loss_curve, in_dir(cfg, "loss_phase2.csv"));
  if (log) log("wrote " + in_dir(cfg, "net_psi.ckpt"));
}

void cmd_evaluate(const CommonOptions& opts) {
  const ExperimentConfig cfg = resolve(opts);
  const Evaluation eval = evaluate(cfg, load_mlp(in_dir(cfg, "net_b.ckpt")), load_mlp(in_dir(cfg, "net_psi.ckpt")));
  write_plot_tables(eval, cfg.out_dir);
  const std::string text = to_text(eval.report);
  write_text(in_dir(cfg, "report.json"), text);
  std::cout << text;
}

void cmd_run(const CommonOptions& opts) {
  const ExperimentConfig cfg = resolve(opts);
  std::cout << to_text(run_experiment(cfg, logger(opts.quiet)));
}

void cmd_oracle(const CommonOptions& opts) {
  const ExperimentConfig cfg = resolve(opts);
  const Grid2D grid = cfg.grid.build();
  const Benchmark bench = benchmark(cfg.benchmark);
  const VectorField b = sample(grid, [&](double x, double y) { return bench.drift(x, y); });
  const OracleDecomposition d = decompose_with_oracle(b);
  const ScalarField psi_true = sample(grid, bench.potential);
  const VectorField r_true = sample(grid, bench.rotation);
  const ScalarField psi = mean_shift(d.psi, psi_true);

  save_field(psi, in_dir(cfg, "oracle_psi.field"));
  save_field(d.rotation, in_dir(cfg, "oracle_R.field"));
  Evaluation eval{EvalReport{}, b, b, psi, psi_true, d.rotation, r_true};
  write_plot_tables(eval, cfg.out_dir);

  const Region inner = Region::square(cfg.interior_half_width);
  nlohmann::ordered_json j;
  j["benchmark"] = cfg.benchmark;
  j["config_hash"] = config_hash(cfg);
  j["cg_iterations"] = d.solve.iterations;
  j["residual_norm"] = d.solve.residual_norm;
  j["system_rhs_norm"] = d.solve.system_rhs_norm;
  j["compatibility_correction"] = d.solve.compatibility_correction;
  j["rrmse"] = {{"psi", rrmse(psi, psi_true)}, {"R", rrmse(d.rotation, r_true)}};
  j["rrmse_interior"] = {{"psi", rrmse(psi, psi_true, inner)}, {"R", rrmse(d.rotation, r_true, inner)}};
  const std::string text = j.dump(2) + "\n";
  write_text(in_dir(cfg, "oracle_report.json"), text);
  std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn drift decompositions b = -grad(psi) + R from Fokker-Planck snapshots"};
  app.require_subcommand(1);

  CommonOptions opts;
  struct Command {
    const char* name;
    const char* help;
    void (*fn)(const CommonOptions&);
  };
  const Command commands[] = {
      {"generate", "Solve the Fokker-Planck equation and write corpus.bin", cmd_generate},
      {"train-phase1", "Learn the drift from corpus.bin, write net_b.ckpt", cmd_train_phase1},
      {"train-phase2", "Learn the potential from net_b.ckpt, write net_psi.ckpt", cmd_train_phase2},
      {"evaluate", "Compare both networks with ground truth, write report.json and CSV tables", cmd_evaluate},
      {"run", "generate + train-phase1 + train-phase2 + evaluate", cmd_run},
      {"oracle-decompose", "Finite-difference decomposition of the true drift", cmd_oracle},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, opts);
    sub->callback([&opts, fn = c.fn] { fn(opts); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IoError: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
