#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "driftdecomp/dataset.hpp"
#include "driftdecomp/grid.hpp"
#include "driftdecomp/mlp.hpp"
#include "driftdecomp/reference.hpp"
#include "driftdecomp/training.hpp"

namespace driftdecomp {

struct GridSpec {
  double xmin = -4.0, xmax = 4.0, ymin = -4.0, ymax = 4.0;
  int nx = 80, ny = 80;

  Grid2D build() const { return {xmin, xmax, ymin, ymax, nx, ny}; }
};

/// Every knob of a generate -> phase 1 -> phase 2 -> evaluate run.
struct ExperimentConfig {
  std::string benchmark = "double-well";
  double sigma2 = 2.0;
  int count = 40;  // M
  double t1 = 0.015;
  double t2 = 0.016;
  GridSpec grid;
  double dt = 1e-4;
  double init_variance = 0.01;
  double mean_half_width = 2.0;
  double noise_variance = 0.1;
  std::uint64_t data_seed = 0;
  std::vector<int> hidden{50, 50};
  Phase1Config phase1;
  Phase2Config phase2;
  double interior_half_width = 3.0;
  std::string out_dir = "out";
};

/// Defaults for a benchmark: sigma^2, M and epoch counts follow the benchmark.
ExperimentConfig default_config(const std::string& benchmark_name);

/// Throws ConfigError describing the first violated constraint.
void validate(const ExperimentConfig& cfg);

/// Pretty-printed JSON with a fixed key order. Parsing starts from the
/// benchmark defaults, so keys may be omitted; unknown keys are rejected.
std::string to_text(const ExperimentConfig& cfg);
ExperimentConfig config_from_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

/// Applies `key=value` where key is a dotted path such as `phase1.epochs`
/// and value is JSON (bare words are taken as strings). The result is not
/// validated, so several overrides can be chained before calling validate.
ExperimentConfig apply_override(const ExperimentConfig& cfg, const std::string& assignment);
/// Sets data, phase-1 and phase-2 seeds to seed, seed + 1, seed + 2.
ExperimentConfig with_seed(const ExperimentConfig& cfg, std::uint64_t seed);

/// FNV-1a of to_text(cfg) with out_dir blanked, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct Metrics {
  double b = 0.0;
  double psi = 0.0;
  double rotation = 0.0;
};

struct EvalReport {
  std::string benchmark;
  std::string config_hash;
  double sigma2 = 0.0;
  Metrics full;
  Metrics interior;
  std::vector<double> phase1_loss;
  std::vector<double> phase2_loss;
  std::string status = "complete";
  std::string failed_stage;
  std::string error;
};

std::string to_text(const EvalReport& report);

/// Learned and reference fields on the evaluation grid.
struct Evaluation {
  EvalReport report;
  VectorField b_nn, b_true;
  ScalarField psi_nn, psi_true;  // psi_nn already mean-shifted
  VectorField rotation_nn, rotation_true;
};

Corpus generate_corpus(const ExperimentConfig& cfg);
TrainingResult run_phase1(const ExperimentConfig& cfg, const Corpus& corpus, const EpochCallback& on_epoch = {});
TrainingResult run_phase2(const ExperimentConfig& cfg, const Mlp& net_b, const EpochCallback& on_epoch = {});
Evaluation evaluate(const ExperimentConfig& cfg, const Mlp& net_b, const Mlp& net_psi);

/// Writes the plot tables: heatmap_psi.csv (x, y, psi_nn, psi, psi_nn - psi)
/// and quiver_{b_nn,b,R_nn,R}.csv (x, y, u, v), one node per row in storage order.
void write_plot_tables(const Evaluation& eval, const std::string& dir);
void write_loss_curve(const std::vector<double>& curve, const std::string& path);

using LogFn = std::function<void(const std::string&)>;

/// Generate, train both phases, evaluate, and write every artifact into
/// cfg.out_dir: config.json, corpus.bin, net_b.ckpt, net_psi.ckpt,
/// loss_phase1.csv, loss_phase2.csv, report.json and the plot tables. A stage
/// failure still writes report.json with status "failed" before rethrowing.
EvalReport run_experiment(const ExperimentConfig& cfg, const LogFn& log = {});

}  // namespace driftdecomp
