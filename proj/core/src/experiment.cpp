#include "driftdecomp/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <json.hpp>

#include "binary_io.hpp"
#include "driftdecomp/error.hpp"
#include "driftdecomp/field_io.hpp"
#include "driftdecomp/metrics.hpp"

namespace driftdecomp {

using Json = nlohmann::ordered_json;

ExperimentConfig default_config(const std::string& benchmark_name) {
  const Benchmark bench = benchmark(benchmark_name);
  ExperimentConfig cfg;
  cfg.benchmark = bench.name;
  cfg.sigma2 = bench.sigma2;
  cfg.count = bench.count;
  cfg.phase1.epochs = bench.epochs;
  cfg.phase2.epochs = bench.epochs;
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
  try {
    benchmark(cfg.benchmark);
    cfg.grid.build();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (!(cfg.sigma2 >= 0.0)) fail("sigma2 must be >= 0");
  if (cfg.count < 1) fail("M must be >= 1");
  if (!(cfg.t1 > 0.0 && cfg.t2 > cfg.t1)) fail("need 0 < t1 < t2");
  if (!(cfg.dt > 0.0)) fail("dt must be positive");
  if (!(cfg.init_variance > 0.0)) fail("init_variance must be positive");
  if (!(cfg.mean_half_width >= 0.0)) fail("mean_half_width must be >= 0");
  if (!(cfg.noise_variance >= 0.0)) fail("noise_variance must be >= 0");
  if (cfg.phase1.epochs < 1 || cfg.phase2.epochs < 1) fail("epochs must be >= 1");
  if (cfg.phase1.batch_size < 1 || cfg.phase1.batch_size > cfg.count) fail("phase1.batch_size must lie in [1, M]");
  if (!(cfg.phase1.learning_rate > 0.0) || !(cfg.phase2.learning_rate > 0.0)) fail("learning rates must be > 0");
  for (int h : cfg.hidden) {
    if (h < 1) fail("hidden layer widths must be positive");
  }
  if (!(cfg.interior_half_width > 0.0)) fail("interior_half_width must be positive");
}

namespace {

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["benchmark"] = c.benchmark;
  j["sigma2"] = c.sigma2;
  j["M"] = c.count;
  j["t1"] = c.t1;
  j["t2"] = c.t2;
  j["grid"] = {{"xmin", c.grid.xmin}, {"xmax", c.grid.xmax}, {"ymin", c.grid.ymin},
               {"ymax", c.grid.ymax}, {"nx", c.grid.nx},     {"ny", c.grid.ny}};
  j["dt"] = c.dt;
  j["init_variance"] = c.init_variance;
  j["mean_half_width"] = c.mean_half_width;
  j["noise_variance"] = c.noise_variance;
  j["data_seed"] = c.data_seed;
  j["hidden"] = c.hidden;
  j["phase1"] = {{"epochs", c.phase1.epochs},
                 {"batch_size", c.phase1.batch_size},
                 {"learning_rate", c.phase1.learning_rate},
                 {"seed", c.phase1.seed}};
  j["phase2"] = {{"epochs", c.phase2.epochs}, {"learning_rate", c.phase2.learning_rate}, {"seed", c.phase2.seed}};
  j["interior_half_width"] = c.interior_half_width;
  j["out_dir"] = c.out_dir;
  return j;
}

// Copies keys present in `src` over `dst`, rejecting keys `dst` lacks.
void overlay(Json& dst, const Json& src, const std::string& path) {
  if (!src.is_object()) throw Error(ErrorKind::ConfigError, "'" + path + "' must be an object");
  for (const auto& [key, value] : src.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!dst.contains(key)) throw Error(ErrorKind::ConfigError, "unknown config key '" + where + "'");
    if (dst[key].is_object()) {
      overlay(dst[key], value, where);
    } else {
      dst[key] = value;
    }
  }
}

ExperimentConfig from_json(const Json& src) {
  const std::string name = src.contains("benchmark") ? src["benchmark"].get<std::string>() : "double-well";
  ExperimentConfig base;
  try {
    base = default_config(name);
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  Json j = to_json(base);
  overlay(j, src, "");

  ExperimentConfig c;
  try {
    c.benchmark = j["benchmark"].get<std::string>();
    c.sigma2 = j["sigma2"].get<double>();
    c.count = j["M"].get<int>();
    c.t1 = j["t1"].get<double>();
    c.t2 = j["t2"].get<double>();
    const auto& g = j["grid"];
    c.grid = {g["xmin"].get<double>(), g["xmax"].get<double>(), g["ymin"].get<double>(),
              g["ymax"].get<double>(), g["nx"].get<int>(),      g["ny"].get<int>()};
    c.dt = j["dt"].get<double>();
    c.init_variance = j["init_variance"].get<double>();
    c.mean_half_width = j["mean_half_width"].get<double>();
    c.noise_variance = j["noise_variance"].get<double>();
    c.data_seed = j["data_seed"].get<std::uint64_t>();
    c.hidden = j["hidden"].get<std::vector<int>>();
    const auto& p1 = j["phase1"];
    c.phase1.epochs = p1["epochs"].get<int>();
    c.phase1.batch_size = p1["batch_size"].get<int>();
    c.phase1.learning_rate = p1["learning_rate"].get<double>();
    c.phase1.seed = p1["seed"].get<std::uint64_t>();
    const auto& p2 = j["phase2"];
    c.phase2.epochs = p2["epochs"].get<int>();
    c.phase2.learning_rate = p2["learning_rate"].get<double>();
    c.phase2.seed = p2["seed"].get<std::uint64_t>();
    c.interior_half_width = j["interior_half_width"].get<double>();
    c.out_dir = j["out_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("bad config value: ") + e.what());
  }
  c.phase1.hidden = c.hidden;
  c.phase2.hidden = c.hidden;
  return c;
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, what + ": " + e.what());
  }
}

}  // namespace

std::string to_text(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

ExperimentConfig config_from_text(const std::string& text) {
  ExperimentConfig c = from_json(parse_json(text, "config"));
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) { return config_from_text(detail::read_file(path)); }

void save_config(const ExperimentConfig& cfg, const std::string& path) { detail::write_file(path, to_text(cfg)); }

ExperimentConfig apply_override(const ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::ConfigError, "override must look like key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }

  Json j = to_json(cfg);
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw Error(ErrorKind::ConfigError, "unknown config key '" + key + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
  // Switching benchmark alone keeps every other value that was already set.
  return from_json(j);
}

ExperimentConfig with_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  ExperimentConfig out = cfg;
  out.data_seed = seed;
  out.phase1.seed = seed + 1;
  out.phase2.seed = seed + 2;
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // Where the artifacts go does not change the experiment.
  ExperimentConfig keyed = cfg;
  keyed.out_dir.clear();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a64(to_text(keyed))));
  return buf;
}

std::string to_text(const EvalReport& r) {
  Json j;
  j["benchmark"] = r.benchmark;
  j["config_hash"] = r.config_hash;
  j["sigma2"] = r.sigma2;
  j["status"] = r.status;
  if (r.status != "complete") {
    j["failed_stage"] = r.failed_stage;
    j["error"] = r.error;
  }
  j["rrmse"] = {{"b", r.full.b}, {"psi", r.full.psi}, {"R", r.full.rotation}};
  j["rrmse_interior"] = {{"b", r.interior.b}, {"psi", r.interior.psi}, {"R", r.interior.rotation}};
  auto curve_summary = [](const std::vector<double>& c) {
    Json s;
    s["epochs"] = c.size();
    s["initial"] = c.empty() ? 0.0 : c.front();
    s["final"] = c.empty() ? 0.0 : c.back();
    return s;
  };
  j["phase1_loss"] = curve_summary(r.phase1_loss);
  j["phase2_loss"] = curve_summary(r.phase2_loss);
  return j.dump(2) + "\n";
}

Corpus generate_corpus(const ExperimentConfig& cfg) {
  validate(cfg);
  const Benchmark bench = benchmark(cfg.benchmark);
  const SolverConfig solver{cfg.dt, cfg.sigma2, cfg.t2};
  CorpusSpec spec;
  spec.count = cfg.count;
  spec.seed = cfg.data_seed;
  spec.t1 = cfg.t1;
  spec.t2 = cfg.t2;
  spec.init_variance = cfg.init_variance;
  spec.mean_half_width = cfg.mean_half_width;
  return perturb_gaussian(build_corpus(bench.drift_spec(), solver, cfg.grid.build(), spec), cfg.noise_variance);
}

TrainingResult run_phase1(const ExperimentConfig& cfg, const Corpus& corpus, const EpochCallback& on_epoch) {
  Phase1Config p = cfg.phase1;
  p.hidden = cfg.hidden;
  return train_phase1(corpus, p, on_epoch);
}

TrainingResult run_phase2(const ExperimentConfig& cfg, const Mlp& net_b, const EpochCallback& on_epoch) {
  Phase2Config p = cfg.phase2;
  p.hidden = cfg.hidden;
  return train_phase2(net_b, cfg.grid.build(), p, on_epoch);
}

Evaluation evaluate(const ExperimentConfig& cfg, const Mlp& net_b, const Mlp& net_psi) {
  const Grid2D grid = cfg.grid.build();
  const Benchmark bench = benchmark(cfg.benchmark);

  VectorField b_nn = tabulate_drift(net_b, grid);
  VectorField b_true = sample(grid, [&](double x, double y) { return bench.drift(x, y); });
  ScalarField psi_true = sample(grid, bench.potential);
  ScalarField psi_nn = mean_shift(tabulate_potential(net_psi, grid), psi_true);
  VectorField rotation_nn = recover_rotation(b_nn, tabulate_potential_gradient(net_psi, grid));
  VectorField rotation_true = sample(grid, bench.rotation);

  EvalReport report;
  report.benchmark = cfg.benchmark;
  report.config_hash = config_hash(cfg);
  report.sigma2 = cfg.sigma2;
  report.full = {rrmse(b_nn, b_true), rrmse(psi_nn, psi_true), rrmse(rotation_nn, rotation_true)};
  const Region inner = Region::square(cfg.interior_half_width);
  report.interior = {rrmse(b_nn, b_true, inner), rrmse(psi_nn, psi_true, inner),
                     rrmse(rotation_nn, rotation_true, inner)};
  return {std::move(report),      std::move(b_nn),          std::move(b_true),       std::move(psi_nn),
          std::move(psi_true),    std::move(rotation_nn),   std::move(rotation_true)};
}

namespace {

std::string csv_quiver(const VectorField& v) {
  std::string out = "x,y,u,v\n";
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 p = v.grid().node(i);
    out += detail::exact(p[0]) + ',' + detail::exact(p[1]) + ',' + detail::exact(v.ux()[i]) + ',' +
           detail::exact(v.uy()[i]) + '\n';
  }
  return out;
}

}  // namespace

void write_plot_tables(const Evaluation& eval, const std::string& dir) {
  namespace fs = std::filesystem;
  std::string heat = "x,y,psi_nn,psi,psi_nn_minus_psi\n";
  for (std::size_t i = 0; i < eval.psi_nn.size(); ++i) {
    const Point2 p = eval.psi_nn.grid().node(i);
    heat += detail::exact(p[0]) + ',' + detail::exact(p[1]) + ',' + detail::exact(eval.psi_nn[i]) + ',' +
            detail::exact(eval.psi_true[i]) + ',' + detail::exact(eval.psi_nn[i] - eval.psi_true[i]) + '\n';
  }
  detail::write_file((fs::path(dir) / "heatmap_psi.csv").string(), heat);
  detail::write_file((fs::path(dir) / "quiver_b_nn.csv").string(), csv_quiver(eval.b_nn));
  detail::write_file((fs::path(dir) / "quiver_b.csv").string(), csv_quiver(eval.b_true));
  detail::write_file((fs::path(dir) / "quiver_R_nn.csv").string(), csv_quiver(eval.rotation_nn));
  detail::write_file((fs::path(dir) / "quiver_R.csv").string(), csv_quiver(eval.rotation_true));
}

void write_loss_curve(const std::vector<double>& curve, const std::string& path) {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < curve.size(); ++e) out += std::to_string(e) + ',' + detail::exact(curve[e]) + '\n';
  detail::write_file(path, out);
}

EvalReport run_experiment(const ExperimentConfig& cfg, const LogFn& log) {
  namespace fs = std::filesystem;
  validate(cfg);
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create output directory '" + cfg.out_dir + "'");
  auto path = [&](const char* name) { return (dir / name).string(); };
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  save_config(cfg, path("config.json"));

  EvalReport partial;
  partial.benchmark = cfg.benchmark;
  partial.config_hash = config_hash(cfg);
  partial.sigma2 = cfg.sigma2;
  std::string stage = "generate";
  auto progress = [&](const char* phase, int total) {
    const int every = std::max(1, total / 10);
    return [=, &say](int epoch, double loss) {
      if ((epoch + 1) % every == 0) say(std::string(phase) + " epoch " + std::to_string(epoch + 1) + "/" +
                                        std::to_string(total) + " loss " + detail::exact(loss));
    };
  };

  try {
    say("generating " + std::to_string(cfg.count) + " snapshot pairs for " + cfg.benchmark);
    const Corpus corpus = generate_corpus(cfg);
    save_corpus(corpus, path("corpus.bin"));

    stage = "train-phase1";
    TrainingResult p1 = run_phase1(cfg, corpus, progress("phase 1", cfg.phase1.epochs));
    partial.phase1_loss = p1.loss_curve;
    save_mlp(p1.net, path("net_b.ckpt"));
    write_loss_curve(p1.loss_curve, path("loss_phase1.csv"));

    stage = "train-phase2";
    TrainingResult p2 = run_phase2(cfg, p1.net, progress("phase 2", cfg.phase2.epochs));
    partial.phase2_loss = p2.loss_curve;
    save_mlp(p2.net, path("net_psi.ckpt"));
    write_loss_curve(p2.loss_curve, path("loss_phase2.csv"));

    stage = "evaluate";
    Evaluation eval = evaluate(cfg, p1.net, p2.net);
    eval.report.phase1_loss = std::move(p1.loss_curve);
    eval.report.phase2_loss = std::move(p2.loss_curve);
    write_plot_tables(eval, cfg.out_dir);
    detail::write_file(path("report.json"), to_text(eval.report));
    return eval.report;
  } catch (const std::exception& e) {
    partial.status = "failed";
    partial.failed_stage = stage;
    partial.error = e.what();
    detail::write_file(path("report.json"), to_text(partial));
    throw;
  }
}

}  // namespace driftdecomp
