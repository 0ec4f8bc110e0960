#include "driftdecomp/dataset.hpp"

#include <cmath>
#include <json.hpp>
#include <random>

#include "binary_io.hpp"
#include "driftdecomp/error.hpp"
#include "random.hpp"

namespace driftdecomp {

std::vector<Point2> draw_initial_means(std::uint64_t seed, int count, double half_width) {
  std::mt19937_64 rng(seed);
  std::vector<Point2> means(static_cast<std::size_t>(count));
  for (auto& m : means) {
    m[0] = detail::uniform(rng, -half_width, half_width);
    m[1] = detail::uniform(rng, -half_width, half_width);
  }
  return means;
}

Corpus build_corpus(const DriftSpec& drift, const SolverConfig& cfg, const Grid2D& grid, const CorpusSpec& spec) {
  if (spec.count < 1) throw Error(ErrorKind::InvalidArgument, "corpus needs M >= 1 initial conditions");
  const FokkerPlanckSolver solver(grid, drift, cfg);
  Corpus corpus{grid, {}, 0.0, drift.label, spec.seed};
  corpus.pairs.reserve(static_cast<std::size_t>(spec.count));
  for (const Point2& mean : draw_initial_means(spec.seed, spec.count, spec.mean_half_width)) {
    SnapshotPair pair = solve_snapshots(solver, gaussian_density(grid, mean, spec.init_variance), spec.t1, spec.t2);
    pair.init_mean = mean;
    pair.seed = spec.seed;
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

namespace {

std::vector<double> gaussian_kernel(double variance, double h) {
  const double sd = std::sqrt(variance);
  const int radius = static_cast<int>(std::floor(4.0 * sd / h));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double d = k * h;
    w[static_cast<std::size_t>(k + radius)] = std::exp(-d * d / (2.0 * variance));
    sum += w[static_cast<std::size_t>(k + radius)];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Half-sample symmetric reflection: -1 -> 0, n -> n-1, repeated as needed.
int reflect(int k, int n) {
  const int period = 2 * n;
  k %= period;
  if (k < 0) k += period;
  return k < n ? k : period - 1 - k;
}

void convolve_lines(const std::vector<double>& in, std::vector<double>& out, const std::vector<double>& w, int n,
                    int lines, std::size_t stride, std::size_t line_step) {
  const int radius = static_cast<int>(w.size() / 2);
  for (int line = 0; line < lines; ++line) {
    const std::size_t base = static_cast<std::size_t>(line) * line_step;
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += w[static_cast<std::size_t>(k + radius)] * in[base + static_cast<std::size_t>(reflect(i + k, n)) * stride];
      }
      out[base + static_cast<std::size_t>(i) * stride] = acc;
    }
  }
}

}  // namespace

ScalarField smooth_gaussian(const ScalarField& field, double noise_variance) {
  if (!(noise_variance >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise variance must be >= 0");
  if (noise_variance == 0.0) return field;
  const Grid2D& g = field.grid();
  const std::size_t nx = static_cast<std::size_t>(g.nx());

  std::vector<double> tmp(field.size());
  std::vector<double> out(field.size());
  convolve_lines(field.values(), tmp, gaussian_kernel(noise_variance, g.dx()), g.nx(), g.ny(), 1, nx);
  convolve_lines(tmp, out, gaussian_kernel(noise_variance, g.dy()), g.ny(), g.nx(), nx, 1);
  return ScalarField(g, std::move(out));
}

Corpus perturb_gaussian(const Corpus& corpus, double noise_variance) {
  if (!(noise_variance >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise variance must be >= 0");
  Corpus out = corpus;
  if (noise_variance == 0.0) return out;
  for (auto& pair : out.pairs) {
    pair.f1 = smooth_gaussian(pair.f1, noise_variance);
    pair.f2 = smooth_gaussian(pair.f2, noise_variance);
  }
  out.noise_level = noise_variance;
  return out;
}

namespace {

constexpr std::string_view kCorpusMagic = "DRIFTDECOMP-CORPUS v1";

}  // namespace

std::string encode_corpus(const Corpus& corpus) {
  if (corpus.pairs.empty()) throw Error(ErrorKind::InvalidArgument, "cannot encode an empty corpus");
  const Grid2D& g = corpus.grid;
  nlohmann::ordered_json meta;
  meta["grid"] = {{"xmin", g.xmin()}, {"xmax", g.xmax()}, {"ymin", g.ymin()},
                  {"ymax", g.ymax()}, {"nx", g.nx()},     {"ny", g.ny()}};
  meta["M"] = corpus.pairs.size();
  meta["t1"] = corpus.pairs.front().t1;
  meta["t2"] = corpus.pairs.front().t2;
  meta["noise_level"] = corpus.noise_level;
  meta["drift_label"] = corpus.drift_label;
  meta["seed"] = corpus.seed;
  auto means = nlohmann::ordered_json::array();
  for (const auto& p : corpus.pairs) {
    if (!(p.f1.grid() == g) || !(p.f2.grid() == g)) {
      throw Error(ErrorKind::DimensionMismatch, "corpus pair on a different grid");
    }
    means.push_back({p.init_mean[0], p.init_mean[1], p.seed});
  }
  meta["pairs"] = std::move(means);

  std::string out(kCorpusMagic);
  out += '\n';
  out += meta.dump();
  out += '\n';
  out.reserve(out.size() + corpus.pairs.size() * 2 * 8 * g.size() + 8);
  for (const auto& p : corpus.pairs) {
    detail::append_doubles(out, p.f1.values());
    detail::append_doubles(out, p.f2.values());
  }
  detail::append_u64(out, detail::fnv1a64(out));
  return out;
}

Corpus decode_corpus(const std::string& bytes) {
  const auto nl1 = bytes.find('\n');
  if (nl1 == std::string::npos || std::string_view(bytes).substr(0, nl1) != kCorpusMagic) {
    throw Error(ErrorKind::FormatVersionMismatch, "missing DRIFTDECOMP-CORPUS v1 header");
  }
  const auto nl2 = bytes.find('\n', nl1 + 1);
  if (nl2 == std::string::npos) throw Error(ErrorKind::FormatVersionMismatch, "truncated corpus metadata");

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(nl1 + 1),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(nl2));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatVersionMismatch, std::string("corpus metadata: ") + e.what());
  }

  try {
    const auto& jg = meta.at("grid");
    const Grid2D grid(jg.at("xmin").get<double>(), jg.at("xmax").get<double>(), jg.at("ymin").get<double>(),
                      jg.at("ymax").get<double>(), jg.at("nx").get<int>(), jg.at("ny").get<int>());
    const auto m = meta.at("M").get<std::size_t>();
    const auto& jp = meta.at("pairs");
    if (jp.size() != m || m == 0) throw Error(ErrorKind::FormatVersionMismatch, "pair table does not match M");

    const std::size_t payload = m * 2 * 8 * grid.size();
    if (bytes.size() != nl2 + 1 + payload + 8) {
      throw Error(ErrorKind::FormatVersionMismatch, "corpus payload size mismatch (truncated file?)");
    }
    const std::size_t body = nl2 + 1 + payload;
    if (detail::load_u64(bytes.data() + body) != detail::fnv1a64(std::string_view(bytes).substr(0, body))) {
      throw Error(ErrorKind::ChecksumMismatch, "corpus checksum does not match its contents");
    }

    Corpus corpus{grid, {}, meta.at("noise_level").get<double>(), meta.at("drift_label").get<std::string>(),
                  meta.at("seed").get<std::uint64_t>()};
    const double t1 = meta.at("t1").get<double>();
    const double t2 = meta.at("t2").get<double>();
    const char* p = bytes.data() + nl2 + 1;
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> f1(grid.size()), f2(grid.size());
      detail::load_doubles(p, f1);
      p += 8 * grid.size();
      detail::load_doubles(p, f2);
      p += 8 * grid.size();
      corpus.pairs.push_back(SnapshotPair{ScalarField(grid, std::move(f1)), ScalarField(grid, std::move(f2)), t1, t2,
                                          {jp[j].at(0).get<double>(), jp[j].at(1).get<double>()},
                                          jp[j].at(2).get<std::uint64_t>()});
    }
    return corpus;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatVersionMismatch, std::string("corpus metadata: ") + e.what());
  }
}

void save_corpus(const Corpus& corpus, const std::string& path) { detail::write_file(path, encode_corpus(corpus)); }

Corpus load_corpus(const std::string& path) { return decode_corpus(detail::read_file(path)); }

}  // namespace driftdecomp
