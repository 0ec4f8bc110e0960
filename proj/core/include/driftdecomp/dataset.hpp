#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftdecomp/fp_solver.hpp"
#include "driftdecomp/grid.hpp"

namespace driftdecomp {

struct Corpus {
  Grid2D grid;
  std::vector<SnapshotPair> pairs;
  double noise_level = 0.0;
  std::string drift_label;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return pairs.size(); }
  bool operator==(const Corpus&) const = default;
};

struct CorpusSpec {
  int count = 40;                 // M
  std::uint64_t seed = 0;
  double t1 = 0.015;
  double t2 = 0.016;
  double init_variance = 0.01;
  double mean_half_width = 2.0;   // initial means ~ U([-w, w]^2)
};

/// Draws the M initial means from a seeded generator and evolves each one to
/// (t1, t2). Identical inputs give a bit-identical corpus.
Corpus build_corpus(const DriftSpec& drift, const SolverConfig& cfg, const Grid2D& grid, const CorpusSpec& spec);

/// The M initial means build_corpus would draw for this seed.
std::vector<Point2> draw_initial_means(std::uint64_t seed, int count, double half_width);

/// Discrete convolution with an isotropic Gaussian of the given variance in
/// physical units. The separable kernel is cut at 4 standard deviations and
/// normalized to unit sum; boundaries use half-sample reflection, which keeps
/// the total mass. Variance 0 is the identity.
ScalarField smooth_gaussian(const ScalarField& field, double noise_variance);
Corpus perturb_gaussian(const Corpus& corpus, double noise_variance);

// Corpus file: `DRIFTDECOMP-CORPUS v1`, one line of JSON metadata, the f1/f2
// payloads of every pair as little-endian float64, then an FNV-1a 64-bit
// checksum over everything before it.
std::string encode_corpus(const Corpus& corpus);
Corpus decode_corpus(const std::string& bytes);
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

}  // namespace driftdecomp
