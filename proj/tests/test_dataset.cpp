#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "driftdecomp/dataset.hpp"
#include "driftdecomp/reference.hpp"
#include "test_support.hpp"

using namespace driftdecomp;
using test_support::kind_of;

namespace {

const SolverConfig kCfg{1e-4, 2.0, 0.0};

bool bit_equal(const ScalarField& a, const ScalarField& b) {
  return a.grid() == b.grid() && a.size() == b.size() &&
         std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("build_corpus") {
  const Grid2D g = Grid2D::square(4.0, 80);
  const auto bench = benchmark("double-well");
  CorpusSpec spec;
  spec.seed = 11;
  const Corpus c = build_corpus(bench.drift_spec(), kCfg, g, spec);
  REQUIRE(c.size() == 40);
  CHECK(c.drift_label == "double-well");
  CHECK(c.seed == 11);
  const auto means = draw_initial_means(11, 40, 2.0);
  for (std::size_t j = 0; j < c.size(); ++j) {
    CHECK(std::abs(quadrature(c.pairs[j].f1) - 1.0) <= 1e-10);
    CHECK(std::abs(quadrature(c.pairs[j].f2) - 1.0) <= 1e-10);
    CHECK(c.pairs[j].init_mean == means[j]);
    CHECK(c.pairs[j].t1 == 0.015);
    CHECK(c.pairs[j].t2 == 0.016);
  }

  spec.count = 0;
  CHECK(kind_of([&] { build_corpus(bench.drift_spec(), kCfg, g, spec); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("build_corpus is deterministic") {
  const Grid2D g = Grid2D::square(4.0, 40);
  const auto bench = benchmark("quadruple-well");
  CorpusSpec spec;
  spec.count = 1;
  spec.seed = 5;
  const Corpus a = build_corpus(bench.drift_spec(), kCfg, g, spec);
  const Corpus b = build_corpus(bench.drift_spec(), kCfg, g, spec);
  CHECK(encode_corpus(a) == encode_corpus(b));
  spec.seed = 6;
  CHECK(encode_corpus(build_corpus(bench.drift_spec(), kCfg, g, spec)) != encode_corpus(a));
}

TEST_CASE("initial means are uniform on the square") {
  const int m = 20000;
  const auto means = draw_initial_means(3, m, 2.0);
  double sx = 0, sy = 0;
  for (const auto& p : means) {
    CHECK(std::abs(p[0]) <= 2.0);
    CHECK(std::abs(p[1]) <= 2.0);
    sx += p[0];
    sy += p[1];
  }
  // sd of U(-2, 2) is 4 / sqrt(12)
  const double tol = 3 * (4 / std::sqrt(12.0)) / std::sqrt(double(m));
  CHECK(std::abs(sx / m) <= tol);
  CHECK(std::abs(sy / m) <= tol);
  CHECK(draw_initial_means(3, 5, 2.0) == std::vector<Point2>(means.begin(), means.begin() + 5));
}

TEST_CASE("smoothing") {
  const Grid2D g = Grid2D::square(4.0, 80);
  const auto f = gaussian_density(g, {0.7, -1.1}, 0.01);
  CHECK(bit_equal(smooth_gaussian(f, 0.0), f));

  SUBCASE("constant field") {
    const auto c = smooth_gaussian(ScalarField(g, 2.5), 0.1);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(c[i] - 2.5) <= 1e-13);
  }

  SUBCASE("Gaussian convolution adds variances") {
    const Point2 mu{0.7, -1.1};
    // Raw samples (not renormalized) so the comparison isolates the convolution.
    auto pdf = [&](double var) {
      return sample(g, [&, var](double x, double y) {
        const double r2 = (x - mu[0]) * (x - mu[0]) + (y - mu[1]) * (y - mu[1]);
        return std::exp(-r2 / (2 * var)) / (2 * std::numbers::pi * var);
      });
    };
    const auto smoothed = smooth_gaussian(pdf(0.01), 0.1);
    const auto expect = pdf(0.11);
    double sup = 0;
    for (std::size_t i = 0; i < g.size(); ++i) sup = std::max(sup, std::abs(smoothed[i] - expect[i]));
    CHECK(sup <= 1e-3);
  }

  SUBCASE("mass is preserved, including near the boundary") {
    const auto edge = gaussian_density(g, {3.9, -3.8}, 0.05);
    for (double var : {0.01, 0.1, 0.5}) {
      CHECK(std::abs(quadrature(smooth_gaussian(edge, var)) - quadrature(edge)) <= 1e-12);
      CHECK(std::abs(quadrature(smooth_gaussian(f, var)) - quadrature(f)) <= 1e-12);
    }
  }

  CHECK(kind_of([&] { smooth_gaussian(f, -0.1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("perturb_gaussian") {
  const Grid2D g = Grid2D::square(4.0, 40);
  CorpusSpec spec;
  spec.count = 3;
  const Corpus c = build_corpus(benchmark("double-well").drift_spec(), kCfg, g, spec);
  const Corpus same = perturb_gaussian(c, 0.0);
  CHECK(encode_corpus(same) == encode_corpus(c));

  const Corpus noisy = perturb_gaussian(c, 0.1);
  CHECK(noisy.noise_level == 0.1);
  for (std::size_t j = 0; j < c.size(); ++j) {
    CHECK(bit_equal(noisy.pairs[j].f1, smooth_gaussian(c.pairs[j].f1, 0.1)));
    CHECK(std::abs(quadrature(noisy.pairs[j].f2) - quadrature(c.pairs[j].f2)) <= 1e-12);
  }
}

TEST_CASE("corpus persistence") {
  const Grid2D g = Grid2D::square(4.0, 30);
  CorpusSpec spec;
  spec.count = 2;
  spec.seed = 77;
  const Corpus c = perturb_gaussian(build_corpus(benchmark("rough").drift_spec(), kCfg, g, spec), 0.1);
  const auto dir = test_support::scratch_dir("dataset");
  const auto path = (dir / "c.bin").string();
  save_corpus(c, path);
  const Corpus back = load_corpus(path);
  CHECK(back == c);
  CHECK(back.noise_level == 0.1);
  CHECK(back.drift_label == "rough");
  CHECK(back.seed == 77);
  for (std::size_t j = 0; j < c.size(); ++j) {
    CHECK(bit_equal(back.pairs[j].f1, c.pairs[j].f1));
    CHECK(bit_equal(back.pairs[j].f2, c.pairs[j].f2));
  }

  const std::string bytes = encode_corpus(c);
  for (std::size_t cut : {bytes.size() - 1, bytes.size() - 9, bytes.size() / 2, std::size_t{10}}) {
    const auto k = kind_of([&] { decode_corpus(bytes.substr(0, cut)); });
    CHECK((k == ErrorKind::FormatVersionMismatch || k == ErrorKind::ChecksumMismatch));
  }
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  CHECK(kind_of([&] { decode_corpus(flipped); }) == ErrorKind::ChecksumMismatch);
  CHECK(kind_of([&] { decode_corpus("DRIFTDECOMP-CORPUS v2\n{}\n"); }) == ErrorKind::FormatVersionMismatch);
  CHECK(kind_of([&] { load_corpus((dir / "missing.bin").string()); }) == ErrorKind::IoError);
}
