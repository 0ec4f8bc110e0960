#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "driftdecomp/dataset.hpp"
#include "driftdecomp/metrics.hpp"
#include "driftdecomp/poisson.hpp"
#include "driftdecomp/reference.hpp"
#include "driftdecomp/training.hpp"
#include "test_support.hpp"

using namespace driftdecomp;
using test_support::kind_of;
using test_support::rel_error;

namespace {

DriftSpec ou_drift() {
  return {"ou", [](double x, double y) { return Point2{-x, -y}; }, {}, {}, {}};
}

Mlp affine_net(double a11, double a12, double a21, double a22, double c1, double c2) {
  Mlp net({2, 2});
  net.params() << a11, a12, a21, a22, c1, c2;
  return net;
}

SnapshotPair static_pair(const Grid2D& g, Point2 m) {
  const auto f = gaussian_density(g, m, 0.05);
  return {f, f, 0.015, 0.016, m, 0};
}

Corpus small_corpus(const DriftSpec& d, int n, int m, std::uint64_t seed) {
  CorpusSpec spec;
  spec.count = m;
  spec.seed = seed;
  return build_corpus(d, {1e-4, 2.0, 0.0}, Grid2D::square(4.0, n), spec);
}

double energy(const VectorField& v) {
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v.ux()[i] * v.ux()[i] + v.uy()[i] * v.uy()[i];
  return s * v.grid().cell_measure();
}

}  // namespace

TEST_CASE("phase1_loss closed forms") {
  const Grid2D g = Grid2D::square(4.0, 40);
  std::vector<SnapshotPair> still{static_pair(g, {0.5, 0.5}), static_pair(g, {-1, 0.2}), static_pair(g, {0, -1.5})};
  CHECK(phase1_loss(Mlp({2, 50, 50, 2}), still) == 0.0);

  // Constant drift c on mass-one densities whose centroid does not move.
  const double c1 = 0.3, c2 = -1.2;
  const double loss = phase1_loss(affine_net(0, 0, 0, 0, c1, c2), still);
  CHECK(loss == doctest::Approx(3 * (c1 * c1 + c2 * c2)).epsilon(1e-12));

  CHECK(kind_of([&] { phase1_loss(Mlp({2, 4, 2}), std::span<const SnapshotPair>{}); }) == ErrorKind::EmptyBatch);
  CHECK(kind_of([&] { phase1_loss(Mlp({2, 4, 1}), still); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("phase1_loss of the exact OU drift is small") {
  const Corpus c = small_corpus(ou_drift(), 80, 10, 4);
  const Mlp exact = affine_net(-1, 0, 0, -1, 0, 0);
  for (const auto& p : c.pairs) CHECK(phase1_loss(exact, std::span(&p, 1)) <= 1e-3);
  // The tabulated-field overload agrees.
  CHECK(phase1_loss(tabulate_drift(exact, c.grid), c.pairs) ==
        doctest::Approx(phase1_loss(exact, c.pairs)).epsilon(1e-12));
}

TEST_CASE("phase1_loss is invariant under batch order") {
  const Corpus c = small_corpus(benchmark("double-well").drift_spec(), 30, 6, 8);
  const Mlp net = Mlp::glorot_uniform({2, 50, 50, 2}, 5);
  std::vector<SnapshotPair> batch = c.pairs;
  const double base = phase1_loss(net, batch);
  const double grad_base = phase1_loss_and_gradient(net, batch).first;
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(batch.begin(), batch.end(), rng);
    CHECK(phase1_loss(net, batch) == base);
    CHECK(phase1_loss_and_gradient(net, batch).first == grad_base);
    CHECK(grad_base == doctest::Approx(base).epsilon(1e-13));
  }
}

TEST_CASE("loss gradients agree with central differences") {
  const Corpus c = small_corpus(benchmark("double-well").drift_spec(), 20, 3, 2);
  const Grid2D& g = c.grid;
  const VectorField bstar = sample(g, [](double x, double y) { return benchmark("double-well").drift(x, y); });
  std::mt19937_64 rng(77);
  const double h = 1e-5;
  for (int t = 0; t < 5; ++t) {
    Mlp nb = Mlp::glorot_uniform({2, 10, 10, 2}, rng());
    Mlp np = Mlp::glorot_uniform({2, 10, 10, 1}, rng());
    nb.params() += test_support::random_vector(rng, nb.param_count(), 0.2);
    np.params() += test_support::random_vector(rng, np.param_count(), 0.2);

    const auto [l1, g1] = phase1_loss_and_gradient(nb, c.pairs);
    CHECK(l1 == doctest::Approx(phase1_loss(nb, c.pairs)).epsilon(1e-12));
    Eigen::VectorXd fd1(nb.param_count());
    for (Eigen::Index k = 0; k < nb.param_count(); ++k) {
      Mlp p = nb, m = nb;
      p.params()[k] += h;
      m.params()[k] -= h;
      fd1[k] = (phase1_loss(p, c.pairs) - phase1_loss(m, c.pairs)) / (2 * h);
    }
    CHECK(rel_error(g1, fd1) <= 1e-5);

    const auto [l2, g2] = phase2_loss_and_gradient(np, bstar);
    CHECK(l2 == doctest::Approx(phase2_loss(np, bstar)).epsilon(1e-12));
    Eigen::VectorXd fd2(np.param_count());
    for (Eigen::Index k = 0; k < np.param_count(); ++k) {
      Mlp p = np, m = np;
      p.params()[k] += h;
      m.params()[k] -= h;
      fd2[k] = (phase2_loss(p, bstar) - phase2_loss(m, bstar)) / (2 * h);
    }
    CHECK(rel_error(g2, fd2) <= 1e-5);
  }
}

TEST_CASE("train_phase1") {
  const Corpus c = small_corpus(benchmark("double-well").drift_spec(), 20, 6, 3);
  Phase1Config cfg;
  cfg.epochs = 20;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-3;
  int calls = 0;
  const auto a = train_phase1(c, cfg, [&](int, double) { ++calls; });
  const auto b = train_phase1(c, cfg);
  CHECK(calls == 20);
  CHECK(a.loss_curve.size() == 20);
  CHECK(a.net.params() == b.net.params());
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.net.layer_sizes() == std::vector<int>{2, 50, 50, 2});

  cfg.seed = 2;
  CHECK(!(train_phase1(c, cfg).net == a.net));

  Phase1Config bad = cfg;
  bad.epochs = 0;
  CHECK(kind_of([&] { train_phase1(c, bad); }) == ErrorKind::InvalidArgument);
  bad = cfg;
  bad.batch_size = 7;
  CHECK(kind_of([&] { train_phase1(c, bad); }) == ErrorKind::InvalidArgument);
  bad.batch_size = 0;
  CHECK(kind_of([&] { train_phase1(c, bad); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("train_phase1 learns an OU drift") {
  CorpusSpec spec;
  spec.count = 40;
  spec.seed = 21;
  const Grid2D g = Grid2D::square(4.0, 41);
  const Corpus c = build_corpus(ou_drift(), {1e-4, 2.0, 0.0}, g, spec);
  Phase1Config cfg;
  cfg.epochs = 300;
  cfg.learning_rate = 1e-3;
  const auto r = train_phase1(c, cfg);
  const auto truth = sample(g, [](double x, double y) { return Point2{-x, -y}; });
  const double err = rrmse(tabulate_drift(r.net, g), truth, Region::square(2.0));
  CAPTURE(err);
  CHECK(err <= 0.05);
}

TEST_CASE("phase2_loss") {
  const Grid2D g = Grid2D::square(4.0, 30);
  const VectorField b = sample(g, [](double x, double y) { return Point2{y - x * x * x, -x}; });
  CHECK(phase2_loss(Mlp({2, 50, 50, 1}), b) == 0.0);

  const Mlp net = Mlp::glorot_uniform({2, 50, 50, 1}, 8);
  const auto grad = tabulate_potential_gradient(net, g);
  CHECK(phase2_loss(net, VectorField(g)) == doctest::Approx(0.5 * energy(grad)).epsilon(1e-12));
  CHECK(phase2_loss(net, b) == doctest::Approx(ritz_energy(grad, b)).epsilon(1e-12));

  // Only grad(psi) enters: an output-bias shift changes nothing.
  Mlp shifted = net;
  shifted.params()[shifted.bias_offset(2)] += 123.456;
  CHECK(phase2_loss(shifted, b) == phase2_loss(net, b));

  CHECK(kind_of([&] { phase2_loss(Mlp({2, 3, 2}), b); }) == ErrorKind::RequiresScalarOutput);
}

TEST_CASE("Ritz energy at the oracle minimizer") {
  const Grid2D g = Grid2D::square(4.0, 80);
  const auto bench = benchmark("double-well");
  const VectorField b = sample(g, [&](double x, double y) { return bench.drift(x, y); });
  const auto grad = gradient_fd(decompose_with_oracle(b).psi);
  const double value = ritz_energy(grad, b);
  CHECK(value < 0);
  CHECK(value == doctest::Approx(-0.5 * energy(grad)).epsilon(1e-2));
}

TEST_CASE("train_phase2 recovers a quadratic potential") {
  const Grid2D g = Grid2D::square(4.0, 31);
  const VectorField b = sample(g, [](double x, double y) { return Point2{-x, -y}; });
  Phase2Config cfg;
  cfg.epochs = 1000;
  cfg.learning_rate = 1e-3;
  const auto r = train_phase2(b, cfg);
  const auto truth = sample(g, [](double x, double y) { return 0.5 * (x * x + y * y); });
  const double err = rrmse(mean_shift(tabulate_potential(r.net, g), truth), truth);
  CAPTURE(err);
  CHECK(err <= 0.05);

  const auto& curve = r.loss_curve;
  CHECK(curve.back() <= curve.front());
  for (std::size_t e = 200; e <= curve.size(); e += 100) {
    double prev = 0, cur = 0;
    for (std::size_t k = e - 200; k < e - 100; ++k) prev += curve[k];
    for (std::size_t k = e - 100; k < e; ++k) cur += curve[k];
    CHECK(cur <= prev);
  }

  const auto again = train_phase2(b, cfg);
  CHECK(again.net.params() == r.net.params());
}

TEST_CASE("train_phase2 on a pure rotation approaches the natural-BC minimizer") {
  // (y, -x) has a nonzero normal component on the square, so the minimizer
  // is not constant; the learned gradient must match the oracle one.
  const Grid2D g = Grid2D::square(4.0, 31);
  const VectorField b = sample(g, [](double x, double y) { return Point2{y, -x}; });
  Phase2Config cfg;
  cfg.epochs = 1000;
  cfg.learning_rate = 1e-3;
  const auto r = train_phase2(b, cfg);
  const auto learned = tabulate_potential_gradient(r.net, g);
  const auto oracle = gradient_fd(decompose_with_oracle(b).psi);
  CHECK(rrmse(learned, oracle) <= 0.1);
  const double ratio = energy(learned) / energy(b);
  CAPTURE(ratio);
  CHECK(ratio == doctest::Approx(energy(oracle) / energy(b)).epsilon(0.1));
}

TEST_CASE("train_phase2 from a drift network") {
  const Grid2D g = Grid2D::square(4.0, 20);
  const Mlp nb = affine_net(-1, 0.5, -0.5, -1, 0.1, 0);
  Phase2Config cfg;
  cfg.epochs = 30;
  const auto a = train_phase2(nb, g, cfg);
  const auto b = train_phase2(tabulate_drift(nb, g), cfg);
  CHECK(a.net.params() == b.net.params());
  CHECK(a.loss_curve.size() == 30);
  CHECK(a.loss_curve.back() <= a.loss_curve.front());
  Phase2Config bad = cfg;
  bad.epochs = 0;
  CHECK(kind_of([&] { train_phase2(nb, g, bad); }) == ErrorKind::InvalidArgument);
}
