#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "driftdecomp/mlp.hpp"
#include "test_support.hpp"

using namespace driftdecomp;
using test_support::kind_of;
using test_support::rel_error;

namespace {

// Straight-line evaluation from the documented parameter layout, written
// without Eigen or the library's tanh.
std::vector<double> reference_forward(const std::vector<int>& sizes, const Eigen::VectorXd& theta,
                                      std::vector<double> a) {
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int n_in = sizes[l], n_out = sizes[l + 1];
    std::vector<double> z(n_out);
    for (int o = 0; o < n_out; ++o) {
      double s = 0;
      for (int i = 0; i < n_in; ++i) s += theta[off + o * n_in + i] * a[i];
      z[o] = s + theta[off + n_out * n_in + o];
    }
    off += static_cast<std::size_t>(n_out) * (n_in + 1);
    if (l + 2 < sizes.size())
      for (double& v : z) v = std::tanh(v);
    a = z;
  }
  return a;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(xs.size());
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Mlp random_net(std::mt19937_64& rng, std::vector<int> sizes) {
  Mlp net = Mlp::glorot_uniform(std::move(sizes), rng());
  // Nonzero biases so every code path is exercised.
  for (std::size_t l = 0; l + 1 < net.layer_sizes().size(); ++l)
    for (int o = 0; o < net.layer_sizes()[l + 1]; ++o)
      net.params()[net.bias_offset(l) + o] = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
  return net;
}

template <class F>
Eigen::VectorXd fd_params(const Mlp& net, F&& value, double h = 1e-5) {
  Mlp probe = net;
  Eigen::VectorXd g(net.param_count());
  for (Eigen::Index k = 0; k < net.param_count(); ++k) {
    const double t = net.params()[k];
    probe.params()[k] = t + h;
    const double up = value(probe);
    probe.params()[k] = t - h;
    const double dn = value(probe);
    probe.params()[k] = t;
    g[k] = (up - dn) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("parameter layout") {
  const Mlp net({2, 50, 50, 1});
  CHECK(net.param_count() == 3 * 50 + 51 * 50 + 51 * 1);
  CHECK(net.weight_offset(0) == 0);
  CHECK(net.bias_offset(0) == 100);
  CHECK(net.weight_offset(1) == 150);
  CHECK(net.bias_offset(2) == net.param_count() - 1);
  CHECK(net.input_size() == 2);
  CHECK(net.output_size() == 1);
  CHECK_THROWS_AS(Mlp({2}), Error);
  CHECK_THROWS_AS(Mlp({2, 0, 1}), Error);
}

TEST_CASE("forward") {
  const Mlp zero({2, 50, 50, 2});
  CHECK(zero.forward(vec({0.3, -9.0})).isZero(0.0));

  Mlp lin({2, 1});
  lin.params() << 1.0, 0.0, 0.0;
  CHECK(lin.forward(vec({0.3, -0.7}))[0] == 0.3);

  const std::vector<int> sizes{2, 50, 50, 2};
  const Mlp net = Mlp::glorot_uniform(sizes, 1234);
  const auto ref = reference_forward(sizes, net.params(), {0.3, -0.7});
  const auto out = net.forward(vec({0.3, -0.7}));
  CHECK(std::abs(out[0] - ref[0]) <= 1e-14);
  CHECK(std::abs(out[1] - ref[1]) <= 1e-14);
  // Same checkpoint evaluated with NumPy.
  CHECK(std::abs(out[0] - -0.44277761654280307) <= 1e-14);
  CHECK(std::abs(out[1] - 0.10214728812634778) <= 1e-14);

  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const Mlp r = random_net(rng, {2, 7, 5, 3});
    const Eigen::VectorXd x = test_support::random_vector(rng, 2, 3.0);
    const auto want = reference_forward(r.layer_sizes(), r.params(), {x[0], x[1]});
    const auto got = r.forward(x);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(got[k] - want[k]) <= 1e-14);
  }

  CHECK(kind_of([&] { net.forward(vec({1.0})); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("glorot initialization") {
  const Mlp a = Mlp::glorot_uniform({2, 50, 50, 1}, 42);
  const Mlp b = Mlp::glorot_uniform({2, 50, 50, 1}, 42);
  CHECK(a.params() == b.params());
  CHECK(!(Mlp::glorot_uniform({2, 50, 50, 1}, 43) == a));
  const double limit = std::sqrt(6.0 / (50 + 50));
  for (int k = 0; k < 2500; ++k) CHECK(std::abs(a.params()[a.weight_offset(1) + k]) <= limit);
  CHECK(a.params().segment(a.bias_offset(1), 50).isZero(0.0));
}

TEST_CASE("grad_params closed forms") {
  const Mlp net = Mlp::glorot_uniform({2, 50, 50, 2}, 7);
  CHECK(net.grad_params(vec({0.2, 0.1}), Eigen::VectorXd::Zero(2)).isZero(0.0));

  Mlp lin({3, 2});
  lin.params() = Eigen::VectorXd::LinSpaced(8, -1, 1);
  const Eigen::VectorXd x = vec({0.5, -2.0, 3.0}), u = vec({1.5, -0.25});
  const Eigen::VectorXd g = lin.grad_params(x, u);
  for (int o = 0; o < 2; ++o) {
    for (int i = 0; i < 3; ++i) CHECK(g[o * 3 + i] == u[o] * x[i]);
    CHECK(g[6 + o] == u[o]);
  }
  CHECK(kind_of([&] { net.grad_params(vec({0.2, 0.1}), vec({1.0})); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("grad_input closed forms") {
  CHECK(Mlp({2, 50, 50, 1}).grad_input(vec({0.4, 0.4})).isZero(0.0));
  Mlp lin({2, 3});
  lin.params() << 1, 2, 3, 4, 5, 6, 0.1, 0.2, 0.3;
  Eigen::MatrixXd w(3, 2);
  w << 1, 2, 3, 4, 5, 6;
  CHECK(lin.grad_input(vec({9, -9})) == w);
}

TEST_CASE("directional gradient closed forms") {
  const Mlp net = Mlp::glorot_uniform({2, 50, 50, 1}, 3);
  CHECK(net.grad_params_of_directional_input_grad(vec({0.1, 0.2}), vec({0, 0}), 1.0).isZero(0.0));

  Mlp lin({2, 1});
  lin.params() << 0.3, -0.8, 5.0;
  const Eigen::VectorXd g = lin.grad_params_of_directional_input_grad(vec({1, 1}), vec({2.0, -3.0}), 0.5);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == -1.5);
  CHECK(g[2] == 0.0);

  CHECK(kind_of([&] { Mlp({2, 3, 2}).grad_params_of_directional_input_grad(vec({0, 0}), vec({1, 0}), 1.0); }) ==
        ErrorKind::RequiresScalarOutput);
  CHECK(kind_of([&] { net.grad_params_of_directional_input_grad(vec({0, 0}), vec({1, 0, 0}), 1.0); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("all gradient modes agree with central differences") {
  std::mt19937_64 rng(2024);
  double worst_p = 0, worst_x = 0, worst_d = 0;
  for (int t = 0; t < 20; ++t) {
    const Mlp nb = random_net(rng, {2, 50, 50, 2});
    const Mlp npsi = random_net(rng, {2, 50, 50, 1});
    const Eigen::VectorXd x = test_support::random_vector(rng, 2, 3.0);
    const Eigen::VectorXd u = test_support::random_vector(rng, 2);
    const Eigen::VectorXd v = test_support::random_vector(rng, 2);

    auto value = [&](const Mlp& n) { return u.dot(n.forward(x)); };
    worst_p = std::max(worst_p, rel_error(nb.grad_params(x, u), fd_params(nb, value)));

    const double h = 1e-5;
    Eigen::MatrixXd jfd(2, 2);
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      jfd.col(k) = (nb.forward(xp) - nb.forward(xm)) / (2 * h);
    }
    const Eigen::MatrixXd jac = nb.grad_input(x);
    worst_x = std::max(worst_x, (jac - jfd).cwiseAbs().maxCoeff() / jfd.cwiseAbs().maxCoeff());

    const double up = 0.7;
    auto dir = [&](const Mlp& n) { return up * (n.grad_input(x) * v)(0); };
    worst_d = std::max(worst_d, rel_error(npsi.grad_params_of_directional_input_grad(x, v, up), fd_params(npsi, dir)));
  }
  CAPTURE(worst_p);
  CAPTURE(worst_x);
  CAPTURE(worst_d);
  CHECK(worst_p <= 1e-6);
  CHECK(worst_x <= 1e-6);
  CHECK(worst_d <= 1e-5);
}

TEST_CASE("batched entry points equal sums of pointwise ones") {
  std::mt19937_64 rng(5);
  const Mlp nb = random_net(rng, {2, 9, 6, 2});
  const Mlp npsi = random_net(rng, {2, 9, 6, 1});
  const int n = 13;
  Eigen::MatrixXd X(2, n), U(2, n), V(2, n);
  Eigen::RowVectorXd w(n);
  for (int j = 0; j < n; ++j) {
    X.col(j) = test_support::random_vector(rng, 2, 2.0);
    U.col(j) = test_support::random_vector(rng, 2);
    V.col(j) = test_support::random_vector(rng, 2);
    w[j] = 0.1 + j;
  }
  Eigen::VectorXd gp = Eigen::VectorXd::Zero(nb.param_count());
  Eigen::VectorXd gd = Eigen::VectorXd::Zero(npsi.param_count());
  Eigen::MatrixXd fwd(2, n), grad(2, n);
  for (int j = 0; j < n; ++j) {
    gp += nb.grad_params(X.col(j), U.col(j));
    gd += w[j] * npsi.grad_params_of_directional_input_grad(X.col(j), V.col(j), 1.0);
    fwd.col(j) = nb.forward(X.col(j));
    grad.col(j) = npsi.grad_input(X.col(j)).transpose();
  }
  const auto tb = nb.record(X);
  const auto tp = npsi.record(X);
  CHECK((nb.forward_batch(X) - fwd).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(rel_error(nb.grad_params_batch(tb, U), gp) <= 1e-13);
  CHECK((npsi.input_gradient_batch(tp) - grad).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(rel_error(npsi.grad_params_of_directional_input_grad_batch(tp, V, w), gd) <= 1e-13);

  // A reused tape gives the same answers.
  Mlp::Tape tape = npsi.record(Eigen::MatrixXd::Ones(2, 4));
  npsi.record(X, tape);
  CHECK(npsi.grad_params_of_directional_input_grad_batch(tape, V, w) ==
        npsi.grad_params_of_directional_input_grad_batch(tp, V, w));
}

TEST_CASE("forward is Lipschitz with the product of spectral norms") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 5; ++t) {
    const Mlp net = random_net(rng, {2, 50, 50, 2});
    double lip = 1.0;
    const auto& s = net.layer_sizes();
    for (std::size_t l = 0; l + 1 < s.size(); ++l) {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(
          net.params().data() + net.weight_offset(l), s[l + 1], s[l]);
      lip *= Eigen::JacobiSVD<Eigen::MatrixXd>(w).singularValues()[0];
    }
    for (int k = 0; k < 200; ++k) {
      const Eigen::VectorXd a = test_support::random_vector(rng, 2, 4.0);
      const Eigen::VectorXd b = test_support::random_vector(rng, 2, 4.0);
      CHECK((net.forward(a) - net.forward(b)).norm() <= lip * (a - b).norm() * (1 + 1e-12));
    }
  }
}

TEST_CASE("checkpoint round-trip") {
  const Mlp net = Mlp::glorot_uniform({2, 50, 50, 1}, 99);
  const auto dir = test_support::scratch_dir("mlp");
  const auto path = (dir / "n.ckpt").string();
  save_mlp(net, path);
  const Mlp back = load_mlp(path);
  CHECK(back == net);
  CHECK(back.layer_sizes() == net.layer_sizes());
  const std::string bytes = encode_mlp(net);
  CHECK(bytes.rfind("DRIFTDECOMP-NET v1\n", 0) == 0);
  CHECK(kind_of([&] { decode_mlp(bytes.substr(0, bytes.size() - 1)); }) == ErrorKind::FormatVersionMismatch);
  CHECK(kind_of([&] { decode_mlp("DRIFTDECOMP-NET v0\n2 1\n"); }) == ErrorKind::FormatVersionMismatch);
  CHECK(kind_of([&] { load_mlp((dir / "nope").string()); }) == ErrorKind::IoError);
}
