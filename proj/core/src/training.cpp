#include "driftdecomp/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "binary_io.hpp"
#include "driftdecomp/adam.hpp"
#include "driftdecomp/error.hpp"
#include "driftdecomp/fp_solver.hpp"
#include "random.hpp"

namespace driftdecomp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

using ConstRow = Eigen::Map<const Eigen::RowVectorXd>;

ConstRow as_row(const std::vector<double>& v) { return ConstRow(v.data(), static_cast<Eigen::Index>(v.size())); }

struct MomentTerm {
  const SnapshotPair* pair;
  Eigen::Vector2d velocity;  // centroid finite difference over [t1, t2]
};

MomentTerm moment_term(const SnapshotPair& p) {
  if (!(p.t2 > p.t1)) throw Error(ErrorKind::InvalidArgument, "snapshot pair needs t2 > t1");
  const Point2 c1 = centroid(p.f1);
  const Point2 c2 = centroid(p.f2);
  const double inv = 1.0 / (p.t2 - p.t1);
  return {&p, {(c2[0] - c1[0]) * inv, (c2[1] - c1[1]) * inv}};
}

void check_batch(std::span<const SnapshotPair> batch, const Grid2D& grid) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "phase-1 batch is empty");
  for (const auto& p : batch) {
    if (!(p.f1.grid() == grid)) throw Error(ErrorKind::DimensionMismatch, "batch pair lives on a different grid");
  }
}

double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

// Residuals r_jk and the loss for drift rows bx, by (1 x N each).
template <class Row>
double moment_loss(const Row& bx, const Row& by, const std::vector<MomentTerm>& terms, double cell,
                   std::vector<Eigen::Vector2d>* residuals) {
  std::vector<double> per_pair;
  per_pair.reserve(terms.size());
  for (const auto& t : terms) {
    const ConstRow f = as_row(t.pair->f1.values());
    const Eigen::Vector2d r(t.velocity[0] - cell * bx.dot(f), t.velocity[1] - cell * by.dot(f));
    per_pair.push_back(r.squaredNorm());
    if (residuals) residuals->push_back(r);
  }
  return sorted_sum(std::move(per_pair));
}

void check_finite_loss(double loss, const char* phase, int epoch) {
  if (!std::isfinite(loss)) {
    throw Error(ErrorKind::NonFiniteLoss,
                std::string(phase) + " loss became non-finite at epoch " + std::to_string(epoch));
  }
}

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

MatrixXd grid_nodes(const Grid2D& grid) {
  MatrixXd x(2, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point2 p = grid.node(i);
    x(0, static_cast<Eigen::Index>(i)) = p[0];
    x(1, static_cast<Eigen::Index>(i)) = p[1];
  }
  return x;
}

VectorField tabulate_drift(const Mlp& net_b, const Grid2D& grid) {
  if (net_b.input_size() != 2 || net_b.output_size() != 2) {
    throw Error(ErrorKind::DimensionMismatch, "drift network must map R^2 to R^2");
  }
  const MatrixXd out = net_b.forward_batch(grid_nodes(grid));
  VectorField b(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    b.ux()[i] = out(0, static_cast<Eigen::Index>(i));
    b.uy()[i] = out(1, static_cast<Eigen::Index>(i));
  }
  return b;
}

double phase1_loss(const VectorField& drift, std::span<const SnapshotPair> batch) {
  check_batch(batch, drift.grid());
  std::vector<MomentTerm> terms;
  for (const auto& p : batch) terms.push_back(moment_term(p));
  return moment_loss(as_row(drift.ux()), as_row(drift.uy()), terms, drift.grid().cell_measure(), nullptr);
}

double phase1_loss(const Mlp& net_b, std::span<const SnapshotPair> batch) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "phase-1 batch is empty");
  return phase1_loss(tabulate_drift(net_b, batch.front().f1.grid()), batch);
}

namespace {

std::pair<double, VectorXd> phase1_step(const Mlp& net, const Mlp::Tape& tape, const std::vector<MomentTerm>& terms,
                                        double cell) {
  const MatrixXd& out = tape.a.back();
  std::vector<Eigen::Vector2d> residuals;
  const double loss = moment_loss(out.row(0), out.row(1), terms, cell, &residuals);

  MatrixXd upstream = MatrixXd::Zero(2, out.cols());
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const ConstRow f = as_row(terms[j].pair->f1.values());
    upstream.row(0) += (-2.0 * cell * residuals[j][0]) * f;
    upstream.row(1) += (-2.0 * cell * residuals[j][1]) * f;
  }
  return {loss, net.grad_params_batch(tape, upstream)};
}

}  // namespace

std::pair<double, VectorXd> phase1_loss_and_gradient(const Mlp& net_b, std::span<const SnapshotPair> batch) {
  if (net_b.input_size() != 2 || net_b.output_size() != 2) {
    throw Error(ErrorKind::DimensionMismatch, "drift network must map R^2 to R^2");
  }
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "phase-1 batch is empty");
  const Grid2D& grid = batch.front().f1.grid();
  check_batch(batch, grid);
  std::vector<MomentTerm> terms;
  for (const auto& p : batch) terms.push_back(moment_term(p));
  return phase1_step(net_b, net_b.record(grid_nodes(grid)), terms, grid.cell_measure());
}

TrainingResult train_phase1(const Corpus& corpus, const Phase1Config& cfg, const EpochCallback& on_epoch) {
  const int m = static_cast<int>(corpus.pairs.size());
  if (cfg.epochs < 1) throw Error(ErrorKind::InvalidArgument, "phase 1 needs epochs >= 1");
  if (m < 1) throw Error(ErrorKind::EmptyBatch, "corpus is empty");
  if (cfg.batch_size < 1 || cfg.batch_size > m) {
    throw Error(ErrorKind::InvalidArgument, "phase-1 batch size must lie in [1, M]");
  }
  check_batch(corpus.pairs, corpus.grid);

  Mlp net = Mlp::glorot_uniform(layer_sizes(2, cfg.hidden, 2), cfg.seed);
  AdamState adam(net.param_count(), cfg.learning_rate);
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  std::vector<MomentTerm> all;
  for (const auto& p : corpus.pairs) all.push_back(moment_term(p));
  const MatrixXd nodes = grid_nodes(corpus.grid);
  const double cell = corpus.grid.cell_measure();

  std::vector<int> order(static_cast<std::size_t>(m));
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(cfg.epochs));
  std::vector<MomentTerm> batch;
  Mlp::Tape tape;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    detail::shuffle(order, shuffle_rng);
    double epoch_loss = 0.0;
    for (int start = 0; start < m; start += cfg.batch_size) {
      batch.clear();
      for (int k = start; k < std::min(m, start + cfg.batch_size); ++k) batch.push_back(all[order[k]]);
      net.record(nodes, tape);
      const auto [loss, grad] = phase1_step(net, tape, batch, cell);
      check_finite_loss(loss, "phase-1", epoch);
      epoch_loss += loss;
      adam_step(adam, net.params(), grad);
    }
    curve.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  return {std::move(net), std::move(curve)};
}

double ritz_energy(const VectorField& grad_psi, const VectorField& b_star) {
  if (!(grad_psi.grid() == b_star.grid())) throw Error(ErrorKind::DimensionMismatch, "fields on different grids");
  double sum = 0.0;
  for (std::size_t i = 0; i < grad_psi.size(); ++i) {
    const double gx = grad_psi.ux()[i];
    const double gy = grad_psi.uy()[i];
    sum += 0.5 * (gx * gx + gy * gy) + gx * b_star.ux()[i] + gy * b_star.uy()[i];
  }
  return grad_psi.grid().cell_measure() * sum;
}

namespace {

void check_potential_net(const Mlp& net) {
  if (net.input_size() != 2) throw Error(ErrorKind::DimensionMismatch, "potential network must take 2 inputs");
  if (net.output_size() != 1) throw Error(ErrorKind::RequiresScalarOutput, "potential network must be scalar");
}

VectorField to_field(const Grid2D& grid, const MatrixXd& g) {
  VectorField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.ux()[i] = g(0, static_cast<Eigen::Index>(i));
    out.uy()[i] = g(1, static_cast<Eigen::Index>(i));
  }
  return out;
}

MatrixXd to_matrix(const VectorField& v) {
  MatrixXd m(2, static_cast<Eigen::Index>(v.size()));
  m.row(0) = as_row(v.ux());
  m.row(1) = as_row(v.uy());
  return m;
}

std::pair<double, VectorXd> phase2_step(const Mlp& net, const Mlp::Tape& tape, const VectorField& b_star,
                                        const MatrixXd& b_matrix) {
  const MatrixXd g = net.input_gradient_batch(tape);
  const double loss = ritz_energy(to_field(b_star.grid(), g), b_star);
  // d/dtheta of (|g|^2/2 + g.b) is d/dtheta <g, v> with v = g + b held fixed.
  const Eigen::RowVectorXd w = Eigen::RowVectorXd::Constant(g.cols(), b_star.grid().cell_measure());
  return {loss, net.grad_params_of_directional_input_grad_batch(tape, g + b_matrix, w)};
}

}  // namespace

VectorField tabulate_potential_gradient(const Mlp& net_psi, const Grid2D& grid) {
  check_potential_net(net_psi);
  return to_field(grid, net_psi.input_gradient_batch(net_psi.record(grid_nodes(grid))));
}

ScalarField tabulate_potential(const Mlp& net_psi, const Grid2D& grid) {
  check_potential_net(net_psi);
  const MatrixXd out = net_psi.forward_batch(grid_nodes(grid));
  return ScalarField(grid, std::vector<double>(out.data(), out.data() + out.size()));
}

double phase2_loss(const Mlp& net_psi, const VectorField& b_star) {
  return ritz_energy(tabulate_potential_gradient(net_psi, b_star.grid()), b_star);
}

std::pair<double, VectorXd> phase2_loss_and_gradient(const Mlp& net_psi, const VectorField& b_star) {
  check_potential_net(net_psi);
  return phase2_step(net_psi, net_psi.record(grid_nodes(b_star.grid())), b_star, to_matrix(b_star));
}

TrainingResult train_phase2(const VectorField& b_star, const Phase2Config& cfg, const EpochCallback& on_epoch) {
  if (cfg.epochs < 1) throw Error(ErrorKind::InvalidArgument, "phase 2 needs epochs >= 1");
  if (!b_star.all_finite()) throw Error(ErrorKind::NonFiniteState, "tabulated drift is not finite");

  Mlp net = Mlp::glorot_uniform(layer_sizes(2, cfg.hidden, 1), cfg.seed);
  AdamState adam(net.param_count(), cfg.learning_rate);
  const MatrixXd nodes = grid_nodes(b_star.grid());
  const MatrixXd b_matrix = to_matrix(b_star);

  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(cfg.epochs));
  Mlp::Tape tape;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    net.record(nodes, tape);
    const auto [loss, grad] = phase2_step(net, tape, b_star, b_matrix);
    check_finite_loss(loss, "phase-2", epoch);
    curve.push_back(loss);
    adam_step(adam, net.params(), grad);
    if (on_epoch) on_epoch(epoch, loss);
  }
  return {std::move(net), std::move(curve)};
}

TrainingResult train_phase2(const Mlp& net_b_star, const Grid2D& grid, const Phase2Config& cfg,
                            const EpochCallback& on_epoch) {
  return train_phase2(tabulate_drift(net_b_star, grid), cfg, on_epoch);
}

}  // namespace driftdecomp
