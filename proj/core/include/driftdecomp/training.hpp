#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "driftdecomp/dataset.hpp"
#include "driftdecomp/grid.hpp"
#include "driftdecomp/mlp.hpp"

namespace driftdecomp {

struct Phase1Config {
  int epochs = 10000;
  int batch_size = 5;
  double learning_rate = 1e-4;
  std::uint64_t seed = 1;
  std::vector<int> hidden{50, 50};
};

struct Phase2Config {
  int epochs = 10000;
  double learning_rate = 1e-4;
  std::uint64_t seed = 2;
  std::vector<int> hidden{50, 50};
};

struct TrainingResult {
  Mlp net;
  std::vector<double> loss_curve;  // one entry per epoch
};

/// Called as (epoch, loss) after every epoch.
using EpochCallback = std::function<void(int, double)>;

/// Grid nodes as the columns of a 2 x N matrix, in storage order.
Eigen::MatrixXd grid_nodes(const Grid2D& grid);

/// Evaluates a drift network with two outputs at every node.
VectorField tabulate_drift(const Mlp& net_b, const Grid2D& grid);

/// Moment-matching loss
///   sum_j sum_k [ (mu_jk(t2) - mu_jk(t1)) / (t2 - t1) - |dx| sum_i b_k(x_i) f_j(x_i, t1) ]^2
/// with unnormalized centroids mu. Per-pair terms are summed in sorted order,
/// so the value does not depend on the order of the batch.
double phase1_loss(const VectorField& drift, std::span<const SnapshotPair> batch);
double phase1_loss(const Mlp& net_b, std::span<const SnapshotPair> batch);

/// Loss and its parameter gradient for one batch.
std::pair<double, Eigen::VectorXd> phase1_loss_and_gradient(const Mlp& net_b, std::span<const SnapshotPair> batch);

/// Adam over `epochs` seeded shuffles of the corpus, one step per batch.
TrainingResult train_phase1(const Corpus& corpus, const Phase1Config& cfg, const EpochCallback& on_epoch = {});

/// Riemann sum |dx| sum_i [ |g_i|^2 / 2 + g_i . b_i ] for a tabulated gradient g.
double ritz_energy(const VectorField& grad_psi, const VectorField& b_star);

double phase2_loss(const Mlp& net_psi, const VectorField& b_star);
std::pair<double, Eigen::VectorXd> phase2_loss_and_gradient(const Mlp& net_psi, const VectorField& b_star);

/// grad_x psi_NN at every node.
VectorField tabulate_potential_gradient(const Mlp& net_psi, const Grid2D& grid);
ScalarField tabulate_potential(const Mlp& net_psi, const Grid2D& grid);

/// Full-grid Adam descent of the Ritz loss against b* tabulated once from
/// the frozen drift network.
TrainingResult train_phase2(const Mlp& net_b_star, const Grid2D& grid, const Phase2Config& cfg,
                            const EpochCallback& on_epoch = {});
TrainingResult train_phase2(const VectorField& b_star, const Phase2Config& cfg, const EpochCallback& on_epoch = {});

}  // namespace driftdecomp
