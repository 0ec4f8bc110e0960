#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace driftdecomp {

/// Fully connected network: tanh on hidden layers, identity on the output.
///
/// All weights and biases live in one flat parameter vector. Layer l occupies
/// a contiguous block holding its n_out x n_in weight matrix in row-major
/// order followed by its n_out biases.
///
/// Batched entry points take inputs as columns (d x n) and return sums of
/// the per-point quantities over the columns.
class Mlp {
 public:
  /// Cached activations of one batched forward pass; a[0] is the input.
  struct Tape {
    std::vector<Eigen::MatrixXd> a;

    // Per-layer scratch for the backward sweeps, sized on first use.
    mutable std::vector<Eigen::MatrixXd> adj, tangent, zdot, slope, tangent_adj;
  };

  /// Network with every parameter zero.
  explicit Mlp(std::vector<int> layer_sizes);

  /// Glorot/Xavier uniform weights (gain 1) and zero biases.
  static Mlp glorot_uniform(std::vector<int> layer_sizes, std::uint64_t seed);

  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  int input_size() const noexcept { return sizes_.front(); }
  int output_size() const noexcept { return sizes_.back(); }
  Eigen::Index param_count() const noexcept { return params_.size(); }

  const Eigen::VectorXd& params() const noexcept { return params_; }
  Eigen::VectorXd& params() noexcept { return params_; }
  void set_params(const Eigen::VectorXd& theta);

  /// Offsets of layer l's weight block and bias block in the parameter vector.
  Eigen::Index weight_offset(std::size_t layer) const { return offsets_[layer]; }
  Eigen::Index bias_offset(std::size_t layer) const;

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  /// d/dtheta <upstream, forward(x)>.
  Eigen::VectorXd grad_params(const Eigen::VectorXd& x, const Eigen::VectorXd& upstream) const;

  /// Jacobian d forward / d x, output_size x input_size.
  Eigen::MatrixXd grad_input(const Eigen::VectorXd& x) const;

  /// d/dtheta of upstream * <grad_x psi(x), v> for a scalar-output network,
  /// by reverse differentiation of the forward-mode tangent pass.
  Eigen::VectorXd grad_params_of_directional_input_grad(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                                        double upstream) const;

  Tape record(const Eigen::MatrixXd& inputs) const;
  /// Same, reusing the storage already held by `tape`.
  void record(const Eigen::MatrixXd& inputs, Tape& tape) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  /// sum_n d/dtheta <U(:, n), forward(x_n)>.
  Eigen::VectorXd grad_params_batch(const Tape& tape, const Eigen::MatrixXd& upstream) const;

  /// Columns are grad_x psi(x_n); scalar-output networks only.
  Eigen::MatrixXd input_gradient_batch(const Tape& tape) const;

  /// sum_n w_n d/dtheta <grad_x psi(x_n), V(:, n)>; scalar-output networks only.
  Eigen::VectorXd grad_params_of_directional_input_grad_batch(const Tape& tape, const Eigen::MatrixXd& directions,
                                                              const Eigen::RowVectorXd& weights) const;

  bool operator==(const Mlp& other) const { return sizes_ == other.sizes_ && params_ == other.params_; }

 private:
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ConstWeights = Eigen::Map<const RowMatrix>;
  using Weights = Eigen::Map<RowMatrix>;

  std::size_t layers() const noexcept { return sizes_.size() - 1; }
  bool hidden(std::size_t layer) const noexcept { return layer + 1 < layers(); }
  ConstWeights weights(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
  Weights grad_weights(Eigen::VectorXd& g, std::size_t layer) const;
  void check_input(Eigen::Index rows) const;
  void require_scalar_output() const;

  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
};

// Checkpoint: `DRIFTDECOMP-NET v1`, the space-separated layer sizes, then the
// parameter vector as little-endian float64.
std::string encode_mlp(const Mlp& net);
Mlp decode_mlp(const std::string& bytes);
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace driftdecomp
