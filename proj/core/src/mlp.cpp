#include "driftdecomp/mlp.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "driftdecomp/error.hpp"
#include "random.hpp"

namespace driftdecomp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd tanh_derivative(const MatrixXd& activated) {
  return (1.0 - activated.array().square()).matrix();
}

// tanh(z) = 1 - 2 / (exp(2z) + 1). Eigen vectorizes exp but not tanh for
// doubles; the absolute error stays at a few ulp and the limits are exact.
void tanh_inplace(MatrixXd& z) {
  z.array() = 1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0);
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw Error(ErrorKind::InvalidArgument, "network needs an input and an output layer");
  for (int n : sizes_) {
    if (n <= 0) throw Error(ErrorKind::InvalidArgument, "layer sizes must be positive");
  }
  Index total = 0;
  for (std::size_t l = 0; l < layers(); ++l) {
    offsets_.push_back(total);
    total += static_cast<Index>(sizes_[l] + 1) * sizes_[l + 1];
  }
  params_ = VectorXd::Zero(total);
}

Mlp Mlp::glorot_uniform(std::vector<int> layer_sizes, std::uint64_t seed) {
  Mlp net(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const int fan_in = net.sizes_[l];
    const int fan_out = net.sizes_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    const Index begin = net.weight_offset(l);
    for (Index k = 0; k < static_cast<Index>(fan_in) * fan_out; ++k) {
      net.params_[begin + k] = detail::uniform(rng, -limit, limit);
    }
  }
  return net;
}

void Mlp::set_params(const VectorXd& theta) {
  if (theta.size() != params_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "parameter vector has " + std::to_string(theta.size()) +
                                                  " entries, network needs " + std::to_string(params_.size()));
  }
  params_ = theta;
}

Index Mlp::bias_offset(std::size_t layer) const {
  return offsets_[layer] + static_cast<Index>(sizes_[layer]) * sizes_[layer + 1];
}

Mlp::ConstWeights Mlp::weights(std::size_t layer) const {
  return ConstWeights(params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]);
}

Eigen::Map<const VectorXd> Mlp::bias(std::size_t layer) const {
  return Eigen::Map<const VectorXd>(params_.data() + bias_offset(layer), sizes_[layer + 1]);
}

Mlp::Weights Mlp::grad_weights(VectorXd& g, std::size_t layer) const {
  return Weights(g.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]);
}

void Mlp::check_input(Index rows) const {
  if (rows != input_size()) {
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(rows) + " components, network expects " +
                                                  std::to_string(input_size()));
  }
}

void Mlp::require_scalar_output() const {
  if (output_size() != 1) throw Error(ErrorKind::RequiresScalarOutput, "operation needs a scalar-output network");
}

void Mlp::record(const MatrixXd& inputs, Tape& tape) const {
  check_input(inputs.rows());
  tape.a.resize(layers() + 1);
  tape.a[0] = inputs;
  for (std::size_t l = 0; l < layers(); ++l) {
    MatrixXd& z = tape.a[l + 1];
    z.noalias() = weights(l) * tape.a[l];
    z.colwise() += bias(l);
    if (hidden(l)) tanh_inplace(z);
  }
}

Mlp::Tape Mlp::record(const MatrixXd& inputs) const {
  Tape tape;
  record(inputs, tape);
  return tape;
}

MatrixXd Mlp::forward_batch(const MatrixXd& inputs) const { return record(inputs).a.back(); }

VectorXd Mlp::forward(const VectorXd& x) const { return forward_batch(x); }

VectorXd Mlp::grad_params_batch(const Tape& tape, const MatrixXd& upstream) const {
  if (upstream.rows() != output_size() || upstream.cols() != tape.a.front().cols()) {
    throw Error(ErrorKind::DimensionMismatch, "upstream cotangent shape does not match the network output");
  }
  VectorXd g = VectorXd::Zero(params_.size());
  tape.adj.resize(layers() + 1);
  tape.adj[layers()] = upstream;
  for (std::size_t l = layers(); l-- > 0;) {
    MatrixXd& adj = tape.adj[l + 1];
    if (hidden(l)) adj.array() *= 1.0 - tape.a[l + 1].array().square();
    grad_weights(g, l).noalias() = adj * tape.a[l].transpose();
    g.segment(bias_offset(l), sizes_[l + 1]) = adj.rowwise().sum();
    if (l > 0) tape.adj[l].noalias() = weights(l).transpose() * adj;
  }
  return g;
}

VectorXd Mlp::grad_params(const VectorXd& x, const VectorXd& upstream) const {
  return grad_params_batch(record(x), upstream);
}

MatrixXd Mlp::grad_input(const VectorXd& x) const {
  const Tape tape = record(x);
  MatrixXd jac = MatrixXd::Identity(input_size(), input_size());
  for (std::size_t l = 0; l < layers(); ++l) {
    jac = weights(l) * jac;
    if (hidden(l)) jac = tanh_derivative(tape.a[l + 1]).asDiagonal() * jac;
  }
  return jac;
}

MatrixXd Mlp::input_gradient_batch(const Tape& tape) const {
  require_scalar_output();
  tape.adj.resize(layers() + 1);
  tape.adj[layers()].setOnes(1, tape.a.front().cols());
  for (std::size_t l = layers(); l-- > 0;) {
    MatrixXd& adj = tape.adj[l + 1];
    if (hidden(l)) adj.array() *= 1.0 - tape.a[l + 1].array().square();
    tape.adj[l].noalias() = weights(l).transpose() * adj;
  }
  return tape.adj[0];
}

VectorXd Mlp::grad_params_of_directional_input_grad_batch(const Tape& tape, const MatrixXd& directions,
                                                          const Eigen::RowVectorXd& weights_per_point) const {
  require_scalar_output();
  const Index n = tape.a.front().cols();
  if (directions.rows() != input_size() || directions.cols() != n || weights_per_point.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "direction/weight shapes do not match the batch");
  }
  const std::size_t depth = layers();
  auto& tangent = tape.tangent;
  auto& zdot = tape.zdot;
  auto& slope = tape.slope;
  auto& tangent_adj = tape.tangent_adj;
  auto& primal_adj = tape.adj;
  tangent.resize(depth + 1);
  zdot.resize(depth);
  slope.resize(depth);
  tangent_adj.resize(depth + 1);
  primal_adj.resize(depth + 1);

  // Tangent pass: t_0 = v, zdot_l = W_l t_{l-1}, t_l = s_l * zdot_l with
  // s_l = 1 - a_l^2 on hidden layers; the output tangent is <grad psi, v>.
  tangent[0] = directions;
  for (std::size_t l = 0; l < depth; ++l) {
    zdot[l].noalias() = weights(l) * tangent[l];
    if (hidden(l)) {
      slope[l] = 1.0 - tape.a[l + 1].array().square();
      tangent[l + 1] = slope[l].cwiseProduct(zdot[l]);
    } else {
      tangent[l + 1] = zdot[l];
    }
  }

  // Reverse sweep over the primal and tangent computations together. On
  // entry to layer l, tangent_adj[l+1] holds the adjoint of t_l and
  // primal_adj[l+1] the adjoint of a_l (absent above the top hidden layer).
  // Both are overwritten in place with the adjoints of zdot_l and z_l.
  VectorXd g = VectorXd::Zero(params_.size());
  tangent_adj[depth] = weights_per_point;
  for (std::size_t l = depth; l-- > 0;) {
    MatrixXd& t_adj = tangent_adj[l + 1];
    MatrixXd& a_adj = primal_adj[l + 1];
    const bool has_primal = hidden(l);
    if (has_primal) {
      // d s / d a = -2 a
      if (hidden(l + 1)) {
        a_adj.array() -= 2.0 * t_adj.array() * zdot[l].array() * tape.a[l + 1].array();
      } else {
        a_adj = -2.0 * t_adj.array() * zdot[l].array() * tape.a[l + 1].array();
      }
      a_adj.array() *= slope[l].array();  // now the adjoint of z_l
      t_adj.array() *= slope[l].array();  // now the adjoint of zdot_l
    }

    auto gw = grad_weights(g, l);
    gw.noalias() = t_adj * tangent[l].transpose();
    if (has_primal) {
      gw.noalias() += a_adj * tape.a[l].transpose();
      g.segment(bias_offset(l), sizes_[l + 1]) = a_adj.rowwise().sum();
    }
    if (l > 0) {
      tangent_adj[l].noalias() = weights(l).transpose() * t_adj;
      if (has_primal) primal_adj[l].noalias() = weights(l).transpose() * a_adj;
    }
  }
  return g;
}

VectorXd Mlp::grad_params_of_directional_input_grad(const VectorXd& x, const VectorXd& v, double upstream) const {
  require_scalar_output();
  check_input(x.size());
  if (v.size() != input_size()) throw Error(ErrorKind::DimensionMismatch, "direction length must match the input");
  return grad_params_of_directional_input_grad_batch(record(x), v, Eigen::RowVectorXd::Constant(1, upstream));
}

namespace {

constexpr std::string_view kNetMagic = "DRIFTDECOMP-NET v1";

}  // namespace

std::string encode_mlp(const Mlp& net) {
  std::string out(kNetMagic);
  out += '\n';
  for (std::size_t i = 0; i < net.layer_sizes().size(); ++i) {
    if (i > 0) out += ' ';
    out += std::to_string(net.layer_sizes()[i]);
  }
  out += '\n';
  detail::append_doubles(out, std::span<const double>(net.params().data(), static_cast<std::size_t>(net.param_count())));
  return out;
}

Mlp decode_mlp(const std::string& bytes) {
  const auto nl1 = bytes.find('\n');
  if (nl1 == std::string::npos || std::string_view(bytes).substr(0, nl1) != kNetMagic) {
    throw Error(ErrorKind::FormatVersionMismatch, "missing DRIFTDECOMP-NET v1 header");
  }
  const auto nl2 = bytes.find('\n', nl1 + 1);
  if (nl2 == std::string::npos) throw Error(ErrorKind::FormatVersionMismatch, "truncated checkpoint header");
  std::istringstream line(bytes.substr(nl1 + 1, nl2 - nl1 - 1));
  std::vector<int> sizes;
  for (int n; line >> n;) sizes.push_back(n);
  if (!line.eof() || sizes.size() < 2) throw Error(ErrorKind::FormatVersionMismatch, "malformed layer-size line");

  Mlp net(sizes);
  const std::size_t count = static_cast<std::size_t>(net.param_count());
  if (bytes.size() - nl2 - 1 != 8 * count) {
    throw Error(ErrorKind::FormatVersionMismatch, "checkpoint payload size does not match its layer sizes");
  }
  detail::load_doubles(bytes.data() + nl2 + 1, std::span<double>(net.params().data(), count));
  return net;
}

void save_mlp(const Mlp& net, const std::string& path) { detail::write_file(path, encode_mlp(net)); }

Mlp load_mlp(const std::string& path) { return decode_mlp(detail::read_file(path)); }

}  // namespace driftdecomp
