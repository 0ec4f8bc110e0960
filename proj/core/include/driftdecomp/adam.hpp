#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace driftdecomp {

struct AdamState {
  Eigen::VectorXd m;  // first-moment accumulator
  Eigen::VectorXd v;  // second-moment accumulator
  std::int64_t step = 0;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState(Eigen::Index size, double lr)
      : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)), learning_rate(lr) {}
};

/// Bias-corrected Adam update of theta in place.
void adam_step(AdamState& state, Eigen::VectorXd& theta, const Eigen::VectorXd& gradient);

}  // namespace driftdecomp
