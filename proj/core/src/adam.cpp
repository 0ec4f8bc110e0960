#include "driftdecomp/adam.hpp"

#include <cmath>

#include "driftdecomp/error.hpp"

namespace driftdecomp {

void adam_step(AdamState& state, Eigen::VectorXd& theta, const Eigen::VectorXd& gradient) {
  if (theta.size() != gradient.size() || state.m.size() != theta.size() || state.v.size() != theta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "Adam state, parameters and gradient must share one shape");
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * gradient;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * gradient.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  theta.array() -= state.learning_rate * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.epsilon);
}

}  // namespace driftdecomp
