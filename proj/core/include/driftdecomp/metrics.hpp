#pragma once

#include <optional>

#include "driftdecomp/grid.hpp"

namespace driftdecomp {

/// Axis-aligned evaluation window; nodes outside it are ignored.
struct Region {
  double xmin, xmax, ymin, ymax;

  static Region square(double half_width) { return {-half_width, half_width, -half_width, half_width}; }
  bool contains(Point2 p) const { return p[0] >= xmin && p[0] <= xmax && p[1] >= ymin && p[1] <= ymax; }
};

/// sqrt(sum |learned - truth|^2) / sqrt(sum |truth|^2) over the nodes (inside
/// `region` when given). Throws ZeroReference if the truth vanishes there.
double rrmse(const ScalarField& learned, const ScalarField& truth, std::optional<Region> region = std::nullopt);
double rrmse(const VectorField& learned, const VectorField& truth, std::optional<Region> region = std::nullopt);

/// psi_nn + mean(psi_true - psi_nn): the shifted field has the nodal mean of psi_true.
ScalarField mean_shift(const ScalarField& psi_nn, const ScalarField& psi_true);

/// R = b* + grad(psi), componentwise.
VectorField recover_rotation(const VectorField& b_star, const VectorField& grad_psi);

}  // namespace driftdecomp
