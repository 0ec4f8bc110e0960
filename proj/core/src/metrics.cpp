#include "driftdecomp/metrics.hpp"

#include <cmath>

#include "driftdecomp/error.hpp"

namespace driftdecomp {

namespace {

void require_same_grid(const Grid2D& a, const Grid2D& b) {
  if (!(a == b)) throw Error(ErrorKind::DimensionMismatch, "fields live on different grids");
}

double ratio(double err2, double ref2) {
  if (!(ref2 > 0.0)) throw Error(ErrorKind::ZeroReference, "reference field is identically zero");
  return std::sqrt(err2) / std::sqrt(ref2);
}

}  // namespace

double rrmse(const ScalarField& learned, const ScalarField& truth, std::optional<Region> region) {
  require_same_grid(learned.grid(), truth.grid());
  double err2 = 0.0;
  double ref2 = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (region && !region->contains(truth.grid().node(i))) continue;
    const double d = learned[i] - truth[i];
    err2 += d * d;
    ref2 += truth[i] * truth[i];
  }
  return ratio(err2, ref2);
}

double rrmse(const VectorField& learned, const VectorField& truth, std::optional<Region> region) {
  require_same_grid(learned.grid(), truth.grid());
  double err2 = 0.0;
  double ref2 = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (region && !region->contains(truth.grid().node(i))) continue;
    const double dx = learned.ux()[i] - truth.ux()[i];
    const double dy = learned.uy()[i] - truth.uy()[i];
    err2 += dx * dx + dy * dy;
    ref2 += truth.ux()[i] * truth.ux()[i] + truth.uy()[i] * truth.uy()[i];
  }
  return ratio(err2, ref2);
}

ScalarField mean_shift(const ScalarField& psi_nn, const ScalarField& psi_true) {
  require_same_grid(psi_nn.grid(), psi_true.grid());
  double diff = 0.0;
  for (std::size_t i = 0; i < psi_nn.size(); ++i) diff += psi_true[i] - psi_nn[i];
  const double shift = diff / static_cast<double>(psi_nn.size());
  ScalarField out = psi_nn;
  for (double& v : out.values()) v += shift;
  return out;
}

VectorField recover_rotation(const VectorField& b_star, const VectorField& grad_psi) {
  require_same_grid(b_star.grid(), grad_psi.grid());
  VectorField r = b_star;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r.ux()[i] += grad_psi.ux()[i];
    r.uy()[i] += grad_psi.uy()[i];
  }
  return r;
}

}  // namespace driftdecomp
