#include "driftdecomp/fp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "binary_io.hpp"
#include "driftdecomp/error.hpp"

namespace driftdecomp {

ScalarField gaussian_density(const Grid2D& grid, Point2 mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw Error(ErrorKind::DegenerateVariance, "Gaussian variance must be positive, got " + detail::exact(variance));
  }
  const double norm = 1.0 / (2.0 * std::numbers::pi * variance);
  ScalarField f = sample(grid, [&](double x, double y) {
    const double dx = x - mean[0];
    const double dy = y - mean[1];
    return norm * std::exp(-(dx * dx + dy * dy) / (2.0 * variance));
  });
  const double mass = quadrature(f);
  if (!(mass > 0.0)) {
    throw Error(ErrorKind::DegenerateVariance, "Gaussian underflows to zero on this grid");
  }
  for (double& v : f.values()) v /= mass;
  return f;
}

namespace {

// Bernoulli function z / (e^z - 1).
double bernoulli(double z) { return z == 0.0 ? 1.0 : z / std::expm1(z); }

}  // namespace

// Exponentially fitted flux F = lo * f_lo - hi * f_hi for drift b and
// diffusivity D across a face of width h. The weights are D/h B(-Pe) and
// D/h B(Pe) with Pe = b h / D; D = 0 gives plain upwinding.
FokkerPlanckSolver::FaceWeights FokkerPlanckSolver::face_weights(double b, double diffusivity, double h) {
  if (diffusivity == 0.0) return {std::max(b, 0.0), std::max(-b, 0.0)};
  const double pe = b * h / diffusivity;
  const double c = diffusivity / h;
  return {c * bernoulli(-pe), c * bernoulli(pe)};
}

FokkerPlanckSolver::FokkerPlanckSolver(const Grid2D& grid, const DriftSpec& drift, const SolverConfig& cfg)
    : grid_(grid), cfg_(cfg) {
  if (!(cfg.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (!(cfg.sigma2 >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma^2 must be non-negative");
  if (!drift.drift) throw Error(ErrorKind::InvalidArgument, "drift evaluator is empty");

  const VectorField b = sample(grid, drift.drift);
  if (!b.all_finite()) throw Error(ErrorKind::NonFiniteState, "drift is not finite on the grid");
  for (std::size_t i = 0; i < b.size(); ++i) {
    max_speed_ = std::max(max_speed_, std::hypot(b.ux()[i], b.uy()[i]));
  }

  const int nx = grid.nx();
  const int ny = grid.ny();
  const double diff = 0.5 * cfg.sigma2;
  face_x_.resize(static_cast<std::size_t>(std::max(nx - 1, 0)) * ny);
  face_y_.resize(static_cast<std::size_t>(nx) * std::max(ny - 1, 0));
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 1; ix < nx; ++ix) {
      const double bf = 0.5 * (b.ux()[grid.index(ix - 1, iy)] + b.ux()[grid.index(ix, iy)]);
      face_x_[static_cast<std::size_t>(iy) * (nx - 1) + (ix - 1)] = face_weights(bf, diff, grid.dx());
    }
  }
  for (int iy = 1; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double bf = 0.5 * (b.uy()[grid.index(ix, iy - 1)] + b.uy()[grid.index(ix, iy)]);
      face_y_[static_cast<std::size_t>(iy - 1) * nx + ix] = face_weights(bf, diff, grid.dy());
    }
  }

  if (diffusion_number() > 0.5) {
    throw Error(ErrorKind::StabilityViolation, "diffusion number " + detail::exact(diffusion_number()) + " > 1/2");
  }
  if (courant_number() > 1.0) {
    throw Error(ErrorKind::StabilityViolation, "Courant number " + detail::exact(courant_number()) + " > 1");
  }
}

double FokkerPlanckSolver::diffusion_number() const noexcept {
  return 0.5 * cfg_.sigma2 * cfg_.dt * (1.0 / (grid_.dx() * grid_.dx()) + 1.0 / (grid_.dy() * grid_.dy()));
}

double FokkerPlanckSolver::courant_number() const noexcept {
  return max_speed_ * cfg_.dt / std::min(grid_.dx(), grid_.dy());
}

void FokkerPlanckSolver::step_into(const std::vector<double>& in, std::vector<double>& out, std::vector<double>& fx,
                                   std::vector<double>& fy) const {
  const int nx = grid_.nx();
  const int ny = grid_.ny();
  const double dx = grid_.dx();
  const double dy = grid_.dy();

  // Interior face fluxes; boundary faces carry zero flux and are not stored.
  for (int iy = 0; iy < ny; ++iy) {
    const double* row = in.data() + static_cast<std::size_t>(iy) * nx;
    double* frow = fx.data() + static_cast<std::size_t>(iy) * (nx - 1);
    const FaceWeights* w = face_x_.data() + static_cast<std::size_t>(iy) * (nx - 1);
    for (int ix = 1; ix < nx; ++ix) frow[ix - 1] = w[ix - 1].lo * row[ix - 1] - w[ix - 1].hi * row[ix];
  }
  for (int iy = 1; iy < ny; ++iy) {
    const double* lo = in.data() + static_cast<std::size_t>(iy - 1) * nx;
    const double* hi = in.data() + static_cast<std::size_t>(iy) * nx;
    double* frow = fy.data() + static_cast<std::size_t>(iy - 1) * nx;
    const FaceWeights* w = face_y_.data() + static_cast<std::size_t>(iy - 1) * nx;
    for (int ix = 0; ix < nx; ++ix) frow[ix] = w[ix].lo * lo[ix] - w[ix].hi * hi[ix];
  }

  const double rx = cfg_.dt / dx;
  const double ry = cfg_.dt / dy;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double west = ix > 0 ? fx[static_cast<std::size_t>(iy) * (nx - 1) + ix - 1] : 0.0;
      const double east = ix < nx - 1 ? fx[static_cast<std::size_t>(iy) * (nx - 1) + ix] : 0.0;
      const double south = iy > 0 ? fy[static_cast<std::size_t>(iy - 1) * nx + ix] : 0.0;
      const double north = iy < ny - 1 ? fy[static_cast<std::size_t>(iy) * nx + ix] : 0.0;
      const std::size_t i = grid_.index(ix, iy);
      out[i] = in[i] - rx * (east - west) - ry * (north - south);
    }
  }
}

ScalarField FokkerPlanckSolver::step(const ScalarField& f) const {
  ScalarField out = f;
  advance(out, 1);
  return out;
}

void FokkerPlanckSolver::advance(ScalarField& f, std::int64_t steps) const {
  if (!(f.grid() == grid_)) throw Error(ErrorKind::DimensionMismatch, "density lives on a different grid");
  std::vector<double> next(f.size());
  std::vector<double> fx(face_x_.size());
  std::vector<double> fy(face_y_.size());
  for (std::int64_t s = 0; s < steps; ++s) {
    step_into(f.values(), next, fx, fy);
    f.values().swap(next);
    if (!f.all_finite()) {
      throw Error(ErrorKind::NonFiniteState, "density became non-finite at step " + std::to_string(s + 1));
    }
  }
}

ScalarField step(const ScalarField& f, const DriftSpec& drift, const SolverConfig& cfg) {
  return FokkerPlanckSolver(f.grid(), drift, cfg).step(f);
}

std::int64_t steps_for(double t, double dt) {
  const double ratio = t / dt;
  const double n = std::round(ratio);
  if (!std::isfinite(ratio) || std::abs(ratio - n) > 1e-6 * std::max(1.0, n)) {
    throw Error(ErrorKind::NotMultipleOfDt, detail::exact(t) + " is not a multiple of dt = " + detail::exact(dt));
  }
  return static_cast<std::int64_t>(n);
}

SnapshotPair solve_snapshots(const FokkerPlanckSolver& solver, const ScalarField& f0, double t1, double t2) {
  if (!(t1 > 0.0 && t2 > t1)) {
    throw Error(ErrorKind::NotMultipleOfDt, "snapshot times must satisfy 0 < t1 < t2");
  }
  const double dt = solver.config().dt;
  const std::int64_t n1 = steps_for(t1, dt);
  const std::int64_t m = steps_for(t2 - t1, dt);
  if (n1 < 1 || m < 1) throw Error(ErrorKind::NotMultipleOfDt, "snapshot times shorter than one step");

  SnapshotPair pair{f0, f0, t1, t2, {0.0, 0.0}, 0};
  solver.advance(pair.f1, n1);
  pair.f2 = pair.f1;
  solver.advance(pair.f2, m);
  return pair;
}

SnapshotPair solve_snapshots(const DriftSpec& drift, const SolverConfig& cfg, const ScalarField& f0, double t1,
                             double t2) {
  return solve_snapshots(FokkerPlanckSolver(f0.grid(), drift, cfg), f0, t1, t2);
}

}  // namespace driftdecomp
