#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftdecomp/grid.hpp"

namespace driftdecomp {

/// Closed-form drift b(x, y), optionally with its decomposition
/// b = -grad(psi) + R for ground truth.
struct DriftSpec {
  std::string label;
  VectorFunction drift;
  ScalarFunction potential;           // psi, may be empty
  VectorFunction potential_gradient;  // grad(psi), may be empty
  VectorFunction rotation;            // R, may be empty

  bool has_decomposition() const { return potential && potential_gradient && rotation; }
};

struct SolverConfig {
  double dt = 1e-4;
  double sigma2 = 2.0;
  double t_end = 0.0;
};

/// Density snapshots at t1 < t2 for one initial condition.
struct SnapshotPair {
  ScalarField f1;
  ScalarField f2;
  double t1 = 0.0;
  double t2 = 0.0;
  Point2 init_mean{0.0, 0.0};
  std::uint64_t seed = 0;

  bool operator==(const SnapshotPair&) const = default;
};

/// Isotropic Gaussian pdf sampled at the nodes and rescaled to unit
/// quadrature. Throws DegenerateVariance for variance <= 0.
ScalarField gaussian_density(const Grid2D& grid, Point2 mean, double variance);

/// Explicit finite-volume scheme for  df/dt + div(b f) = 1/2 lap(sigma^2 f)
/// with zero total flux through the domain boundary.
///
/// The face drift is the average of the two adjacent node drifts. Each face
/// flux combines advection and diffusion in exponentially fitted
/// (Scharfetter-Gummel) form: it reduces to first-order upwinding when
/// sigma^2 = 0 and to central differences when the drift vanishes, and it
/// carries no first-order numerical diffusion in between. Face weights are
/// tabulated once on construction, which also checks the explicit stability
/// bound.
class FokkerPlanckSolver {
 public:
  FokkerPlanckSolver(const Grid2D& grid, const DriftSpec& drift, const SolverConfig& cfg);

  const Grid2D& grid() const noexcept { return grid_; }
  const SolverConfig& config() const noexcept { return cfg_; }

  /// Diffusion number (sigma^2/2) dt (1/dx^2 + 1/dy^2); must be <= 1/2.
  double diffusion_number() const noexcept;
  /// max|b| dt / min(dx, dy); must be <= 1.
  double courant_number() const noexcept;

  ScalarField step(const ScalarField& f) const;
  /// Applies `steps` explicit steps in place.
  void advance(ScalarField& f, std::int64_t steps) const;

 private:
  void step_into(const std::vector<double>& in, std::vector<double>& out, std::vector<double>& fx,
                 std::vector<double>& fy) const;

  struct FaceWeights {
    double lo, hi;
  };
  static FaceWeights face_weights(double b, double diffusivity, double h);

  Grid2D grid_;
  SolverConfig cfg_;
  std::vector<FaceWeights> face_x_;  // (nx-1) * ny interior x-faces
  std::vector<FaceWeights> face_y_;  // nx * (ny-1) interior y-faces
  double max_speed_ = 0.0;
};

/// One step of the scheme above.
ScalarField step(const ScalarField& f, const DriftSpec& drift, const SolverConfig& cfg);

/// Number of dt steps that make up `t`; throws NotMultipleOfDt otherwise.
std::int64_t steps_for(double t, double dt);

/// Runs from f0 to t1, then on to t2. Requires 0 < t1 < t2 with both t1 and
/// t2 - t1 integer multiples of cfg.dt.
SnapshotPair solve_snapshots(const DriftSpec& drift, const SolverConfig& cfg, const ScalarField& f0, double t1,
                             double t2);
SnapshotPair solve_snapshots(const FokkerPlanckSolver& solver, const ScalarField& f0, double t1, double t2);

}  // namespace driftdecomp
