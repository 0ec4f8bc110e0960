#pragma once

#include "driftdecomp/grid.hpp"

namespace driftdecomp {

struct PoissonOptions {
  double relative_tolerance = 1e-10;
  int max_iterations = 0;  // 0 means 10 * N
  /// Largest accepted |mean(rhs)| / rms(rhs) of the Neumann system before
  /// projection.
  double max_compatibility_correction = 1e-2;
};

struct PoissonResult {
  ScalarField psi;                 // zero nodal mean
  double residual_norm = 0.0;      // ||A psi - r||_2 after projection
  double system_rhs_norm = 0.0;    // ||r||_2 after projection
  double compatibility_correction = 0.0;
  int iterations = 0;
};

/// Cell-centered 5-point solve of  -lap(psi) = rhs  with the natural
/// boundary condition (grad(psi) + b) . n = 0 on the domain boundary.
///
/// The boundary flux enters the right-hand side using b linearly
/// extrapolated to the boundary faces. The singular Neumann system is made
/// consistent by removing its mean (reported as the compatibility
/// correction) and solved by conjugate gradients in the zero-mean subspace.
/// Throws IncompatibleRhs if the correction exceeds the configured bound and
/// SolverDiverged if CG does not reach the tolerance.
PoissonResult poisson_solve(const ScalarField& rhs, const VectorField& b, const PoissonOptions& options = {});

/// Applies the Neumann 5-point operator A (positive semidefinite, constants
/// in the kernel).
ScalarField neumann_laplacian(const ScalarField& psi);

struct OracleDecomposition {
  ScalarField psi;
  VectorField rotation;
  PoissonResult solve;
};

/// psi = poisson_solve(divergence_fd(b), b) and R = b + gradient_fd(psi).
OracleDecomposition decompose_with_oracle(const VectorField& b, const PoissonOptions& options = {});

}  // namespace driftdecomp
