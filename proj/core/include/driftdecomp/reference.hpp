#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "driftdecomp/fp_solver.hpp"
#include "driftdecomp/grid.hpp"

namespace driftdecomp {

/// Ground-truth drift b = -grad(psi) + R with hand-derived gradients, plus the
/// experiment defaults that go with it.
struct Benchmark {
  std::string name;
  ScalarFunction potential;
  VectorFunction potential_gradient;
  VectorFunction rotation;
  double sigma2 = 2.0;
  int count = 40;       // M
  int epochs = 10000;   // both phases

  Point2 drift(double x, double y) const;
  DriftSpec drift_spec() const;
};

/// One of "double-well", "quadruple-well", "oscillatory-rotation", "rough".
/// Throws UnknownBenchmark otherwise.
Benchmark benchmark(std::string_view name);
std::vector<std::string> benchmark_names();

/// Oscillation length of the rough potential.
inline constexpr double kRoughEpsilon = 0.2;

}  // namespace driftdecomp
