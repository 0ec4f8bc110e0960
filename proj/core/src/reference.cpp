#include "driftdecomp/reference.hpp"

#include <cmath>
#include <numbers>

#include "driftdecomp/error.hpp"

namespace driftdecomp {

Point2 Benchmark::drift(double x, double y) const {
  const auto [gx, gy] = potential_gradient(x, y);
  const auto [rx, ry] = rotation(x, y);
  return {-gx + rx, -gy + ry};
}

DriftSpec Benchmark::drift_spec() const {
  Benchmark copy = *this;
  return DriftSpec{name, [copy](double x, double y) { return copy.drift(x, y); }, potential, potential_gradient,
                   rotation};
}

namespace {

Point2 swirl(double x, double y) { return {y, -x}; }

Benchmark double_well() {
  Benchmark b;
  b.name = "double-well";
  b.potential = [](double x, double y) { return 0.25 * (x * x - 1.0) * (x * x - 1.0) + 0.5 * y * y; };
  b.potential_gradient = [](double x, double y) -> Point2 { return {x * x * x - x, y}; };
  b.rotation = swirl;
  return b;
}

Benchmark quadruple_well() {
  Benchmark b;
  b.name = "quadruple-well";
  b.potential = [](double x, double y) {
    return 0.125 * (x * x - 1.0) * (x * x - 1.0) + 0.125 * (y * y - 1.0) * (y * y - 1.0);
  };
  b.potential_gradient = [](double x, double y) -> Point2 {
    return {0.5 * (x * x * x - x), 0.5 * (y * y * y - y)};
  };
  b.rotation = swirl;
  b.count = 80;
  b.epochs = 100000;
  return b;
}

Benchmark oscillatory_rotation() {
  Benchmark b;
  b.name = "oscillatory-rotation";
  b.potential = [](double x, double y) { return 0.5 * (x * x + y * y); };
  b.potential_gradient = [](double x, double y) -> Point2 { return {x, y}; };
  b.rotation = [](double x, double y) -> Point2 { return {std::cos(y), -std::sin(x)}; };
  b.count = 80;
  b.epochs = 50000;
  return b;
}

Benchmark rough() {
  constexpr double eps = kRoughEpsilon;
  constexpr double k = 2.0 * std::numbers::pi / eps;
  constexpr double amp = eps * eps * eps * eps;
  Benchmark b;
  b.name = "rough";
  b.potential = [](double x, double y) {
    return 0.25 * (x * x - 1.0) * (x * x - 1.0) + 0.5 * y * y + amp * std::sin(k * x) * std::sin(k * y);
  };
  b.potential_gradient = [](double x, double y) -> Point2 {
    return {x * x * x - x + amp * k * std::cos(k * x) * std::sin(k * y),
            y + amp * k * std::sin(k * x) * std::cos(k * y)};
  };
  b.rotation = swirl;
  return b;
}

}  // namespace

Benchmark benchmark(std::string_view name) {
  if (name == "double-well") return double_well();
  if (name == "quadruple-well") return quadruple_well();
  if (name == "oscillatory-rotation") return oscillatory_rotation();
  if (name == "rough") return rough();
  throw Error(ErrorKind::UnknownBenchmark, "no benchmark named '" + std::string(name) + "'");
}

std::vector<std::string> benchmark_names() {
  return {"double-well", "quadruple-well", "oscillatory-rotation", "rough"};
}

}  // namespace driftdecomp
