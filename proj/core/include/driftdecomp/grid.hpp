#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace driftdecomp {

using Point2 = std::array<double, 2>;

/// Uniform cell-centered tensor grid over [xmin,xmax] x [ymin,ymax].
///
/// Node (ix, iy) sits at the center of its cell; storage is row-major with y
/// as the slow index, so the flat index of (ix, iy) is iy * nx + ix.
class Grid2D {
 public:
  Grid2D(double xmin, double xmax, double ymin, double ymax, int nx, int ny);

  /// The [-half, half]^2 square with n cells per side.
  static Grid2D square(double half_width, int n) { return {-half_width, half_width, -half_width, half_width, n, n}; }

  double xmin() const noexcept { return xmin_; }
  double xmax() const noexcept { return xmax_; }
  double ymin() const noexcept { return ymin_; }
  double ymax() const noexcept { return ymax_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double dx() const noexcept { return dx_; }
  double dy() const noexcept { return dy_; }

  std::size_t size() const noexcept { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }
  /// Cell measure |dx| = dx * dy.
  double cell_measure() const noexcept { return dx_ * dy_; }

  double x(int ix) const noexcept { return xmin_ + (ix + 0.5) * dx_; }
  double y(int iy) const noexcept { return ymin_ + (iy + 0.5) * dy_; }
  std::size_t index(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(ix);
  }
  Point2 node(std::size_t i) const noexcept {
    return {x(static_cast<int>(i % nx_)), y(static_cast<int>(i / nx_))};
  }

  bool operator==(const Grid2D&) const = default;

 private:
  double xmin_, xmax_, ymin_, ymax_;
  int nx_, ny_;
  double dx_, dy_;
};

class ScalarField {
 public:
  explicit ScalarField(const Grid2D& grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {}
  ScalarField(const Grid2D& grid, std::vector<double> values);

  const Grid2D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double at(int ix, int iy) const noexcept { return values_[grid_.index(ix, iy)]; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  bool all_finite() const noexcept;
  bool operator==(const ScalarField&) const = default;

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

class VectorField {
 public:
  explicit VectorField(const Grid2D& grid) : grid_(grid), ux_(grid.size(), 0.0), uy_(grid.size(), 0.0) {}
  VectorField(const Grid2D& grid, std::vector<double> ux, std::vector<double> uy);

  const Grid2D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return ux_.size(); }
  const std::vector<double>& ux() const noexcept { return ux_; }
  const std::vector<double>& uy() const noexcept { return uy_; }
  std::vector<double>& ux() noexcept { return ux_; }
  std::vector<double>& uy() noexcept { return uy_; }
  Point2 operator[](std::size_t i) const noexcept { return {ux_[i], uy_[i]}; }

  bool all_finite() const noexcept;
  bool operator==(const VectorField&) const = default;

 private:
  Grid2D grid_;
  std::vector<double> ux_, uy_;
};

using ScalarFunction = std::function<double(double, double)>;
using VectorFunction = std::function<Point2(double, double)>;

ScalarField sample(const Grid2D& grid, const ScalarFunction& fn);
VectorField sample(const Grid2D& grid, const VectorFunction& fn);

/// Riemann sum |dx| * sum_i f_i.
double quadrature(const ScalarField& field);

/// Unnormalized first moment (|dx| sum x_i f_i, |dx| sum y_i f_i).
Point2 centroid(const ScalarField& field);

/// Second-order central differences inside, second-order one-sided at the
/// boundary cells. Throws GridTooSmall when nx or ny < 3.
VectorField gradient_fd(const ScalarField& field);
ScalarField divergence_fd(const VectorField& field);

}  // namespace driftdecomp
