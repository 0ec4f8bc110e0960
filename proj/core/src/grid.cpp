#include "driftdecomp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftdecomp/error.hpp"

namespace driftdecomp {

Grid2D::Grid2D(double xmin, double xmax, double ymin, double ymax, int nx, int ny)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), nx_(nx), ny_(ny) {
  if (nx <= 0 || ny <= 0) {
    throw Error(ErrorKind::InvalidArgument, "grid cell counts must be positive");
  }
  if (!(xmax > xmin) || !(ymax > ymin) || !std::isfinite(xmax - xmin) || !std::isfinite(ymax - ymin)) {
    throw Error(ErrorKind::InvalidArgument, "grid bounds must satisfy min < max");
  }
  dx_ = (xmax - xmin) / nx;
  dy_ = (ymax - ymin) / ny;
}

ScalarField::ScalarField(const Grid2D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "scalar field has " + std::to_string(values_.size()) + " values for " +
                    std::to_string(grid_.size()) + " nodes");
  }
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

VectorField::VectorField(const Grid2D& grid, std::vector<double> ux, std::vector<double> uy)
    : grid_(grid), ux_(std::move(ux)), uy_(std::move(uy)) {
  if (ux_.size() != grid_.size() || uy_.size() != grid_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "vector field component length does not match grid");
  }
}

bool VectorField::all_finite() const noexcept {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(ux_.begin(), ux_.end(), finite) && std::all_of(uy_.begin(), uy_.end(), finite);
}

ScalarField sample(const Grid2D& grid, const ScalarFunction& fn) {
  ScalarField out(grid);
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      out[grid.index(ix, iy)] = fn(grid.x(ix), grid.y(iy));
    }
  }
  return out;
}

VectorField sample(const Grid2D& grid, const VectorFunction& fn) {
  VectorField out(grid);
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      const auto [u, v] = fn(grid.x(ix), grid.y(iy));
      out.ux()[grid.index(ix, iy)] = u;
      out.uy()[grid.index(ix, iy)] = v;
    }
  }
  return out;
}

double quadrature(const ScalarField& field) {
  double sum = 0.0;
  for (double v : field.values()) sum += v;
  return sum * field.grid().dx() * field.grid().dy();
}

Point2 centroid(const ScalarField& field) {
  const Grid2D& g = field.grid();
  double sx = 0.0;
  double sy = 0.0;
  for (int iy = 0; iy < g.ny(); ++iy) {
    const double y = g.y(iy);
    for (int ix = 0; ix < g.nx(); ++ix) {
      const double f = field.at(ix, iy);
      sx += g.x(ix) * f;
      sy += y * f;
    }
  }
  return {sx * g.dx() * g.dy(), sy * g.dx() * g.dy()};
}

namespace {

// Derivative along one axis of a strided line of n samples with spacing h.
// Central in the interior, (-3u0 + 4u1 - u2)/2h one-sided at the ends.
void diff_line(const double* in, std::size_t stride, int n, double h, double* out, std::size_t out_stride) {
  const double inv2h = 1.0 / (2.0 * h);
  auto u = [&](int k) { return in[static_cast<std::size_t>(k) * stride]; };
  out[0] = (-3.0 * u(0) + 4.0 * u(1) - u(2)) * inv2h;
  for (int k = 1; k < n - 1; ++k) {
    out[static_cast<std::size_t>(k) * out_stride] = (u(k + 1) - u(k - 1)) * inv2h;
  }
  out[static_cast<std::size_t>(n - 1) * out_stride] = (3.0 * u(n - 1) - 4.0 * u(n - 2) + u(n - 3)) * inv2h;
}

void require_fd_size(const Grid2D& g) {
  if (g.nx() < 3 || g.ny() < 3) {
    throw Error(ErrorKind::GridTooSmall, "finite differences need at least 3 cells per axis");
  }
}

void d_dx(const Grid2D& g, const std::vector<double>& in, std::vector<double>& out) {
  const std::size_t nx = static_cast<std::size_t>(g.nx());
  for (int iy = 0; iy < g.ny(); ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * nx;
    diff_line(in.data() + row, 1, g.nx(), g.dx(), out.data() + row, 1);
  }
}

void d_dy(const Grid2D& g, const std::vector<double>& in, std::vector<double>& out) {
  const std::size_t nx = static_cast<std::size_t>(g.nx());
  for (int ix = 0; ix < g.nx(); ++ix) {
    diff_line(in.data() + ix, nx, g.ny(), g.dy(), out.data() + ix, nx);
  }
}

}  // namespace

VectorField gradient_fd(const ScalarField& field) {
  const Grid2D& g = field.grid();
  require_fd_size(g);
  VectorField out(g);
  d_dx(g, field.values(), out.ux());
  d_dy(g, field.values(), out.uy());
  return out;
}

ScalarField divergence_fd(const VectorField& field) {
  const Grid2D& g = field.grid();
  require_fd_size(g);
  std::vector<double> ddx(g.size());
  std::vector<double> ddy(g.size());
  d_dx(g, field.ux(), ddx);
  d_dy(g, field.uy(), ddy);
  for (std::size_t i = 0; i < ddx.size(); ++i) ddx[i] += ddy[i];
  return ScalarField(g, std::move(ddx));
}

}  // namespace driftdecomp
