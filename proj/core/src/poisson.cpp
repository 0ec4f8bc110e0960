#include "driftdecomp/poisson.hpp"

#include <cmath>
#include <numeric>

#include "binary_io.hpp"
#include "driftdecomp/error.hpp"

namespace driftdecomp {

ScalarField neumann_laplacian(const ScalarField& psi) {
  const Grid2D& g = psi.grid();
  const double cx = 1.0 / (g.dx() * g.dx());
  const double cy = 1.0 / (g.dy() * g.dy());
  ScalarField out(g);
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      const double c = psi.at(ix, iy);
      double acc = 0.0;
      if (ix > 0) acc += cx * (c - psi.at(ix - 1, iy));
      if (ix + 1 < g.nx()) acc += cx * (c - psi.at(ix + 1, iy));
      if (iy > 0) acc += cy * (c - psi.at(ix, iy - 1));
      if (iy + 1 < g.ny()) acc += cy * (c - psi.at(ix, iy + 1));
      out[g.index(ix, iy)] = acc;
    }
  }
  return out;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void remove_mean(std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

// Value at the boundary face from the two nearest nodes.
double extrapolate(double inner, double next) { return 1.5 * inner - 0.5 * next; }

}  // namespace

PoissonResult poisson_solve(const ScalarField& rhs, const VectorField& b, const PoissonOptions& options) {
  const Grid2D& g = rhs.grid();
  if (!(b.grid() == g)) throw Error(ErrorKind::DimensionMismatch, "rhs and drift live on different grids");
  if (g.nx() < 2 || g.ny() < 2) throw Error(ErrorKind::GridTooSmall, "Poisson solve needs 2 cells per axis");
  if (!rhs.all_finite() || !b.all_finite()) throw Error(ErrorKind::NonFiniteState, "Poisson input is not finite");

  // r = rhs - (1/h) sum over boundary faces of (b . n)
  std::vector<double> r = rhs.values();
  const int nx = g.nx();
  const int ny = g.ny();
  for (int iy = 0; iy < ny; ++iy) {
    const std::size_t w = g.index(0, iy);
    const std::size_t e = g.index(nx - 1, iy);
    r[w] += extrapolate(b.ux()[w], b.ux()[g.index(1, iy)]) / g.dx();
    r[e] -= extrapolate(b.ux()[e], b.ux()[g.index(nx - 2, iy)]) / g.dx();
  }
  for (int ix = 0; ix < nx; ++ix) {
    const std::size_t s = g.index(ix, 0);
    const std::size_t n = g.index(ix, ny - 1);
    r[s] += extrapolate(b.uy()[s], b.uy()[g.index(ix, 1)]) / g.dy();
    r[n] -= extrapolate(b.uy()[n], b.uy()[g.index(ix, ny - 2)]) / g.dy();
  }

  const double count = static_cast<double>(r.size());
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / count;
  const double rms = std::sqrt(dot(r, r) / count);
  PoissonResult result{ScalarField(g), 0.0, 0.0, 0.0, 0};
  result.compatibility_correction = rms > 0.0 ? std::abs(mean) / rms : 0.0;
  if (result.compatibility_correction > options.max_compatibility_correction) {
    throw Error(ErrorKind::IncompatibleRhs,
                "Neumann compatibility correction " + detail::exact(result.compatibility_correction) + " too large");
  }
  remove_mean(r);
  result.system_rhs_norm = std::sqrt(dot(r, r));
  if (result.system_rhs_norm == 0.0) return result;

  // Conjugate gradients from psi = 0; iterates stay in the zero-mean range of A.
  const int max_iter = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * r.size());
  const double target = options.relative_tolerance * result.system_rhs_norm;
  std::vector<double>& x = result.psi.values();
  std::vector<double> res = r;
  ScalarField dir(g, res);
  double rr = dot(res, res);
  int it = 0;
  for (; it < max_iter && std::sqrt(rr) > target; ++it) {
    const ScalarField ad = neumann_laplacian(dir);
    const double curvature = dot(dir.values(), ad.values());
    if (!(curvature > 0.0)) break;
    const double alpha = rr / curvature;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += alpha * dir[i];
      res[i] -= alpha * ad[i];
    }
    const double rr_next = dot(res, res);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < x.size(); ++i) dir[i] = res[i] + beta * dir[i];
  }
  remove_mean(x);
  result.iterations = it;

  const ScalarField ax = neumann_laplacian(result.psi);
  double rn = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) rn += (ax[i] - r[i]) * (ax[i] - r[i]);
  result.residual_norm = std::sqrt(rn);
  if (!std::isfinite(result.residual_norm) || result.residual_norm > 100.0 * target) {
    throw Error(ErrorKind::SolverDiverged, "CG stopped after " + std::to_string(it) + " iterations with residual " +
                                               detail::exact(result.residual_norm));
  }
  return result;
}

OracleDecomposition decompose_with_oracle(const VectorField& b, const PoissonOptions& options) {
  PoissonResult solve = poisson_solve(divergence_fd(b), b, options);
  VectorField rotation = gradient_fd(solve.psi);
  for (std::size_t i = 0; i < rotation.size(); ++i) {
    rotation.ux()[i] += b.ux()[i];
    rotation.uy()[i] += b.uy()[i];
  }
  ScalarField psi = solve.psi;
  return {std::move(psi), std::move(rotation), std::move(solve)};
}

}  // namespace driftdecomp
