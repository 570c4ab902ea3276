#ifndef ISOFIELD_TRANSFORM_HPP
#define ISOFIELD_TRANSFORM_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "isofield/coefficients.hpp"
#include "isofield/legendre.hpp"
#include "isofield/quadrature.hpp"

namespace isofield {

/// Real field samples T(theta_i, phi_j) on a quadrature grid, row-major with
/// one row per colatitude.
class FieldGrid {
public:
  FieldGrid(QuadratureGrid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.n_theta() * grid_.n_phi())
      throw std::invalid_argument("FieldGrid: value count does not match grid dimensions");
    for (double v : values_)
      if (!std::isfinite(v))
        throw std::invalid_argument("FieldGrid: non-finite sample");
  }

  const QuadratureGrid &grid() const { return grid_; }
  const std::vector<double> &values() const { return values_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * grid_.n_phi() + j]; }

private:
  QuadratureGrid grid_;
  std::vector<double> values_;
};

namespace detail {

// e^{i m phi_j} for m = 0..lmax, laid out [m][j].
inline std::vector<complex> phase_table(const QuadratureGrid &grid, int lmax) {
  const std::size_t nphi = grid.n_phi();
  std::vector<complex> table(static_cast<std::size_t>(lmax + 1) * nphi);
  for (int m = 0; m <= lmax; ++m)
    for (std::size_t j = 0; j < nphi; ++j) {
      const double arg = m * grid.phis[j];
      table[static_cast<std::size_t>(m) * nphi + j] = complex(std::cos(arg), std::sin(arg));
    }
  return table;
}

} // namespace detail

/// T(x) = sum_{l <= lmax} sum_{m=-l..l} a_lm Y_lm(x) on every grid node.
///
/// Negative orders pair with positive ones as complex conjugates, so the sum is
/// evaluated as a_l0 Y_l0 + 2 Re sum_{m>0} a_lm Y_lm and is real by
/// construction.
inline FieldGrid synthesize(const CoefficientSet &a, const QuadratureGrid &grid) {
  const int lmax = a.lmax();
  if (grid.lmax_exact < lmax)
    throw std::invalid_argument("synthesize: grid resolves lmax " + std::to_string(grid.lmax_exact) +
                                " but coefficients need lmax " + std::to_string(lmax));

  const std::size_t ntheta = grid.n_theta();
  const std::size_t nphi = grid.n_phi();
  const std::vector<complex> phases = detail::phase_table(grid, lmax);
  std::vector<double> values(ntheta * nphi, 0.0);
  std::vector<complex> ring(static_cast<std::size_t>(lmax + 1));

  for (std::size_t i = 0; i < ntheta; ++i) {
    const LegendreTable plm(lmax, grid.cos_thetas[i]);
    for (int m = 0; m <= lmax; ++m) {
      complex s = 0.0;
      for (int l = m; l <= lmax; ++l)
        s += a(l, m) * plm(l, m);
      ring[static_cast<std::size_t>(m)] = s;
    }
    for (std::size_t j = 0; j < nphi; ++j) {
      double t = ring[0].real();
      for (int m = 1; m <= lmax; ++m)
        t += 2.0 * (ring[static_cast<std::size_t>(m)] * phases[static_cast<std::size_t>(m) * nphi + j]).real();
      values[i * nphi + j] = t;
    }
  }
  return FieldGrid(grid, std::move(values));
}

/// a_lm = integral of T conj(Y_lm) over the sphere, by the grid's quadrature.
///
/// Uses the conjugate harmonic so that analyze inverts synthesize; exact for
/// fields band-limited at or below the grid's lmax_exact.
inline CoefficientSet analyze(const FieldGrid &f, int lmax) {
  const QuadratureGrid &grid = f.grid();
  if (lmax < 0)
    throw std::invalid_argument("analyze: negative lmax");
  if (grid.lmax_exact < lmax)
    throw std::invalid_argument("analyze: grid resolves lmax " + std::to_string(grid.lmax_exact) +
                                " but analysis requested lmax " + std::to_string(lmax));

  const std::size_t ntheta = grid.n_theta();
  const std::size_t nphi = grid.n_phi();
  const std::vector<complex> phases = detail::phase_table(grid, lmax);
  const double dphi = grid.phi_weight();

  std::vector<complex> acc(LegendreTable::triangle_size(lmax));
  std::vector<complex> ring(static_cast<std::size_t>(lmax + 1));
  for (std::size_t i = 0; i < ntheta; ++i) {
    // ring_m = sum_j T_ij e^{-i m phi_j}
    for (int m = 0; m <= lmax; ++m) {
      complex s = 0.0;
      for (std::size_t j = 0; j < nphi; ++j)
        s += f(i, j) * std::conj(phases[static_cast<std::size_t>(m) * nphi + j]);
      ring[static_cast<std::size_t>(m)] = s;
    }
    const LegendreTable plm(lmax, grid.cos_thetas[i]);
    const double w = grid.theta_weights[i] * dphi;
    for (int l = 0; l <= lmax; ++l)
      for (int m = 0; m <= l; ++m)
        acc[LegendreTable::offset(l, m)] += w * plm(l, m) * ring[static_cast<std::size_t>(m)];
  }

  CoefficientSet a(lmax);
  for (int l = 0; l <= lmax; ++l) {
    a.set(l, 0, complex(acc[LegendreTable::offset(l, 0)].real(), 0.0));
    for (int m = 1; m <= l; ++m)
      a.set(l, m, acc[LegendreTable::offset(l, m)]);
  }
  return a;
}

/// Quadrature of T^2 over the sphere.
inline double integrate_square(const FieldGrid &f) {
  const QuadratureGrid &grid = f.grid();
  const double dphi = grid.phi_weight();
  double total = 0.0;
  for (std::size_t i = 0; i < grid.n_theta(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < grid.n_phi(); ++j)
      row += f(i, j) * f(i, j);
    total += grid.theta_weights[i] * dphi * row;
  }
  return total;
}

} // namespace isofield

#endif // ISOFIELD_TRANSFORM_HPP
