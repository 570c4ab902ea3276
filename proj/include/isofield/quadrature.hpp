#ifndef ISOFIELD_QUADRATURE_HPP
#define ISOFIELD_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isofield/legendre.hpp"

namespace isofield {

struct GaussLegendreRule {
  std::vector<double> nodes;   // ascending in [-1, 1]
  std::vector<double> weights; // positive, summing to 2
};

namespace detail {

// P_n(x) and P_n'(x) by the Bonnet recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  if (n == 1)
    return {x, 1.0};
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
///
/// Nodes are computed for one half and mirrored so that the rule is exactly
/// symmetric.
inline GaussLegendreRule gauss_legendre(int n) {
  if (n < 1)
    throw std::invalid_argument("gauss_legendre: need at least one node");

  GaussLegendreRule rule{std::vector<double>(static_cast<std::size_t>(n)),
                         std::vector<double>(static_cast<std::size_t>(n))};
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = 0.0;
    if (2 * i + 1 != n) {
      x = std::cos(pi * (i + 0.75) / (n + 0.5));
      for (int iter = 0; iter < 100; ++iter) {
        const auto [p, dp] = detail::legendre_with_derivative(n, x);
        const double dx = p / dp;
        x -= dx;
        if (std::abs(dx) <= 1e-16)
          break;
      }
    }
    const double dp = detail::legendre_with_derivative(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  return rule;
}

/// Product grid: Gauss-Legendre in cos(theta) times equispaced longitudes.
///
/// Rows are ordered by increasing colatitude. lmax_exact is the largest L for
/// which the product of two harmonics of degree <= L integrates exactly.
struct QuadratureGrid {
  std::vector<double> thetas;
  std::vector<double> cos_thetas;
  std::vector<double> theta_weights;
  std::vector<double> phis;
  int lmax_exact = 0;

  std::size_t n_theta() const { return thetas.size(); }
  std::size_t n_phi() const { return phis.size(); }
  double phi_weight() const { return two_pi / static_cast<double>(phis.size()); }
};

/// Grid with n_theta colatitude rows and n_phi longitudes.
inline QuadratureGrid make_grid_sized(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1)
    throw std::invalid_argument("make_grid_sized: grid dimensions must be positive");

  const GaussLegendreRule rule = gauss_legendre(n_theta);
  QuadratureGrid grid;
  grid.thetas.resize(static_cast<std::size_t>(n_theta));
  grid.cos_thetas.resize(static_cast<std::size_t>(n_theta));
  grid.theta_weights.resize(static_cast<std::size_t>(n_theta));
  // nodes ascend in x = cos(theta), so walk them backwards for ascending theta
  for (int i = 0; i < n_theta; ++i) {
    const auto src = static_cast<std::size_t>(n_theta - 1 - i);
    const auto dst = static_cast<std::size_t>(i);
    grid.cos_thetas[dst] = rule.nodes[src];
    grid.thetas[dst] = std::acos(rule.nodes[src]);
    grid.theta_weights[dst] = rule.weights[src];
  }
  grid.phis.resize(static_cast<std::size_t>(n_phi));
  for (int k = 0; k < n_phi; ++k)
    grid.phis[static_cast<std::size_t>(k)] = two_pi * k / n_phi;
  grid.lmax_exact = std::min(n_theta - 1, (n_phi - 1) / 2);
  return grid;
}

/// Minimal grid integrating band-limit-lmax products exactly:
/// lmax+1 Gauss nodes and 2*lmax+1 longitudes.
inline QuadratureGrid make_grid(int lmax) {
  if (lmax < 0)
    throw std::invalid_argument("make_grid: negative lmax " + std::to_string(lmax));
  return make_grid_sized(lmax + 1, 2 * lmax + 1);
}

} // namespace isofield

#endif // ISOFIELD_QUADRATURE_HPP
