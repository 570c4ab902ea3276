#ifndef ISOFIELD_WIGNER_HPP
#define ISOFIELD_WIGNER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isofield/coefficients.hpp"
#include "isofield/legendre.hpp"

namespace isofield {

/// z-y-z Euler angles. alpha and gamma are reduced into [0, 2*pi); beta must lie
/// in [0, pi].
class EulerAngles {
public:
  EulerAngles(double alpha, double beta, double gamma)
      : alpha_(wrap(alpha)), beta_(beta), gamma_(wrap(gamma)) {
    if (!std::isfinite(beta) || beta < 0.0 || beta > pi)
      throw std::domain_error("EulerAngles: beta outside [0, pi]");
  }

  static EulerAngles identity() { return {0.0, 0.0, 0.0}; }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }

private:
  static double wrap(double a) {
    if (!std::isfinite(a))
      throw std::domain_error("EulerAngles: non-finite angle");
    double r = std::fmod(a, two_pi);
    if (r < 0.0)
      r += two_pi;
    if (r >= two_pi)
      r = 0.0;
    return r;
  }

  double alpha_;
  double beta_;
  double gamma_;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

inline Matrix3 operator*(const Matrix3 &a, const Matrix3 &b) {
  Matrix3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline std::array<double, 3> operator*(const Matrix3 &a, const std::array<double, 3> &v) {
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      out[i] += a[i][k] * v[k];
  return out;
}

namespace detail {

inline Matrix3 rot_z(double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  return {{{c, -s, 0.0}, {s, c, 0.0}, {0.0, 0.0, 1.0}}};
}

inline Matrix3 rot_y(double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  return {{{c, 0.0, s}, {0.0, 1.0, 0.0}, {-s, 0.0, c}}};
}

} // namespace detail

/// The 3x3 matrix by which g acts on points of the sphere.
///
/// With D_{mm'}(g) = e^{-im alpha} d_{mm'}(beta) e^{-im' gamma} the relation
/// Y_l.(g x) = D^l(g) Y_l.(x) holds for g = Rz(-alpha) Ry(-beta) Rz(-gamma).
inline Matrix3 rotation_matrix(const EulerAngles &g) {
  return detail::rot_z(-g.alpha()) * detail::rot_y(-g.beta()) * detail::rot_z(-g.gamma());
}

/// Inverse of rotation_matrix. At the gimbal degeneracy beta in {0, pi} the
/// convention gamma = 0 is used.
inline EulerAngles euler_from_matrix(const Matrix3 &r) {
  // r^T = Rz(gamma) Ry(beta) Rz(alpha); read the angles off its third row/column
  const double sx = r[2][0]; // sin(beta) cos(gamma)
  const double sy = r[2][1]; // sin(beta) sin(gamma)
  const double cz = r[2][2];
  const double sin_beta = std::hypot(sx, sy);
  if (sin_beta < 1e-14) {
    if (cz > 0.0) {
      // r = Rz(-alpha)
      return {std::atan2(r[0][1], r[0][0]), 0.0, 0.0};
    }
    // r = Rz(-alpha) Ry(-pi) = Rz(-alpha) diag(-1, 1, -1)
    return {std::atan2(r[0][1], r[1][1]), pi, 0.0};
  }
  const double beta = std::atan2(sin_beta, cz);
  const double gamma = std::atan2(sy, sx);
  const double alpha = std::atan2(r[1][2], -r[0][2]);
  return {alpha, beta, gamma};
}

/// Composition through 3x3 matrices: (g1 o g2)(x) = g1(g2(x)).
inline EulerAngles compose(const EulerAngles &g1, const EulerAngles &g2) {
  return euler_from_matrix(rotation_matrix(g1) * rotation_matrix(g2));
}

namespace detail {

// Jacobi polynomial P_n^{(a,b)}(x) by the standard three-term recurrence.
inline double jacobi_p(int n, int a, int b, double x) {
  if (n == 0)
    return 1.0;
  double p0 = 1.0;
  double p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
  for (int k = 2; k <= n; ++k) {
    const double s = 2.0 * k + a + b;
    const double c1 = 2.0 * k * (k + a + b) * (s - 2.0);
    const double c2 = (s - 1.0) * (s * (s - 2.0) * x + static_cast<double>(a) * a - static_cast<double>(b) * b);
    const double c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
    const double p2 = (c2 * p1 - c3 * p0) / c1;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Matrix element <l, row| exp(-i beta J_y) |l, col> in the usual physics
// convention, via the Jacobi-polynomial representation.
inline double small_d_physics(int l, int row, int col, double beta) {
  const int k = std::min({l + col, l - col, l + row, l - row});
  int a = 0;
  int lambda = 0;
  if (k == l + col) {
    a = row - col;
    lambda = row - col;
  } else if (k == l - col) {
    a = col - row;
  } else if (k == l + row) {
    a = col - row;
  } else {
    a = row - col;
    lambda = row - col;
  }
  const int b = 2 * l - 2 * k - a;

  const double s = std::sin(beta / 2.0);
  const double c = std::cos(beta / 2.0);
  if ((a > 0 && s == 0.0) || (b > 0 && c == 0.0))
    return 0.0;

  double log_scale = 0.5 * (log_binomial(2 * l - k, k + a) - log_binomial(k + b, b));
  if (a > 0)
    log_scale += a * std::log(std::abs(s));
  if (b > 0)
    log_scale += b * std::log(std::abs(c));
  const double sign = (lambda % 2 == 0) ? 1.0 : -1.0;
  return sign * std::exp(log_scale) * jacobi_p(k, a, b, std::cos(beta));
}

inline void check_order(int l, int m, const char *what) {
  if (l < 0 || m < -l || m > l)
    throw std::domain_error(std::string(what) + ": order " + std::to_string(m) +
                            " out of range for degree " + std::to_string(l));
}

} // namespace detail

/// Small-d element d^l_{m m'}(beta) of the matrices used by wigner_D.
///
/// d^l(0) is exactly the identity. Entries are the transpose of the physics
/// convention <l m|exp(-i beta J_y)|l m'>, which is what makes
/// Y_l.(g x) = D^l(g) Y_l.(x) hold with the coefficients' sign conventions.
inline double wigner_small_d(int l, int m, int mp, double beta) {
  detail::check_order(l, m, "wigner_small_d");
  detail::check_order(l, mp, "wigner_small_d");
  if (!(beta >= 0.0 && beta <= pi))
    throw std::domain_error("wigner_small_d: beta outside [0, pi]");
  if (beta == 0.0)
    return m == mp ? 1.0 : 0.0;
  return detail::small_d_physics(l, mp, m, beta);
}

/// Dense (2l+1)x(2l+1) complex matrix indexed by orders in -l..l.
class WignerDMatrix {
public:
  explicit WignerDMatrix(int l) : l_(checked_degree(l)), entries_(square(l)) {}

  int degree() const { return l_; }
  int dim() const { return 2 * l_ + 1; }

  complex &operator()(int m, int mp) { return entries_[index(m, mp)]; }
  const complex &operator()(int m, int mp) const { return entries_[index(m, mp)]; }

  friend WignerDMatrix operator*(const WignerDMatrix &a, const WignerDMatrix &b) {
    if (a.l_ != b.l_)
      throw std::invalid_argument("WignerDMatrix: degree mismatch in product");
    WignerDMatrix c(a.l_);
    const int l = a.l_;
    for (int i = -l; i <= l; ++i)
      for (int k = -l; k <= l; ++k) {
        const complex aik = a(i, k);
        for (int j = -l; j <= l; ++j)
          c(i, j) += aik * b(k, j);
      }
    return c;
  }

  /// max |D D* - I| over all entries.
  double unitarity_deviation() const {
    const int l = l_;
    double worst = 0.0;
    for (int i = -l; i <= l; ++i)
      for (int j = -l; j <= l; ++j) {
        complex s = 0.0;
        for (int k = -l; k <= l; ++k)
          s += (*this)(i, k) * std::conj((*this)(j, k));
        if (i == j)
          s -= 1.0;
        worst = std::max(worst, std::abs(s));
      }
    return worst;
  }

  double max_abs_difference(const WignerDMatrix &other) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      worst = std::max(worst, std::abs(entries_[i] - other.entries_[i]));
    return worst;
  }

private:
  static int checked_degree(int l) {
    if (l < 0)
      throw std::domain_error("WignerDMatrix: negative degree");
    return l;
  }
  static std::size_t square(int l) {
    const auto n = static_cast<std::size_t>(2 * l + 1);
    return n * n;
  }

  std::size_t index(int m, int mp) const {
    return static_cast<std::size_t>(m + l_) * static_cast<std::size_t>(2 * l_ + 1) +
           static_cast<std::size_t>(mp + l_);
  }

  int l_;
  std::vector<complex> entries_;
};

/// D^l_{mm'}(g) = e^{-i m alpha} d^l_{mm'}(beta) e^{-i m' gamma}.
inline WignerDMatrix wigner_D(int l, const EulerAngles &g) {
  WignerDMatrix d(l);
  for (int m = -l; m <= l; ++m)
    for (int mp = -l; mp <= l; ++mp) {
      const double small = wigner_small_d(l, m, mp, g.beta());
      d(m, mp) = std::polar(1.0, -(m * g.alpha() + mp * g.gamma())) * small;
    }
  return d;
}

/// b_m = sum_{m'} a_{m'} D_{m'm}: the block is treated as a row vector
/// multiplied on the right by D. Input and output are ordered m = -l..l.
inline std::vector<complex> rotate_block(std::span<const complex> block, const WignerDMatrix &d) {
  const int l = d.degree();
  if (block.size() != static_cast<std::size_t>(d.dim()))
    throw std::invalid_argument("rotate_block: block length does not match degree");
  std::vector<complex> out(block.size());
  for (int m = -l; m <= l; ++m) {
    complex s = 0.0;
    for (int mp = -l; mp <= l; ++mp)
      s += block[static_cast<std::size_t>(mp + l)] * d(mp, m);
    out[static_cast<std::size_t>(m + l)] = s;
  }
  return out;
}

/// Rotated degree-l block of a, ordered m = -l..l.
inline std::vector<complex> rotate_coeffs(const CoefficientSet &a, int l, const EulerAngles &g) {
  if (l < 0 || l > a.lmax())
    throw std::invalid_argument("rotate_coeffs: degree " + std::to_string(l) +
                                " absent from coefficient set with lmax " + std::to_string(a.lmax()));
  return rotate_block(a.block(l), wigner_D(l, g));
}

/// Every degree of a rotated by g.
inline CoefficientSet rotate(const CoefficientSet &a, const EulerAngles &g) {
  CoefficientSet out(a.lmax());
  for (int l = 0; l <= a.lmax(); ++l)
    out.set_block(l, rotate_coeffs(a, l, g));
  return out;
}

/// max |D(g1) D(g2) - D(g1 o g2)| with the composition done on 3x3 matrices.
inline double compose_check(int l, const EulerAngles &g1, const EulerAngles &g2) {
  const WignerDMatrix product = wigner_D(l, g1) * wigner_D(l, g2);
  return product.max_abs_difference(wigner_D(l, compose(g1, g2)));
}

} // namespace isofield

#endif // ISOFIELD_WIGNER_HPP
