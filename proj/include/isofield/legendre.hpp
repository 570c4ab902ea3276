#ifndef ISOFIELD_LEGENDRE_HPP
#define ISOFIELD_LEGENDRE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace isofield {

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// A point on the unit sphere in colatitude/longitude coordinates.
///
/// theta is the colatitude in [0, pi]; phi is reduced modulo 2*pi into [0, 2*pi).
class SphericalPoint {
public:
  SphericalPoint(double theta, double phi) : theta_(theta), phi_(phi) {
    if (!std::isfinite(theta) || theta < 0.0 || theta > pi)
      throw std::domain_error("SphericalPoint: colatitude outside [0, pi]");
    if (!std::isfinite(phi))
      throw std::domain_error("SphericalPoint: non-finite longitude");
    phi_ = std::fmod(phi, two_pi);
    if (phi_ < 0.0)
      phi_ += two_pi;
    if (phi_ >= two_pi)
      phi_ = 0.0;
  }

  double theta() const { return theta_; }
  double phi() const { return phi_; }

  std::array<double, 3> unit_vector() const {
    const double s = std::sin(theta_);
    return {s * std::cos(phi_), s * std::sin(phi_), std::cos(theta_)};
  }

  static SphericalPoint from_unit_vector(const std::array<double, 3> &v) {
    const double rho = std::hypot(v[0], v[1]);
    return SphericalPoint(std::atan2(rho, v[2]), std::atan2(v[1], v[0]));
  }

private:
  double theta_;
  double phi_;
};

/// Degree/order pair addressing one spherical-harmonic coefficient.
struct HarmonicIndex {
  int l;
  int m;

  HarmonicIndex(int degree, int order) : l(degree), m(order) {
    if (degree < 0)
      throw std::domain_error("HarmonicIndex: negative degree " + std::to_string(degree));
    if (order < -degree || order > degree)
      throw std::domain_error("HarmonicIndex: |m| > l for (" + std::to_string(degree) + ", " +
                              std::to_string(order) + ")");
  }

  friend bool operator==(const HarmonicIndex &, const HarmonicIndex &) = default;
};

namespace detail {

// sqrt(1/(4 pi)) * sqrt((2m+1)!!/(2m)!!) * (-sin)^m, built as a running product so
// nothing overflows; the Condon-Shortley sign enters through the -sin factor.
inline double legendre_diagonal(int m, double sin_theta) {
  double p = 1.0 / std::sqrt(4.0 * pi);
  for (int k = 1; k <= m; ++k)
    p *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * sin_theta;
  return p;
}

inline double recurrence_a(int l, int m) {
  return std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
}

inline double recurrence_b(int l, int m) {
  const double lm1 = l - 1.0;
  return std::sqrt((lm1 * lm1 - static_cast<double>(m) * m) / (4.0 * lm1 * lm1 - 1.0));
}

} // namespace detail

/// Orthonormalized associated Legendre function N_lm P_lm(x) for m >= 0.
///
/// P_lm carries the Condon-Shortley phase (-1)^m. Evaluated with the three-term
/// recurrence in l started from the closed-form diagonal, so no factorials appear
/// and the result stays finite for large degrees.
inline double assoc_legendre_normalized(const HarmonicIndex &idx, double x) {
  if (!(std::abs(x) <= 1.0))
    throw std::domain_error("assoc_legendre_normalized: |x| > 1");
  if (idx.m < 0)
    throw std::domain_error("assoc_legendre_normalized: negative order");

  const int l = idx.l;
  const int m = idx.m;
  const double sin_theta = std::sqrt((1.0 - x) * (1.0 + x));

  double p_mm = detail::legendre_diagonal(m, sin_theta);
  if (l == m)
    return p_mm;

  double p_prev = p_mm;
  double p_curr = x * std::sqrt(2.0 * m + 3.0) * p_mm;
  for (int k = m + 2; k <= l; ++k) {
    const double p_next =
        detail::recurrence_a(k, m) * (x * p_curr - detail::recurrence_b(k, m) * p_prev);
    p_prev = p_curr;
    p_curr = p_next;
  }
  return p_curr;
}

/// All normalized associated Legendre values for 0 <= m <= l <= lmax at one x.
///
/// Stored triangularly: entry (l, m) lives at l*(l+1)/2 + m.
class LegendreTable {
public:
  LegendreTable(int lmax, double x) : lmax_(lmax), values_(triangle_size(lmax)) {
    if (lmax < 0)
      throw std::domain_error("LegendreTable: negative lmax");
    if (!(std::abs(x) <= 1.0))
      throw std::domain_error("LegendreTable: |x| > 1");

    const double sin_theta = std::sqrt((1.0 - x) * (1.0 + x));
    double p_mm = 1.0 / std::sqrt(4.0 * pi);
    for (int m = 0; m <= lmax; ++m) {
      if (m > 0)
        p_mm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin_theta;
      values_[offset(m, m)] = p_mm;
      if (m == lmax)
        break;
      double p_prev = p_mm;
      double p_curr = x * std::sqrt(2.0 * m + 3.0) * p_mm;
      values_[offset(m + 1, m)] = p_curr;
      for (int l = m + 2; l <= lmax; ++l) {
        const double p_next =
            detail::recurrence_a(l, m) * (x * p_curr - detail::recurrence_b(l, m) * p_prev);
        values_[offset(l, m)] = p_next;
        p_prev = p_curr;
        p_curr = p_next;
      }
    }
  }

  int lmax() const { return lmax_; }
  double operator()(int l, int m) const { return values_[offset(l, m)]; }

  static std::size_t triangle_size(int lmax) {
    return lmax < 0 ? 0 : static_cast<std::size_t>(lmax + 1) * static_cast<std::size_t>(lmax + 2) / 2;
  }
  static std::size_t offset(int l, int m) {
    return static_cast<std::size_t>(l) * static_cast<std::size_t>(l + 1) / 2 + static_cast<std::size_t>(m);
  }

private:
  int lmax_;
  std::vector<double> values_;
};

/// Complex spherical harmonic Y_lm(theta, phi).
///
/// Negative orders come from Y_{l,-m} = (-1)^m conj(Y_lm); m = 0 has an exactly
/// zero imaginary part.
inline complex sph_harm(const HarmonicIndex &idx, const SphericalPoint &p) {
  const int am = std::abs(idx.m);
  const double plm = assoc_legendre_normalized(HarmonicIndex(idx.l, am), std::cos(p.theta()));
  if (am == 0)
    return {plm, 0.0};
  const double arg = am * p.phi();
  const complex y(plm * std::cos(arg), plm * std::sin(arg));
  if (idx.m > 0)
    return y;
  return (am % 2 == 0) ? std::conj(y) : -std::conj(y);
}

/// The vector Y_l.(p) of all 2l+1 harmonics of degree l, ordered m = -l..l.
///
/// Entry m sits at offset m + l. This is the reverse of the descending layout
/// often used in the literature; every matrix in the library uses the same
/// ascending order.
inline std::vector<complex> sph_harm_vector(int l, const SphericalPoint &p) {
  if (l < 0)
    throw std::domain_error("sph_harm_vector: negative degree");
  std::vector<complex> out(static_cast<std::size_t>(2 * l + 1));
  for (int m = 0; m <= l; ++m) {
    const complex y = sph_harm(HarmonicIndex(l, m), p);
    out[static_cast<std::size_t>(l + m)] = y;
    if (m > 0)
      out[static_cast<std::size_t>(l - m)] = (m % 2 == 0) ? std::conj(y) : -std::conj(y);
  }
  return out;
}

} // namespace isofield

#endif // ISOFIELD_LEGENDRE_HPP
