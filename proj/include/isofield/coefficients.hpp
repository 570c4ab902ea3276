#ifndef ISOFIELD_COEFFICIENTS_HPP
#define ISOFIELD_COEFFICIENTS_HPP

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isofield {

using complex = std::complex<double>;

/// Angular power spectrum C_0..C_L; every entry finite and nonnegative.
class PowerSpectrum {
public:
  explicit PowerSpectrum(std::vector<double> c) : c_(std::move(c)) {
    if (c_.empty())
      throw std::invalid_argument("PowerSpectrum: empty spectrum");
    for (std::size_t l = 0; l < c_.size(); ++l)
      if (!std::isfinite(c_[l]) || c_[l] < 0.0)
        throw std::invalid_argument("PowerSpectrum: C_" + std::to_string(l) + " is negative or not finite");
  }

  /// C_l = value for every l <= lmax.
  static PowerSpectrum flat(int lmax, double value) {
    if (lmax < 0)
      throw std::invalid_argument("PowerSpectrum: negative lmax");
    return PowerSpectrum(std::vector<double>(static_cast<std::size_t>(lmax + 1), value));
  }

  int lmax() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int l) const { return c_.at(static_cast<std::size_t>(l)); }
  const std::vector<double> &values() const { return c_; }

  friend bool operator==(const PowerSpectrum &, const PowerSpectrum &) = default;

private:
  std::vector<double> c_;
};

/// Band-limited coefficients of a real field.
///
/// Only m >= 0 is stored; a_{l,-m} = (-1)^m conj(a_lm) is reconstructed on
/// read, and a_l0 is kept exactly real.
class CoefficientSet {
public:
  explicit CoefficientSet(int lmax) : lmax_(checked_lmax(lmax)), values_(triangle(lmax)) {}

  int lmax() const { return lmax_; }

  /// a_lm for any |m| <= l.
  complex operator()(int l, int m) const {
    check(l, m);
    if (m >= 0)
      return values_[offset(l, m)];
    const complex v = std::conj(values_[offset(l, -m)]);
    return (m % 2 == 0) ? v : -v;
  }

  /// Store a_lm. A negative order stores its conjugate partner instead; m = 0
  /// requires an exactly real value.
  void set(int l, int m, complex value) {
    check(l, m);
    if (m < 0) {
      value = std::conj(value);
      if (m % 2 != 0)
        value = -value;
      m = -m;
    }
    if (m == 0 && value.imag() != 0.0)
      throw std::invalid_argument("CoefficientSet: a_" + std::to_string(l) + "0 must be real");
    values_[offset(l, m)] = value;
  }

  /// Degree-l block ordered m = -l..l.
  std::vector<complex> block(int l) const {
    check(l, 0);
    std::vector<complex> out(static_cast<std::size_t>(2 * l + 1));
    for (int m = -l; m <= l; ++m)
      out[static_cast<std::size_t>(m + l)] = (*this)(l, m);
    return out;
  }

  /// Store a full block ordered m = -l..l. Only the m >= 0 half is kept; the
  /// imaginary part of the m = 0 entry is dropped after checking it is rounding
  /// residue.
  void set_block(int l, std::span<const complex> block) {
    check(l, 0);
    if (block.size() != static_cast<std::size_t>(2 * l + 1))
      throw std::invalid_argument("CoefficientSet: block length does not match degree");
    double norm = 0.0;
    for (const complex &z : block)
      norm += std::norm(z);
    const complex a0 = block[static_cast<std::size_t>(l)];
    if (std::abs(a0.imag()) > 1e-10 * (1.0 + std::sqrt(norm)))
      throw std::invalid_argument("CoefficientSet: block is not conjugate-symmetric at m = 0");
    values_[offset(l, 0)] = complex(a0.real(), 0.0);
    for (int m = 1; m <= l; ++m)
      values_[offset(l, m)] = block[static_cast<std::size_t>(m + l)];
  }

  /// Raw storage, (l, m) at l(l+1)/2 + m.
  std::span<const complex> stored() const { return values_; }

  /// sum over all (l, m), negative m included, of |a_lm|^2.
  double total_power() const {
    double s = 0.0;
    for (int l = 0; l <= lmax_; ++l) {
      s += std::norm(values_[offset(l, 0)]);
      for (int m = 1; m <= l; ++m)
        s += 2.0 * std::norm(values_[offset(l, m)]);
    }
    return s;
  }

  static std::size_t offset(int l, int m) {
    return static_cast<std::size_t>(l) * static_cast<std::size_t>(l + 1) / 2 + static_cast<std::size_t>(m);
  }

  friend bool operator==(const CoefficientSet &, const CoefficientSet &) = default;

private:
  static int checked_lmax(int lmax) {
    if (lmax < 0)
      throw std::invalid_argument("CoefficientSet: negative lmax");
    return lmax;
  }
  static std::size_t triangle(int lmax) {
    return static_cast<std::size_t>(lmax + 1) * static_cast<std::size_t>(lmax + 2) / 2;
  }
  void check(int l, int m) const {
    if (l < 0 || l > lmax_)
      throw std::out_of_range("CoefficientSet: degree " + std::to_string(l) + " outside 0.." +
                              std::to_string(lmax_));
    if (m < -l || m > l)
      throw std::out_of_range("CoefficientSet: order " + std::to_string(m) + " outside -l..l");
  }

  int lmax_;
  std::vector<complex> values_;
};

} // namespace isofield

#endif // ISOFIELD_COEFFICIENTS_HPP
