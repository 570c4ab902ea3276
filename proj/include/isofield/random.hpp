#ifndef ISOFIELD_RANDOM_HPP
#define ISOFIELD_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace isofield {

/// Seedable random source with a fixed, platform-independent algorithm.
///
/// The engine is std::mt19937_64 (its output sequence is pinned by the
/// standard). Variates are derived here rather than through <random>
/// distributions, whose algorithms are implementation-defined:
///   uniform: top 53 bits, shifted by half an ulp, so values lie in (0, 1);
///   normal:  Marsaglia polar method, spare value cached.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Laplace law with the given standard deviation (scale sd/sqrt(2)).
  double laplace(double sd) {
    const double b = sd / std::numbers::sqrt2;
    const double u = uniform() - 0.5;
    const double mag = -b * std::log(1.0 - 2.0 * std::abs(u));
    return u < 0.0 ? -mag : mag;
  }

  /// Uniform law on [-sqrt(3) sd, sqrt(3) sd].
  double uniform_centered(double sd) {
    return std::numbers::sqrt3 * sd * (2.0 * uniform() - 1.0);
  }

  /// +sd or -sd with equal probability.
  double rademacher(double sd) { return (engine_() >> 63) != 0 ? sd : -sd; }

  /// Standard Cauchy variate tan(pi (u - 1/2)).
  double cauchy() { return std::tan(std::numbers::pi * (uniform() - 0.5)); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace isofield

#endif // ISOFIELD_RANDOM_HPP
