#ifndef ISOFIELD_SAMPLING_HPP
#define ISOFIELD_SAMPLING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "isofield/coefficients.hpp"
#include "isofield/ensemble.hpp"
#include "isofield/parallel.hpp"
#include "isofield/random.hpp"

namespace isofield {

enum class Sampler { gaussian, laplace, uniform, rademacher };

inline std::string_view to_string(Sampler s) {
  switch (s) {
  case Sampler::gaussian:
    return "gaussian";
  case Sampler::laplace:
    return "laplace";
  case Sampler::uniform:
    return "uniform";
  case Sampler::rademacher:
    return "rademacher";
  }
  return "unknown";
}

inline Sampler parse_sampler(std::string_view label) {
  for (Sampler s : {Sampler::gaussian, Sampler::laplace, Sampler::uniform, Sampler::rademacher})
    if (label == to_string(s))
      return s;
  throw std::invalid_argument("unknown distribution label '" + std::string(label) + "'");
}

namespace detail {

inline double draw(Rng &rng, Sampler law, double sd) {
  switch (law) {
  case Sampler::gaussian:
    return sd * rng.normal();
  case Sampler::laplace:
    return rng.laplace(sd);
  case Sampler::uniform:
    return rng.uniform_centered(sd);
  case Sampler::rademacher:
    return rng.rademacher(sd);
  }
  return 0.0;
}

// Draw order: for l = 0..L, a_l0 then (Re, Im) of a_lm for m = 1..l.
inline CoefficientSet sample_with(const PowerSpectrum &spec, Sampler law, std::uint64_t seed) {
  Rng rng(seed);
  CoefficientSet a(spec.lmax());
  for (int l = 0; l <= spec.lmax(); ++l) {
    const double c = spec[l];
    a.set(l, 0, complex(draw(rng, law, std::sqrt(c)), 0.0));
    const double half = std::sqrt(c / 2.0);
    for (int m = 1; m <= l; ++m) {
      const double re = draw(rng, law, half);
      const double im = draw(rng, law, half);
      a.set(l, m, complex(re, im));
    }
  }
  return a;
}

} // namespace detail

/// Isotropic Gaussian coefficients: a_l0 ~ N(0, C_l), and for m >= 1 the real
/// and imaginary parts are independent N(0, C_l / 2).
inline CoefficientSet sample_gaussian_coeffs(const PowerSpectrum &spec, std::uint64_t seed) {
  return detail::sample_with(spec, Sampler::gaussian, seed);
}

/// Independent coefficients with the Gaussian sampler's first two moments but
/// a laplace, uniform or rademacher shape. Such a field is not isotropic.
inline CoefficientSet sample_independent_nongaussian(const PowerSpectrum &spec, Sampler law,
                                                     std::uint64_t seed) {
  if (law == Sampler::gaussian)
    throw std::invalid_argument("sample_independent_nongaussian: gaussian is not a non-Gaussian law");
  return detail::sample_with(spec, law, seed);
}

inline CoefficientSet sample_independent_nongaussian(const PowerSpectrum &spec, std::string_view law,
                                                     std::uint64_t seed) {
  return sample_independent_nongaussian(spec, parse_sampler(law), seed);
}

inline CoefficientSet sample_coeffs(const PowerSpectrum &spec, Sampler law, std::uint64_t seed) {
  return detail::sample_with(spec, law, seed);
}

/// Replicate i is drawn with seed seed_base + i; jobs threads share the work.
inline Ensemble sample_ensemble(const PowerSpectrum &spec, Sampler law, std::size_t n,
                                std::uint64_t seed_base, int jobs = 1) {
  std::vector<CoefficientSet> sets(n, CoefficientSet(spec.lmax()));
  parallel_for(n, jobs, [&](std::size_t i) { sets[i] = sample_coeffs(spec, law, seed_base + i); });
  return Ensemble(std::move(sets), std::string(to_string(law)), seed_base);
}

/// Three distinct degrees; the block at l3 is a Gaussian block scaled by one
/// shared Cauchy multiplier, so it has infinite variance while l1 and l2 stay
/// ordinary Gaussian blocks.
struct HeavyTailFieldSpec {
  int l1 = 2;
  int l2 = 3;
  int l3 = 4;
  std::array<double, 3> base_c{1.0, 1.0, 1.0};
  double eta_scale = 1.0;

  void validate() const {
    if (l1 < 0 || l2 < 0 || l3 < 0)
      throw std::invalid_argument("HeavyTailFieldSpec: negative degree");
    if (l1 == l2 || l1 == l3 || l2 == l3)
      throw std::invalid_argument("HeavyTailFieldSpec: degrees must be pairwise distinct");
    for (double c : base_c)
      if (!(c > 0.0) || !std::isfinite(c))
        throw std::invalid_argument("HeavyTailFieldSpec: base spectrum values must be positive");
    if (!(eta_scale >= 0.0) || !std::isfinite(eta_scale))
      throw std::invalid_argument("HeavyTailFieldSpec: eta_scale must be finite and nonnegative");
  }

  int lmax() const { return std::max({l1, l2, l3}); }
};

/// One realization: eta is drawn first, then the Gaussian blocks at l1, l2, l3
/// in that order; the l3 block is multiplied by eta. Other degrees are zero.
inline CoefficientSet build_heavy_tail_realization(const HeavyTailFieldSpec &spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const double eta = spec.eta_scale * rng.cauchy();

  CoefficientSet a(spec.lmax());
  const std::array<int, 3> degrees{spec.l1, spec.l2, spec.l3};
  for (std::size_t k = 0; k < 3; ++k) {
    const int l = degrees[k];
    const double c = spec.base_c[k];
    const double scale = (k == 2) ? eta : 1.0;
    a.set(l, 0, complex(scale * std::sqrt(c) * rng.normal(), 0.0));
    const double half = std::sqrt(c / 2.0);
    for (int m = 1; m <= l; ++m) {
      const double re = half * rng.normal();
      const double im = half * rng.normal();
      a.set(l, m, complex(scale * re, scale * im));
    }
  }
  return a;
}

inline Ensemble heavy_tail_ensemble(const HeavyTailFieldSpec &spec, std::size_t n, std::uint64_t seed_base,
                                    int jobs = 1) {
  spec.validate();
  std::vector<CoefficientSet> sets(n, CoefficientSet(spec.lmax()));
  parallel_for(n, jobs,
               [&](std::size_t i) { sets[i] = build_heavy_tail_realization(spec, seed_base + i); });
  return Ensemble(std::move(sets), "heavy-tail", seed_base);
}

} // namespace isofield

#endif // ISOFIELD_SAMPLING_HPP
