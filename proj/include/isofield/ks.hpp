#ifndef ISOFIELD_KS_HPP
#define ISOFIELD_KS_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isofield/report.hpp"

namespace isofield {

/// P(K > lambda) for the limiting Kolmogorov distribution.
///
/// Two series are used: the alternating one converges fast for large lambda,
/// the theta-function form for small lambda. Each is cut once terms fall
/// below 1e-12.
inline double kolmogorov_sf(double lambda) {
  if (!(lambda > 0.0))
    return 1.0;
  double p = 0.0;
  if (lambda < 1.18) {
    const double q = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * q);
      sum += term;
      if (term < 1e-12)
        break;
    }
    p = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
  } else {
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      sum += (k % 2 == 1) ? term : -term;
      if (term < 1e-12)
        break;
    }
    p = 2.0 * sum;
  }
  return std::clamp(p, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov test of xs against a continuous cdf.
///
/// Statistic D_n = sup |F_n - F|; p-value from the limiting distribution of
/// sqrt(n) D_n.
template <class Cdf>
TestReport ks_one_sample(std::span<const double> xs, Cdf &&cdf, double alpha = 0.01) {
  if (xs.size() < 10)
    throw std::invalid_argument("ks_one_sample: need at least 10 samples, got " + std::to_string(xs.size()));
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double below = f - static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n - f;
    d = std::max({d, below, above});
  }

  TestReport r;
  r.test = "ks1";
  r.statistic = d;
  r.n = sorted.size();
  r.p_value = kolmogorov_sf(std::sqrt(n) * d);
  r.alpha = alpha;
  r.verdict = verdict_for(r.p_value, alpha);
  return r;
}

/// Two-sample Kolmogorov-Smirnov test with effective size n m / (n + m).
inline TestReport ks_two_sample(std::span<const double> xs, std::span<const double> ys, double alpha = 0.01) {
  if (xs.size() < 10 || ys.size() < 10)
    throw std::invalid_argument("ks_two_sample: need at least 10 samples in each group");
  std::vector<double> a(xs.begin(), xs.end());
  std::vector<double> b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());

  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v)
      ++i;
    while (j < b.size() && b[j] == v)
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }

  TestReport r;
  r.test = "ks2";
  r.statistic = d;
  r.n = a.size() + b.size();
  r.p_value = kolmogorov_sf(std::sqrt(na * nb / (na + nb)) * d);
  r.alpha = alpha;
  r.verdict = verdict_for(r.p_value, alpha);
  return r;
}

} // namespace isofield

#endif // ISOFIELD_KS_HPP
