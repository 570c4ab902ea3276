#ifndef ISOFIELD_DIAGNOSTICS_HPP
#define ISOFIELD_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "isofield/ensemble.hpp"
#include "isofield/ks.hpp"
#include "isofield/legendre.hpp"
#include "isofield/report.hpp"
#include "isofield/wigner.hpp"

namespace isofield {

/// Polar form of one coefficient: modulus r >= 0 and phase in [-pi, pi).
struct PolarSample {
  double r;
  double theta;
};

inline PolarSample to_polar(complex z) {
  double t = std::atan2(z.imag(), z.real());
  if (t >= pi)
    t = -pi;
  return {std::abs(z), t};
}

inline double uniform_phase_cdf(double t) { return std::clamp((t + pi) / two_pi, 0.0, 1.0); }

inline double standard_cauchy_cdf(double x) { return 0.5 + std::atan(x) / pi; }

namespace detail {

inline void require_replicates(const Ensemble &e, std::size_t minimum, const char *what) {
  if (e.size() < minimum)
    throw std::invalid_argument(std::string(what) + ": need at least " + std::to_string(minimum) +
                                " replicates, got " + std::to_string(e.size()));
}

inline void require_degree(const Ensemble &e, int l, const char *what) {
  if (l < 0 || l > e.lmax())
    throw std::invalid_argument(std::string(what) + ": degree " + std::to_string(l) +
                                " not present (lmax " + std::to_string(e.lmax()) + ")");
}

inline void require_order(int l, int m, const char *what) {
  if (m < -l || m > l)
    throw std::invalid_argument(std::string(what) + ": order " + std::to_string(m) + " outside -l..l");
}

inline void require_positive_order(int l, int m, const char *what) {
  if (m == 0)
    throw std::invalid_argument(std::string(what) + ": m = 0 has a degenerate phase (a_l0 is real)");
  if (m < 1 || m > l)
    throw std::invalid_argument(std::string(what) + ": order must satisfy 1 <= m <= l");
}

inline void require_nonzero(std::span<const complex> zs, const char *what) {
  for (const complex &z : zs)
    if (z != complex(0.0, 0.0))
      return;
  throw std::invalid_argument(std::string(what) + ": coefficient is identically zero (zero spectrum)");
}

// mean and standard error of a sample of complex products
struct ComplexMean {
  complex mean;
  double se;
};

inline ComplexMean complex_mean(std::span<const complex> xs) {
  const double n = static_cast<double>(xs.size());
  complex s = 0.0;
  for (const complex &x : xs)
    s += x;
  const complex mean = s / n;
  double ss = 0.0;
  for (const complex &x : xs)
    ss += std::norm(x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

// First half of the replicates and second half, for tests that must compare
// two independent samples.
inline std::size_t split_point(const Ensemble &e) { return e.size() / 2; }

} // namespace detail

/// Second-order summary of one degree block against C_l I and against the
/// zero cross-block with degree l + 1.
struct CovarianceSummary {
  int l = 0;
  std::size_t n = 0;
  double c_hat = 0.0;           // mean diagonal of the sample covariance
  double c_reference = 0.0;     // expected C_l if supplied, else c_hat
  double max_entry_deviation = 0.0; // max |Gamma - C_ref I| over all entries
  double max_cross_moment = 0.0;    // max |E a_l,m a*_{l+1,m'}|
  double max_offdiag_rho = 0.0;
  double max_cross_rho = 0.0;
  double max_diag_spread = 0.0; // max |Gamma_mm / C_ref - 1|
  double threshold = 0.0;       // 5 / sqrt(N)
  std::vector<std::string> flags;

  bool passed() const { return flags.empty(); }
};

/// Sample second moments E[a a*] of the degree-l block (negative orders
/// reconstructed), compared with C_l I and with the zero l/(l+1) cross block.
///
/// Mean zero is known, so moments are uncentered. An entry is flagged when it
/// is more than five estimated standard errors from its prediction; for unit
/// spectra this is the familiar 5/sqrt(N) band.
inline CovarianceSummary covariance_diagnostic(const Ensemble &e, int l,
                                               std::optional<double> expected_c = std::nullopt) {
  detail::require_replicates(e, 100, "covariance_diagnostic");
  detail::require_degree(e, l, "covariance_diagnostic");
  detail::require_degree(e, l + 1, "covariance_diagnostic");

  const std::size_t n = e.size();
  bool identical = true;
  for (std::size_t r = 1; r < n && identical; ++r)
    identical = e[r] == e[0];
  if (identical)
    throw std::invalid_argument("covariance_diagnostic: degenerate ensemble (all replicates identical)");

  const int dim = 2 * l + 1;
  const int dim2 = 2 * l + 3;
  std::vector<std::vector<complex>> blocks(n);
  std::vector<std::vector<complex>> next(n);
  for (std::size_t r = 0; r < n; ++r) {
    blocks[r] = e[r].block(l);
    next[r] = e[r].block(l + 1);
  }

  auto moment = [&](auto &&xi, auto &&yj) {
    std::vector<complex> prods(n);
    for (std::size_t r = 0; r < n; ++r)
      prods[r] = xi(r) * std::conj(yj(r));
    return detail::complex_mean(prods);
  };

  CovarianceSummary out;
  out.l = l;
  out.n = n;
  out.threshold = 5.0 / std::sqrt(static_cast<double>(n));

  std::vector<detail::ComplexMean> diag(static_cast<std::size_t>(dim));
  std::vector<double> diag2(static_cast<std::size_t>(dim2));
  for (int i = 0; i < dim; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    diag[ii] = moment([&](std::size_t r) { return blocks[r][ii]; }, [&](std::size_t r) { return blocks[r][ii]; });
    out.c_hat += diag[ii].mean.real() / dim;
  }
  for (int j = 0; j < dim2; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    diag2[jj] = moment([&](std::size_t r) { return next[r][jj]; }, [&](std::size_t r) { return next[r][jj]; })
                    .mean.real();
  }
  if (out.c_hat == 0.0)
    throw std::invalid_argument("covariance_diagnostic: degenerate ensemble (zero power at degree " +
                                std::to_string(l) + ")");
  out.c_reference = expected_c.value_or(out.c_hat);

  auto flag = [&](std::string what) { out.flags.push_back(std::move(what)); };

  for (int i = 0; i < dim; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const double dev = diag[ii].mean.real() - out.c_reference;
    out.max_entry_deviation = std::max(out.max_entry_deviation, std::abs(dev));
    out.max_diag_spread = std::max(out.max_diag_spread, std::abs(dev) / out.c_reference);
    // two-point laws give |a|^2 with zero spread; allow for rounding there
    if (std::abs(dev) > 5.0 * diag[ii].se + 1e-12 * out.c_reference)
      flag("diagonal m=" + std::to_string(i - l));
    for (int j = 0; j < dim; ++j) {
      if (j == i)
        continue;
      const auto jj = static_cast<std::size_t>(j);
      const auto g = moment([&](std::size_t r) { return blocks[r][ii]; }, [&](std::size_t r) { return blocks[r][jj]; });
      const double mod = std::abs(g.mean);
      out.max_entry_deviation = std::max(out.max_entry_deviation, mod);
      const double denom = std::sqrt(diag[ii].mean.real() * diag[jj].mean.real());
      if (denom > 0.0)
        out.max_offdiag_rho = std::max(out.max_offdiag_rho, mod / denom);
      if (i < j && mod > 5.0 * g.se)
        flag("off-diagonal (" + std::to_string(i - l) + "," + std::to_string(j - l) + ")");
    }
    for (int j = 0; j < dim2; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const auto g = moment([&](std::size_t r) { return blocks[r][ii]; }, [&](std::size_t r) { return next[r][jj]; });
      const double mod = std::abs(g.mean);
      out.max_cross_moment = std::max(out.max_cross_moment, mod);
      const double denom = std::sqrt(diag[ii].mean.real() * diag2[jj]);
      if (denom > 0.0)
        out.max_cross_rho = std::max(out.max_cross_rho, mod / denom);
      if (mod > 5.0 * g.se)
        flag("cross-degree (" + std::to_string(i - l) + "," + std::to_string(j - l - 1) + ")");
    }
  }
  return out;
}

/// Real/imaginary second moments of a_lm, with standard errors.
struct ReImMoments {
  std::size_t n = 0;
  double var_re = 0.0;
  double var_im = 0.0;
  double cov = 0.0;
  double se_var_re = 0.0;
  double se_var_im = 0.0;
  double se_cov = 0.0;
};

inline ReImMoments reim_moments(const Ensemble &e, int l, int m) {
  detail::require_degree(e, l, "reim_moments");
  detail::require_order(l, m, "reim_moments");
  const auto zs = e.column(l, m);
  const double n = static_cast<double>(zs.size());

  auto mean_se = [&](auto &&f) {
    double s = 0.0;
    double ss = 0.0;
    for (const complex &z : zs) {
      const double v = f(z);
      s += v;
      ss += v * v;
    }
    const double mean = s / n;
    const double var = std::max(0.0, (ss / n - mean * mean) * n / (n - 1.0));
    return std::pair{mean, std::sqrt(var / n)};
  };

  ReImMoments out;
  out.n = zs.size();
  std::tie(out.var_re, out.se_var_re) = mean_se([](complex z) { return z.real() * z.real(); });
  std::tie(out.var_im, out.se_var_im) = mean_se([](complex z) { return z.imag() * z.imag(); });
  std::tie(out.cov, out.se_cov) = mean_se([](complex z) { return z.real() * z.imag(); });
  return out;
}

/// KS test of the phases of a_lm against the uniform law on [-pi, pi).
inline TestReport phase_uniformity_test(const Ensemble &e, int l, int m, double alpha = 0.01) {
  detail::require_degree(e, l, "phase_uniformity_test");
  detail::require_positive_order(l, m, "phase_uniformity_test");
  detail::require_replicates(e, 100, "phase_uniformity_test");
  const auto zs = e.column(l, m);
  detail::require_nonzero(zs, "phase_uniformity_test");

  std::vector<double> phases;
  phases.reserve(zs.size());
  for (const complex &z : zs)
    phases.push_back(to_polar(z).theta);

  TestReport r = ks_one_sample(phases, uniform_phase_cdf, alpha);
  r.test = "phase";
  r.l = l;
  r.m = m;
  return r;
}

/// KS test of Re a_lm / Im a_lm against the standard Cauchy law. Replicates
/// with Im a_lm exactly zero are dropped and counted in the note.
///
/// This checks a consequence of isotropy; the ratio law is the same for every
/// isotropic field and so says nothing about Gaussianity.
inline TestReport cauchy_ratio_test(const Ensemble &e, int l, int m, double alpha = 0.01) {
  detail::require_degree(e, l, "cauchy_ratio_test");
  detail::require_positive_order(l, m, "cauchy_ratio_test");
  detail::require_replicates(e, 100, "cauchy_ratio_test");
  const auto zs = e.column(l, m);
  detail::require_nonzero(zs, "cauchy_ratio_test");

  std::vector<double> ratios;
  ratios.reserve(zs.size());
  std::size_t dropped = 0;
  for (const complex &z : zs) {
    if (z.imag() == 0.0) {
      ++dropped;
      continue;
    }
    ratios.push_back(z.real() / z.imag());
  }

  TestReport r = ks_one_sample(ratios, standard_cauchy_cdf, alpha);
  r.test = "cauchy";
  r.l = l;
  r.m = m;
  if (dropped > 0)
    r.note = "dropped " + std::to_string(dropped) + " replicates with Im a_lm = 0";
  return r;
}

/// Sign-flip symmetry of Re a_lm and Im a_lm.
///
/// A sample and its own negation are not independent, so the first half of
/// the replicates is compared with the negated second half by a two-sample
/// KS test. Re and Im are tested separately (Im only for m != 0) and combined
/// by a Bonferroni correction; the statistic is the larger KS distance.
inline TestReport symmetry_test(const Ensemble &e, int l, int m, double alpha = 0.01) {
  detail::require_degree(e, l, "symmetry_test");
  detail::require_order(l, m, "symmetry_test");
  detail::require_replicates(e, 100, "symmetry_test");
  const auto zs = e.column(l, m);
  const std::size_t half = detail::split_point(e);

  auto part = [&](auto &&get) {
    std::vector<double> first;
    std::vector<double> flipped;
    for (std::size_t r = 0; r < zs.size(); ++r) {
      if (r < half)
        first.push_back(get(zs[r]));
      else
        flipped.push_back(-get(zs[r]));
    }
    return ks_two_sample(first, flipped, alpha);
  };

  const TestReport re = part([](complex z) { return z.real(); });
  double statistic = re.statistic;
  double p_min = re.p_value;
  int parts = 1;
  std::string note = "p_re=" + std::to_string(re.p_value);
  if (m != 0) {
    const TestReport im = part([](complex z) { return z.imag(); });
    statistic = std::max(statistic, im.statistic);
    p_min = std::min(p_min, im.p_value);
    parts = 2;
    note += " p_im=" + std::to_string(im.p_value);
  }

  TestReport r;
  r.test = "symmetry";
  r.l = l;
  r.m = m;
  r.statistic = statistic;
  r.p_value = std::min(1.0, parts * p_min);
  r.n = zs.size();
  r.alpha = alpha;
  r.verdict = verdict_for(r.p_value, alpha);
  r.note = note;
  return r;
}

/// Empirical E[Z1 conj(Z2)] and E[Z1 Z2] for two coefficients.
struct CorrelationSummary {
  HarmonicIndex first{0, 0};
  HarmonicIndex second{0, 0};
  std::size_t n = 0;
  double abs_hermitian = 0.0; // |E Z1 conj(Z2)|
  double abs_plain = 0.0;     // |E Z1 Z2|
  double threshold = 0.0;     // 5 sqrt(E|Z1|^2 E|Z2|^2 / N)
  bool flagged_hermitian = false;
  bool flagged_plain = false;
  std::string text;

  bool passed() const { return !flagged_hermitian && !flagged_plain; }
};

/// Both complex moments vanish for independent centered coefficients. For
/// jointly Gaussian coefficients the converse holds, so near-zero moments
/// certify independence only under Gaussianity; otherwise they certify
/// uncorrelatedness. The summary text says so.
inline CorrelationSummary complex_correlation_test(const Ensemble &e, const HarmonicIndex &i1,
                                                   const HarmonicIndex &i2) {
  if (i1 == i2)
    throw std::invalid_argument("complex_correlation_test: indices must differ");
  detail::require_degree(e, i1.l, "complex_correlation_test");
  detail::require_degree(e, i2.l, "complex_correlation_test");
  detail::require_replicates(e, 100, "complex_correlation_test");

  const auto z1 = e.column(i1.l, i1.m);
  const auto z2 = e.column(i2.l, i2.m);
  const double n = static_cast<double>(z1.size());
  complex herm = 0.0;
  complex plain = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  for (std::size_t r = 0; r < z1.size(); ++r) {
    herm += z1[r] * std::conj(z2[r]);
    plain += z1[r] * z2[r];
    p1 += std::norm(z1[r]);
    p2 += std::norm(z2[r]);
  }

  CorrelationSummary out;
  out.first = i1;
  out.second = i2;
  out.n = z1.size();
  out.abs_hermitian = std::abs(herm / n);
  out.abs_plain = std::abs(plain / n);
  out.threshold = 5.0 * std::sqrt((p1 / n) * (p2 / n) / n);
  out.flagged_hermitian = out.abs_hermitian > out.threshold;
  out.flagged_plain = out.abs_plain > out.threshold;
  if (out.passed())
    out.text = "both moments within 5 standard errors of zero: uncorrelated; "
               "independent only if the coefficients are jointly Gaussian";
  else
    out.text = "nonzero complex moment: coefficients are correlated, hence dependent";
  return out;
}

/// Two-sample KS comparison of a_lm before and after rotating the degree-l
/// block by D^l(g).
///
/// For an isotropic law the rotated block has the same distribution, so a
/// rejection certifies non-isotropy. Independent non-Gaussian coefficients
/// are never isotropic, and the rotation mixes 2l+1 of them into a visibly
/// different marginal.
///
/// The pre-rotation sample is Re and Im of a_lm over the first half of the
/// replicates; the post-rotation sample is Re and Im of b_lm over the second
/// half. Halving keeps the two samples independent (a coefficient and its
/// rotation are correlated); pooling Re with Im uses that they share one law
/// under isotropy.
inline TestReport rotation_mixing_gaussianity_test(const Ensemble &e, int l, int m, const EulerAngles &g,
                                                   double alpha = 0.01) {
  if (!(g.beta() > 0.0 && g.beta() < pi))
    throw std::invalid_argument("rotation_mixing_gaussianity_test: degenerate rotation (beta must lie "
                                "strictly inside (0, pi))");
  detail::require_degree(e, l, "rotation_mixing_gaussianity_test");
  detail::require_positive_order(l, m, "rotation_mixing_gaussianity_test");
  detail::require_replicates(e, 100, "rotation_mixing_gaussianity_test");

  const WignerDMatrix d = wigner_D(l, g);
  const std::size_t half = detail::split_point(e);
  std::vector<double> before;
  std::vector<double> after;
  before.reserve(2 * half);
  after.reserve(2 * (e.size() - half));
  for (std::size_t r = 0; r < e.size(); ++r) {
    if (r < half) {
      const complex z = e[r](l, m);
      before.push_back(z.real());
      before.push_back(z.imag());
    } else {
      const auto rotated = rotate_block(e[r].block(l), d);
      const complex z = rotated[static_cast<std::size_t>(l + m)];
      after.push_back(z.real());
      after.push_back(z.imag());
    }
  }

  TestReport r = ks_two_sample(before, after, alpha);
  r.test = "mixing";
  r.l = l;
  r.m = m;
  r.n = e.size();
  return r;
}

/// Median over consecutive batches of the sample variance of xs, one value
/// per batch size. A finite-variance sample gives a flat profile; an
/// infinite-variance one keeps growing with the batch size.
inline std::vector<double> median_batch_variance(std::span<const double> xs, std::span<const std::size_t> batch_sizes) {
  std::vector<double> out;
  for (std::size_t b : batch_sizes) {
    if (b < 2 || b > xs.size())
      throw std::invalid_argument("median_batch_variance: batch size " + std::to_string(b) + " out of range");
    std::vector<double> vars;
    for (std::size_t start = 0; start + b <= xs.size(); start += b) {
      double s = 0.0;
      for (std::size_t k = start; k < start + b; ++k)
        s += xs[k];
      const double mean = s / static_cast<double>(b);
      double ss = 0.0;
      for (std::size_t k = start; k < start + b; ++k)
        ss += (xs[k] - mean) * (xs[k] - mean);
      vars.push_back(ss / static_cast<double>(b - 1));
    }
    const auto mid = vars.begin() + static_cast<std::ptrdiff_t>(vars.size() / 2);
    std::nth_element(vars.begin(), mid, vars.end());
    double med = *mid;
    if (vars.size() % 2 == 0)
      med = 0.5 * (med + *std::max_element(vars.begin(), mid));
    out.push_back(med);
  }
  return out;
}

} // namespace isofield

#endif // ISOFIELD_DIAGNOSTICS_HPP
