#include <catch2/catch.hpp>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "isofield/diagnostics.hpp"
#include "isofield/sampling.hpp"
#include "isofield/transform.hpp"

using namespace isofield;

namespace {

CoefficientSet random_coeffs(int lmax, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  CoefficientSet a(lmax);
  for (int l = 0; l <= lmax; ++l) {
    a.set(l, 0, {n(gen), 0.0});
    for (int m = 1; m <= l; ++m)
      a.set(l, m, {n(gen), n(gen)});
  }
  return a;
}

double max_abs_difference(const CoefficientSet &a, const CoefficientSet &b) {
  double worst = 0.0;
  for (int l = 0; l <= a.lmax(); ++l)
    for (int m = -l; m <= l; ++m)
      worst = std::max(worst, std::abs(a(l, m) - b(l, m)));
  return worst;
}

std::vector<double> real_parts(const Ensemble &e, int l, int m) {
  std::vector<double> out;
  for (const complex &z : e.column(l, m))
    out.push_back(z.real());
  return out;
}

// Excess kurtosis of a mean-zero sample and its delta-method standard error.
std::pair<double, double> excess_kurtosis(const std::vector<double> &xs) {
  const double n = static_cast<double>(xs.size());
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m2 /= n;
  m4 /= n;
  const double k = m4 / (m2 * m2);
  double ss = 0.0;
  for (double x : xs) {
    const double influence = (x * x * x * x - m4) / (m2 * m2) - 2.0 * m4 * (x * x - m2) / (m2 * m2 * m2);
    ss += influence * influence;
  }
  return {k - 3.0, std::sqrt(ss / n) / std::sqrt(n)};
}

} // namespace

TEST_CASE("power spectrum validation", "[field_model]") {
  CHECK_THROWS_AS(PowerSpectrum({1.0, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(PowerSpectrum({}), std::invalid_argument);
  CHECK_THROWS_AS(PowerSpectrum({1.0, std::nan("")}), std::invalid_argument);
  const PowerSpectrum s = PowerSpectrum::flat(3, 2.0);
  CHECK(s.lmax() == 3);
  CHECK(s[3] == 2.0);
}

TEST_CASE("coefficient storage keeps the real-field structure", "[field_model]") {
  CoefficientSet a(3);
  a.set(2, 1, {1.5, -0.25});
  CHECK(a(2, -1) == complex(-1.5, -0.25));
  a.set(3, -2, {0.5, 0.75});
  CHECK(a(3, 2) == complex(0.5, -0.75));
  CHECK(a(3, -2) == complex(0.5, 0.75));
  CHECK_THROWS_AS(a.set(1, 0, {1.0, 1e-300}), std::invalid_argument);
  CHECK_THROWS_AS(a(4, 0), std::out_of_range);
  CHECK_THROWS_AS(a(2, 3), std::out_of_range);

  const auto blk = a.block(2);
  REQUIRE(blk.size() == 5);
  CHECK(blk[3] == complex(1.5, -0.25));
  CHECK(blk[1] == complex(-1.5, -0.25));

  CoefficientSet b(3);
  std::vector<complex> bad(5, complex(0.0, 0.0));
  bad[2] = {1.0, 0.5};
  CHECK_THROWS_AS(b.set_block(2, bad), std::invalid_argument);
  bad[2] = {1.0, 1e-14};
  b.set_block(2, bad);
  CHECK(b(2, 0).imag() == 0.0);

  CHECK(a.total_power() == Approx(2.0 * (1.5 * 1.5 + 0.25 * 0.25) + 2.0 * (0.25 + 0.5625)));
}

TEST_CASE("zero spectrum gives zero coefficients", "[field_model]") {
  const PowerSpectrum zero = PowerSpectrum::flat(5, 0.0);
  for (Sampler s : {Sampler::gaussian, Sampler::laplace, Sampler::uniform, Sampler::rademacher})
    CHECK(sample_coeffs(zero, s, 9) == CoefficientSet(5));
  CHECK(sample_gaussian_coeffs(zero, 1) == CoefficientSet(5));
  CHECK(sample_independent_nongaussian(zero, "laplace", 1) == CoefficientSet(5));
}

TEST_CASE("samplers are deterministic per seed", "[field_model]") {
  const PowerSpectrum spec = PowerSpectrum::flat(6, 1.3);
  for (Sampler s : {Sampler::gaussian, Sampler::laplace, Sampler::uniform, Sampler::rademacher}) {
    const CoefficientSet a = sample_coeffs(spec, s, 42);
    const CoefficientSet b = sample_coeffs(spec, s, 42);
    CHECK(a == b);
    CHECK_FALSE(a == sample_coeffs(spec, s, 43));
    for (int l = 0; l <= 6; ++l)
      CHECK(a(l, 0).imag() == 0.0);
  }
  const Ensemble serial = sample_ensemble(spec, Sampler::laplace, 300, 7, 1);
  const Ensemble threaded = sample_ensemble(spec, Sampler::laplace, 300, 7, 4);
  CHECK(serial.sets() == threaded.sets());
  CHECK(serial[5] == sample_coeffs(spec, Sampler::laplace, 12));
}

TEST_CASE("sampler labels", "[field_model]") {
  CHECK(parse_sampler("uniform") == Sampler::uniform);
  CHECK_THROWS_AS(parse_sampler("cauchy"), std::invalid_argument);
  CHECK_THROWS_AS(sample_independent_nongaussian(PowerSpectrum::flat(1, 1.0), "student", 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_independent_nongaussian(PowerSpectrum::flat(1, 1.0), Sampler::gaussian, 1),
                  std::invalid_argument);
}

TEST_CASE("gaussian sampler moments", "[field_model]") {
  const std::size_t n = 4000;
  const Ensemble e = sample_ensemble(PowerSpectrum::flat(4, 1.0), Sampler::gaussian, n, 1000);
  const double tol = 4.0 / std::sqrt(static_cast<double>(n));
  const ReImMoments mo = reim_moments(e, 2, 1);
  CHECK(mo.var_re >= 0.5 * (1.0 - tol));
  CHECK(mo.var_re <= 0.5 * (1.0 + tol));
  CHECK(std::abs(mo.var_im - 0.5) <= 5.0 * mo.se_var_im);
  CHECK(std::abs(mo.cov) <= 5.0 * mo.se_cov);

  double var0 = 0.0;
  for (const complex &z : e.column(3, 0))
    var0 += z.real() * z.real();
  var0 /= static_cast<double>(n);
  CHECK(std::abs(var0 - 1.0) <= 5.0 * std::sqrt(2.0 / static_cast<double>(n)));

  const CovarianceSummary cov = covariance_diagnostic(e, 2);
  CHECK(cov.passed());
  CHECK(cov.max_offdiag_rho < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("non-gaussian samplers match the first two moments", "[field_model]") {
  const std::size_t n = 4000;
  for (Sampler s : {Sampler::laplace, Sampler::uniform, Sampler::rademacher}) {
    const Ensemble e = sample_ensemble(PowerSpectrum::flat(4, 1.0), s, n, 5000);
    const ReImMoments mo = reim_moments(e, 2, 1);
    INFO(to_string(s));
    CHECK(std::abs(mo.var_re - 0.5) <= 5.0 * mo.se_var_re + 1e-12);
    CHECK(std::abs(mo.var_im - 0.5) <= 5.0 * mo.se_var_im + 1e-12);
    CHECK(std::abs(mo.cov) <= 5.0 * mo.se_cov + 1e-12);
    CHECK(covariance_diagnostic(e, 2, 1.0).passed());
  }
}

TEST_CASE("laplace shape", "[field_model]") {
  const Ensemble e = sample_ensemble(PowerSpectrum::flat(3, 1.0), Sampler::laplace, 4000, 77);
  const auto [k, se] = excess_kurtosis(real_parts(e, 2, 1));
  CHECK(std::abs(k - 3.0) <= 5.0 * se);
  CHECK(se < 1.0);
}

TEST_CASE("uniform shape", "[field_model]") {
  const Ensemble e = sample_ensemble(PowerSpectrum::flat(3, 1.0), Sampler::uniform, 4000, 78);
  const double edge = std::sqrt(3.0 * 0.5);
  for (double x : real_parts(e, 2, 1))
    REQUIRE(std::abs(x) <= edge);
  const auto [k, se] = excess_kurtosis(real_parts(e, 2, 1));
  CHECK(std::abs(k + 1.2) <= 5.0 * se);
}

TEST_CASE("rademacher values are exactly two points", "[field_model]") {
  const CoefficientSet a = sample_independent_nongaussian(PowerSpectrum::flat(3, 1.0), Sampler::rademacher, 3);
  const double v = std::sqrt(0.5);
  for (int m = 1; m <= 2; ++m) {
    CHECK(std::abs(a(2, m).real()) == v);
    CHECK(std::abs(a(2, m).imag()) == v);
  }
  CHECK(std::abs(a(2, 0).real()) == 1.0);
  std::set<double> seen;
  const Ensemble e = sample_ensemble(PowerSpectrum::flat(2, 1.0), Sampler::rademacher, 200, 1);
  for (double x : real_parts(e, 2, 1))
    seen.insert(x);
  CHECK(seen == std::set<double>{-v, v});
}

TEST_CASE("synthesis closed forms", "[field_model]") {
  const QuadratureGrid grid = make_grid(6);
  CoefficientSet a(6);
  a.set(0, 0, {2.5, 0.0});
  const FieldGrid f = synthesize(a, grid);
  for (double v : f.values())
    CHECK(v == Approx(2.5 / std::sqrt(4.0 * pi)).epsilon(1e-14));

  const FieldGrid zero = synthesize(CoefficientSet(6), grid);
  for (double v : zero.values())
    CHECK(v == 0.0);

  CoefficientSet b(3);
  b.set(1, 0, {1.0, 0.0});
  const QuadratureGrid g3 = make_grid(3);
  const FieldGrid fb = synthesize(b, g3);
  for (std::size_t i = 0; i < g3.n_theta(); ++i)
    for (std::size_t j = 0; j < g3.n_phi(); ++j)
      CHECK(fb(i, j) == Approx(std::sqrt(3.0 / (4.0 * pi)) * std::cos(g3.thetas[i])).margin(1e-15));
}

TEST_CASE("synthesis agrees with pointwise harmonic sums", "[field_model]") {
  const CoefficientSet a = random_coeffs(5, 8);
  const QuadratureGrid grid = make_grid(7);
  const FieldGrid f = synthesize(a, grid);
  for (std::size_t i = 0; i < grid.n_theta(); ++i)
    for (std::size_t j = 0; j < grid.n_phi(); ++j) {
      complex s = 0.0;
      const SphericalPoint p(grid.thetas[i], grid.phis[j]);
      for (int l = 0; l <= 5; ++l)
        for (int m = -l; m <= l; ++m)
          s += a(l, m) * sph_harm({l, m}, p);
      CHECK(std::abs(s.imag()) < 1e-12);
      CHECK(f(i, j) == Approx(s.real()).margin(1e-12));
    }
}

TEST_CASE("analysis closed forms", "[field_model]") {
  const QuadratureGrid grid = make_grid(8);
  const FieldGrid one(grid, std::vector<double>(grid.n_theta() * grid.n_phi(), 1.0));
  const CoefficientSet a = analyze(one, 8);
  CHECK(a(0, 0).real() == Approx(std::sqrt(4.0 * pi)).epsilon(1e-12));
  for (int l = 1; l <= 8; ++l)
    for (int m = 0; m <= l; ++m)
      CHECK(std::abs(a(l, m)) < 1e-10);

  const FieldGrid zero(grid, std::vector<double>(grid.n_theta() * grid.n_phi(), 0.0));
  CHECK(analyze(zero, 8) == CoefficientSet(8));
}

TEST_CASE("analyze inverts synthesize and Parseval holds", "[field_model]") {
  for (int lmax = 0; lmax <= 16; ++lmax) {
    const CoefficientSet a = random_coeffs(lmax, static_cast<std::uint64_t>(100 + lmax));
    const FieldGrid f = synthesize(a, make_grid(lmax));
    const CoefficientSet back = analyze(f, lmax);
    INFO("lmax=" << lmax);
    CHECK(max_abs_difference(a, back) < 1e-8);
    CHECK(std::abs(integrate_square(f) - a.total_power()) < 1e-8);
    for (int l = 0; l <= lmax; ++l)
      CHECK(back(l, 0).imag() == 0.0);
  }
  // a finer grid than needed also round-trips
  const CoefficientSet a = random_coeffs(5, 3);
  CHECK(max_abs_difference(a, analyze(synthesize(a, make_grid(11)), 5)) < 1e-10);
}

TEST_CASE("transforms refuse grids that are too coarse", "[field_model]") {
  CHECK_THROWS_AS(synthesize(CoefficientSet(5), make_grid(4)), std::invalid_argument);
  const FieldGrid f = synthesize(CoefficientSet(3), make_grid(3));
  CHECK_THROWS_AS(analyze(f, 4), std::invalid_argument);
  CHECK_THROWS_AS(FieldGrid(make_grid(2), std::vector<double>(4, 0.0)), std::invalid_argument);
  std::vector<double> bad(make_grid(1).n_theta() * make_grid(1).n_phi(), 0.0);
  bad[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(FieldGrid(make_grid(1), bad), std::invalid_argument);
}

TEST_CASE("heavy-tail realization", "[field_model]") {
  HeavyTailFieldSpec spec;
  CHECK_NOTHROW(spec.validate());
  const CoefficientSet a = build_heavy_tail_realization(spec, 4);
  CHECK(a == build_heavy_tail_realization(spec, 4));
  CHECK(a.lmax() == 4);
  for (int l : {0, 1})
    CHECK(a(l, 0) == complex(0.0, 0.0));

  spec.eta_scale = 0.0;
  const CoefficientSet z = build_heavy_tail_realization(spec, 4);
  for (int m = -spec.l3; m <= spec.l3; ++m)
    CHECK(z(spec.l3, m) == complex(0.0, 0.0));
  // the Gaussian blocks do not depend on eta
  CHECK(z.block(spec.l1) == a.block(spec.l1));

  HeavyTailFieldSpec bad;
  bad.l2 = bad.l1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = HeavyTailFieldSpec{};
  bad.base_c[1] = 0.0;
  CHECK_THROWS_AS(build_heavy_tail_realization(bad, 1), std::invalid_argument);
}

TEST_CASE("heavy-tail ensemble: finite degrees behave, the Cauchy degree does not", "[field_model]") {
  const HeavyTailFieldSpec spec;
  const std::size_t n = 4000;
  const Ensemble e = heavy_tail_ensemble(spec, n, 900);
  CHECK(e.sampler() == "heavy-tail");
  const CovarianceSummary cov = covariance_diagnostic(e, spec.l1, 1.0);
  CHECK(cov.passed());
  CHECK(cov.max_entry_deviation < 5.0 / std::sqrt(static_cast<double>(n)));

  const std::vector<std::size_t> batches{5, 20, 80, 320};
  const auto heavy = median_batch_variance(real_parts(e, spec.l3, 1), batches);
  for (std::size_t i = 1; i < heavy.size(); ++i)
    CHECK(heavy[i] > heavy[i - 1]);
  const auto light = median_batch_variance(real_parts(e, spec.l1, 1), batches);
  for (double v : light)
    CHECK(v == Approx(0.5).epsilon(0.35));
}
