#ifndef ISOFIELD_CLI_HPP
#define ISOFIELD_CLI_HPP

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "isofield/diagnostics.hpp"
#include "isofield/io.hpp"
#include "isofield/parallel.hpp"
#include "isofield/sampling.hpp"
#include "isofield/transform.hpp"
#include "isofield/wigner.hpp"

namespace isofield::cli {

enum ExitCode : int { exit_ok = 0, exit_rejected = 1, exit_usage = 2, exit_io = 3 };

/// Bad flags or inputs that do not fit together.
class usage_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int default_lmax_guard = 256;
inline constexpr std::uint64_t default_demo_seed = 20050621;

struct TestSelection {
  bool cov = false;
  bool phase = false;
  bool cauchy = false;
  bool symmetry = false;
  bool independence = false;
  bool mixing = false;

  bool any() const { return cov || phase || cauchy || symmetry || independence || mixing; }
  static TestSelection all() { return {true, true, true, true, true, true}; }
};

struct RunConfig {
  std::string command;
  std::optional<int> lmax;
  std::size_t n_replicates = 100;
  std::uint64_t seed = 0;
  std::string spectrum_path;
  std::vector<std::string> input_paths;
  std::string output_path;
  std::string sampler = "gaussian";
  EulerAngles angles{1.0, pi / 2.0, 0.5};
  double alpha = 0.01;
  int l = 2;
  int m = 1;
  std::optional<int> l2;
  std::optional<int> m2;
  TestSelection tests;
  bool allow_large = false;
  int jobs = 1;
};

/// ISOFIELD_SEED, when set, replaces the configured seed.
inline void apply_environment(RunConfig &cfg) {
  if (const char *env = std::getenv("ISOFIELD_SEED"); env != nullptr && *env != '\0') {
    try {
      cfg.seed = detail::parse_int<std::uint64_t>(env, "ISOFIELD_SEED");
    } catch (const format_error &e) {
      throw usage_error(e.what());
    }
  }
}

namespace detail {

inline void check_lmax_guard(const RunConfig &cfg, int lmax) {
  if (lmax > default_lmax_guard && !cfg.allow_large)
    throw usage_error("lmax " + std::to_string(lmax) + " exceeds " + std::to_string(default_lmax_guard) +
                      "; pass --allow-large to run anyway");
}

inline void check_input_file(const std::string &path) {
  if (path.empty())
    throw usage_error("missing input path");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw io_error("input file '" + path + "' does not exist");
}

inline void check_output_path(const std::string &path) {
  if (path.empty())
    throw usage_error("missing output path (--output)");
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty() && !std::filesystem::is_directory(parent, ec))
    throw io_error("output directory '" + parent.string() + "' does not exist");
}

inline std::string first_line(const std::string &path) {
  auto in = open_input(path);
  std::string line;
  while (std::getline(in, line))
    if (!isofield::detail::is_blank(line))
      return line;
  return {};
}

inline bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

template <class Writer>
void write_text_output(const std::string &path, Writer &&writer) {
  auto out = open_output(path);
  writer(out);
  if (!out.flush())
    throw io_error("failed writing '" + path + "'");
}

inline Ensemble load_ensemble(const std::string &path) {
  auto in = open_input(path);
  return read_ensemble(in);
}

/// Inputs must agree on lmax and sampler; replicates are concatenated in
/// argument order.
inline Ensemble merge_inputs(const std::vector<std::string> &paths) {
  if (paths.empty())
    throw usage_error("no ensemble input given (--input)");
  std::vector<CoefficientSet> sets;
  std::optional<Ensemble> first;
  for (const auto &p : paths) {
    Ensemble e = load_ensemble(p);
    if (first && (e.lmax() != first->lmax() || e.sampler() != first->sampler()))
      throw usage_error("mixed-provenance ensembles: '" + p + "' has lmax=" + std::to_string(e.lmax()) +
                        " sampler=" + e.sampler() + ", expected lmax=" + std::to_string(first->lmax()) +
                        " sampler=" + first->sampler());
    sets.insert(sets.end(), e.sets().begin(), e.sets().end());
    if (!first)
      first.emplace(std::move(e));
  }
  return Ensemble(std::move(sets), first->sampler(), first->seed_base());
}

inline TestReport covariance_report(const Ensemble &e, int l, std::optional<double> expected_c, double alpha) {
  const CovarianceSummary s = covariance_diagnostic(e, l, expected_c);
  TestReport r;
  r.test = "cov";
  r.l = l;
  r.m = 0;
  r.statistic = std::max(s.max_offdiag_rho, s.max_cross_rho);
  r.n = s.n;
  r.alpha = alpha;
  r.verdict = s.passed() ? Verdict::pass : Verdict::reject;
  std::ostringstream note;
  note << "c_hat=" << isofield::detail::format_double(s.c_hat)
       << " max_entry_dev=" << isofield::detail::format_double(s.max_entry_deviation)
       << " max_cross=" << isofield::detail::format_double(s.max_cross_moment);
  for (const auto &f : s.flags)
    note << "; flagged " << f;
  r.note = note.str();
  return r;
}

inline TestReport independence_report(const Ensemble &e, const HarmonicIndex &i1, const HarmonicIndex &i2,
                                       double alpha) {
  const CorrelationSummary s = complex_correlation_test(e, i1, i2);
  TestReport r;
  r.test = "independence";
  r.l = i1.l;
  r.m = i1.m;
  r.statistic = std::max(s.abs_hermitian, s.abs_plain);
  r.n = s.n;
  r.alpha = alpha;
  r.verdict = s.passed() ? Verdict::pass : Verdict::reject;
  r.note = "vs (" + std::to_string(i2.l) + "," + std::to_string(i2.m) + ") |E[Z1 conj Z2]|=" +
           isofield::detail::format_double(s.abs_hermitian) +
           " |E[Z1 Z2]|=" + isofield::detail::format_double(s.abs_plain) + "; " + s.text;
  return r;
}

inline std::vector<TestReport> run_selected(const Ensemble &e, const RunConfig &cfg, const TestSelection &sel,
                                            std::optional<double> expected_c) {
  std::vector<TestReport> out;
  const int l2 = cfg.l2.value_or(cfg.l + 1);
  const int m2 = cfg.m2.value_or(cfg.m);
  if (sel.cov)
    out.push_back(covariance_report(e, cfg.l, expected_c, cfg.alpha));
  if (sel.phase)
    out.push_back(phase_uniformity_test(e, cfg.l, cfg.m, cfg.alpha));
  if (sel.cauchy)
    out.push_back(cauchy_ratio_test(e, cfg.l, cfg.m, cfg.alpha));
  if (sel.symmetry)
    out.push_back(symmetry_test(e, cfg.l, cfg.m, cfg.alpha));
  if (sel.independence)
    out.push_back(independence_report(e, HarmonicIndex(cfg.l, cfg.m), HarmonicIndex(l2, m2), cfg.alpha));
  if (sel.mixing)
    out.push_back(rotation_mixing_gaussianity_test(e, cfg.l, cfg.m, cfg.angles, cfg.alpha));
  return out;
}

} // namespace detail

/// Draws n_replicates coefficient sets from the spectrum. One replicate is
/// written as a plain coefficient file, more as one ensemble container.
inline int cmd_simulate(const RunConfig &cfg, std::ostream &log) {
  detail::check_input_file(cfg.spectrum_path);
  detail::check_output_path(cfg.output_path);
  if (cfg.n_replicates < 1)
    throw usage_error("--n must be at least 1");
  const Sampler law = parse_sampler(cfg.sampler);

  PowerSpectrum spec = [&] {
    auto in = open_input(cfg.spectrum_path);
    return read_spectrum(in);
  }();
  if (cfg.lmax) {
    if (*cfg.lmax < 0 || *cfg.lmax > spec.lmax())
      throw usage_error("--lmax " + std::to_string(*cfg.lmax) + " outside the spectrum's range 0.." +
                        std::to_string(spec.lmax()));
    spec = PowerSpectrum(std::vector<double>(spec.values().begin(), spec.values().begin() + *cfg.lmax + 1));
  }
  detail::check_lmax_guard(cfg, spec.lmax());

  if (cfg.n_replicates == 1) {
    const CoefficientSet a = sample_coeffs(spec, law, cfg.seed);
    detail::write_text_output(cfg.output_path, [&](std::ostream &out) { write_coefficients(out, a, cfg.seed); });
  } else {
    const Ensemble e = sample_ensemble(spec, law, cfg.n_replicates, cfg.seed, cfg.jobs);
    detail::write_text_output(cfg.output_path, [&](std::ostream &out) { write_ensemble(out, e); });
  }
  log << "simulate: wrote " << cfg.n_replicates << " " << to_string(law) << " replicate(s), lmax=" << spec.lmax()
      << ", seed=" << cfg.seed << " to " << cfg.output_path << '\n';
  return exit_ok;
}

/// Coefficient file -> grid file on make_grid(lmax), lmax defaulting to the
/// coefficients' band limit.
inline int cmd_synth(const RunConfig &cfg, std::ostream &log) {
  if (cfg.input_paths.size() != 1)
    throw usage_error("synth takes exactly one --input coefficient file");
  detail::check_input_file(cfg.input_paths.front());
  detail::check_output_path(cfg.output_path);
  if (!detail::starts_with(detail::first_line(cfg.input_paths.front()), coeffs_header_prefix))
    throw format_error("synth expects a coefficient file ('" + std::string(coeffs_header_prefix) + "')");

  auto in = open_input(cfg.input_paths.front());
  const SeededCoefficients a = read_coefficients(in);
  const int grid_lmax = cfg.lmax.value_or(a.coeffs.lmax());
  detail::check_lmax_guard(cfg, std::max(grid_lmax, a.coeffs.lmax()));
  if (grid_lmax < a.coeffs.lmax())
    throw usage_error("band-limit mismatch: grid lmax " + std::to_string(grid_lmax) +
                      " is below coefficient lmax " + std::to_string(a.coeffs.lmax()));

  const FieldGrid f = synthesize(a.coeffs, make_grid(grid_lmax));
  auto out = open_output(cfg.output_path, true);
  write_grid(out, f);
  if (!out.flush())
    throw io_error("failed writing '" + cfg.output_path + "'");
  log << "synth: " << f.grid().n_theta() << " x " << f.grid().n_phi() << " grid written to " << cfg.output_path
      << '\n';
  return exit_ok;
}

/// Grid file -> coefficient file up to lmax (default: the grid's exact limit).
inline int cmd_analyze(const RunConfig &cfg, std::ostream &log) {
  if (cfg.input_paths.size() != 1)
    throw usage_error("analyze takes exactly one --input grid file");
  detail::check_input_file(cfg.input_paths.front());
  detail::check_output_path(cfg.output_path);

  auto in = open_input(cfg.input_paths.front(), true);
  const FieldGrid f = read_grid(in);
  const int lmax = cfg.lmax.value_or(f.grid().lmax_exact);
  detail::check_lmax_guard(cfg, lmax);
  if (lmax > f.grid().lmax_exact)
    throw usage_error("band-limit mismatch: requested lmax " + std::to_string(lmax) + " but the grid resolves lmax " +
                      std::to_string(f.grid().lmax_exact));
  const CoefficientSet a = analyze(f, lmax);
  detail::write_text_output(cfg.output_path, [&](std::ostream &out) { write_coefficients(out, a, cfg.seed); });
  log << "analyze: lmax=" << lmax << " coefficients written to " << cfg.output_path << '\n';
  return exit_ok;
}

/// Rotates every degree of a coefficient file or of every replicate of an
/// ensemble by the configured Euler angles.
inline int cmd_rotate(const RunConfig &cfg, std::ostream &log) {
  if (cfg.input_paths.size() != 1)
    throw usage_error("rotate takes exactly one --input file");
  detail::check_input_file(cfg.input_paths.front());
  detail::check_output_path(cfg.output_path);

  const std::string head = detail::first_line(cfg.input_paths.front());
  if (detail::starts_with(head, ensemble_header_prefix)) {
    const Ensemble e = detail::load_ensemble(cfg.input_paths.front());
    std::vector<CoefficientSet> rotated(e.size(), CoefficientSet(e.lmax()));
    parallel_for(e.size(), cfg.jobs, [&](std::size_t i) { rotated[i] = rotate(e[i], cfg.angles); });
    const Ensemble out_e(std::move(rotated), e.sampler(), e.seed_base());
    detail::write_text_output(cfg.output_path, [&](std::ostream &out) { write_ensemble(out, out_e); });
  } else {
    auto in = open_input(cfg.input_paths.front());
    const SeededCoefficients a = read_coefficients(in);
    const CoefficientSet b = rotate(a.coeffs, cfg.angles);
    detail::write_text_output(cfg.output_path, [&](std::ostream &out) { write_coefficients(out, b, a.seed); });
  }
  log << "rotate: wrote " << cfg.output_path << '\n';
  return exit_ok;
}

/// Runs the selected diagnostics (all when none is selected) on the merged
/// input ensembles. Exit status 0 iff every verdict passes.
inline int cmd_test(const RunConfig &cfg, std::ostream &log) {
  if (cfg.input_paths.empty())
    throw usage_error("test needs at least one --input ensemble");
  for (const auto &p : cfg.input_paths)
    detail::check_input_file(p);
  if (!cfg.output_path.empty())
    detail::check_output_path(cfg.output_path);

  std::optional<double> expected_c;
  if (!cfg.spectrum_path.empty()) {
    detail::check_input_file(cfg.spectrum_path);
    auto in = open_input(cfg.spectrum_path);
    const PowerSpectrum spec = read_spectrum(in);
    if (cfg.l <= spec.lmax())
      expected_c = spec[cfg.l];
  }

  const Ensemble e = detail::merge_inputs(cfg.input_paths);
  const TestSelection sel = cfg.tests.any() ? cfg.tests : TestSelection::all();
  const std::vector<TestReport> reports = detail::run_selected(e, cfg, sel, expected_c);

  std::vector<ReportEntry> entries;
  bool all_pass = true;
  for (const auto &r : reports) {
    entries.push_back({r, ""});
    all_pass = all_pass && r.passed();
    log << "test " << r.test << ": " << to_string(r.verdict) << '\n';
  }
  if (cfg.output_path.empty())
    write_report(log, entries);
  else
    detail::write_text_output(cfg.output_path, [&](std::ostream &out) { write_report(out, entries); });
  return all_pass ? exit_ok : exit_rejected;
}

/// Below this many replicates the demo's verdicts are reported as
/// inconclusive.
inline constexpr std::size_t demo_min_power_n = 1000;

/// Gaussian and moment-matched independent non-Gaussian ensembles pushed
/// through sample -> synthesize -> analyze -> every diagnostic (the mixing
/// test includes the rotation step), reported side by side.
inline int cmd_demo_theorem4(const RunConfig &cfg, std::ostream &log) {
  if (!cfg.output_path.empty())
    detail::check_output_path(cfg.output_path);
  const int lmax = cfg.lmax.value_or(4);
  detail::check_lmax_guard(cfg, lmax);
  if (cfg.l + 1 > lmax)
    throw usage_error("demo needs lmax >= l + 1");
  const std::size_t n = cfg.n_replicates;
  const bool underpowered = n < demo_min_power_n;
  if (underpowered)
    log << "warning: n=" << n << " is underpowered (need >= " << demo_min_power_n
        << "); verdicts are marked inconclusive\n";

  const PowerSpectrum spec = PowerSpectrum::flat(lmax, 1.0);
  const QuadratureGrid grid = make_grid(lmax);
  const std::vector<Sampler> laws{Sampler::gaussian, Sampler::laplace, Sampler::uniform, Sampler::rademacher};
  const std::vector<std::string> names{"cov", "phase", "cauchy", "symmetry", "independence", "mixing"};

  std::vector<ReportEntry> entries;
  std::vector<std::vector<Verdict>> table(names.size());
  for (std::size_t k = 0; k < laws.size(); ++k) {
    const std::uint64_t base = cfg.seed + k * n;
    std::vector<TestReport> reports;
    if (n >= 100) {
      std::vector<CoefficientSet> sets(n, CoefficientSet(lmax));
      parallel_for(n, cfg.jobs, [&](std::size_t i) {
        const CoefficientSet a = sample_coeffs(spec, laws[k], base + i);
        sets[i] = analyze(synthesize(a, grid), lmax);
      });
      const Ensemble e(std::move(sets), std::string(to_string(laws[k])), base);
      reports = detail::run_selected(e, cfg, TestSelection::all(), 1.0);
    } else {
      for (const auto &name : names) {
        TestReport r;
        r.test = name;
        r.l = cfg.l;
        r.m = cfg.m;
        r.statistic = std::numeric_limits<double>::quiet_NaN();
        r.n = n;
        r.alpha = cfg.alpha;
        reports.push_back(r);
      }
    }
    for (std::size_t t = 0; t < reports.size(); ++t) {
      if (underpowered) {
        reports[t].verdict = Verdict::inconclusive;
        reports[t].note = "underpowered" + (reports[t].note.empty() ? std::string() : "; " + reports[t].note);
      }
      table[t].push_back(reports[t].verdict);
      entries.push_back({reports[t], std::string(to_string(laws[k]))});
    }
  }

  auto emit = [&](std::ostream &out) {
    write_report(out, entries);
    out << "\n# summary n=" << n << " lmax=" << lmax << " l=" << cfg.l << " m=" << cfg.m
        << " alpha=" << isofield::detail::format_double(cfg.alpha) << " seed=" << cfg.seed << '\n';
    out << "# " << std::left << std::setw(14) << "test";
    for (Sampler s : laws)
      out << std::setw(14) << to_string(s);
    out << '\n';
    for (std::size_t t = 0; t < names.size(); ++t) {
      out << "# " << std::setw(14) << names[t];
      for (Verdict v : table[t])
        out << std::setw(14) << to_string(v);
      out << '\n';
    }
  };
  if (cfg.output_path.empty())
    emit(log);
  else
    detail::write_text_output(cfg.output_path, emit);
  return exit_ok;
}

/// Dispatches cfg.command and maps failures onto exit codes: 2 for usage and
/// configuration errors, 3 for I/O and format errors.
inline int run(const RunConfig &cfg, std::ostream &log, std::ostream &err) {
  try {
    if (cfg.command == "simulate")
      return cmd_simulate(cfg, log);
    if (cfg.command == "synth")
      return cmd_synth(cfg, log);
    if (cfg.command == "analyze")
      return cmd_analyze(cfg, log);
    if (cfg.command == "rotate")
      return cmd_rotate(cfg, log);
    if (cfg.command == "test")
      return cmd_test(cfg, log);
    if (cfg.command == "demo-theorem4")
      return cmd_demo_theorem4(cfg, log);
    throw usage_error("unknown command '" + cfg.command + "'");
  } catch (const format_error &e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const io_error &e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::logic_error &e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  }
}

} // namespace isofield::cli

#endif // ISOFIELD_CLI_HPP
