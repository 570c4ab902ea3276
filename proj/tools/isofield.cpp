#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isofield/cli.hpp"

namespace {

using isofield::cli::RunConfig;

void add_common(CLI::App *sub, RunConfig &cfg) {
  sub->add_option("-o,--output", cfg.output_path, "output file");
  sub->add_option("--seed", cfg.seed, "seed (ISOFIELD_SEED overrides)");
  sub->add_option("-j,--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_flag("--allow-large", cfg.allow_large, "lift the lmax <= 256 guard");
}

void add_index(CLI::App *sub, RunConfig &cfg) {
  sub->add_option("--l", cfg.l, "degree under test");
  sub->add_option("--m", cfg.m, "order under test");
  sub->add_option("--alpha", cfg.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
}

void add_angles(CLI::App *sub, std::vector<double> &angles) {
  sub->add_option("--angles", angles, "Euler angles alpha,beta,gamma")->expected(3)->delimiter(',');
}

} // namespace

int main(int argc, char **argv) {
  RunConfig cfg;
  std::vector<double> angles;
  std::optional<int> lmax;
  std::optional<int> l2;
  std::optional<int> m2;

  CLI::App app{"isofield: isotropic random fields on the sphere"};
  app.require_subcommand(1);

  auto *simulate = app.add_subcommand("simulate", "draw coefficient replicates from a power spectrum");
  simulate->add_option("--spectrum", cfg.spectrum_path, "spectrum file")->required();
  simulate->add_option("--n", cfg.n_replicates, "number of replicates");
  simulate->add_option("--sampler", cfg.sampler, "gaussian|laplace|uniform|rademacher");
  simulate->add_option("--lmax", lmax, "truncate the spectrum at lmax");
  add_common(simulate, cfg);

  auto *synth = app.add_subcommand("synth", "coefficients -> field on a quadrature grid");
  synth->add_option("-i,--input", cfg.input_paths, "coefficient file")->required();
  synth->add_option("--lmax", lmax, "grid band limit (default: coefficient lmax)");
  add_common(synth, cfg);

  auto *analyze = app.add_subcommand("analyze", "field grid -> coefficients");
  analyze->add_option("-i,--input", cfg.input_paths, "grid file")->required();
  analyze->add_option("--lmax", lmax, "analysis band limit (default: grid limit)");
  add_common(analyze, cfg);

  auto *rotate = app.add_subcommand("rotate", "rotate coefficients or an ensemble");
  rotate->add_option("-i,--input", cfg.input_paths, "coefficient or ensemble file")->required();
  add_angles(rotate, angles);
  add_common(rotate, cfg);

  auto *test = app.add_subcommand("test", "run diagnostics on one or more ensembles");
  test->add_option("-i,--input", cfg.input_paths, "ensemble files (merged)")->required();
  test->add_option("--spectrum", cfg.spectrum_path, "expected spectrum for the covariance check");
  test->add_option("--l2", l2, "second degree for the independence test (default l+1)");
  test->add_option("--m2", m2, "second order for the independence test (default m)");
  test->add_flag("--cov", cfg.tests.cov, "second-moment structure");
  test->add_flag("--phase", cfg.tests.phase, "phase uniformity");
  test->add_flag("--cauchy", cfg.tests.cauchy, "Re/Im ratio against standard Cauchy");
  test->add_flag("--symmetry", cfg.tests.symmetry, "sign symmetry");
  test->add_flag("--independence", cfg.tests.independence, "correlation between (l,m) and (l2,m2)");
  test->add_flag("--mixing", cfg.tests.mixing, "rotation mixing gaussianity");
  add_index(test, cfg);
  add_angles(test, angles);
  add_common(test, cfg);

  auto *demo = app.add_subcommand("demo-theorem4", "Gaussian vs independent non-Gaussian side by side");
  cfg.seed = isofield::cli::default_demo_seed;
  demo->add_option("--n", cfg.n_replicates, "replicates per sampler");
  demo->add_option("--lmax", lmax, "band limit (default 4)");
  add_index(demo, cfg);
  add_angles(demo, angles);
  add_common(demo, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return isofield::cli::exit_usage;
  }

  auto *chosen = app.get_subcommands().front();
  cfg.command = chosen->get_name();
  if (chosen != demo && chosen->count("--seed") == 0)
    cfg.seed = 0;
  if (cfg.command == "demo-theorem4" && chosen->count("--n") == 0)
    cfg.n_replicates = 4000;
  cfg.lmax = lmax;
  cfg.l2 = l2;
  cfg.m2 = m2;

  try {
    isofield::cli::apply_environment(cfg);
    if (!angles.empty())
      cfg.angles = isofield::EulerAngles(angles[0], angles[1], angles[2]);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return isofield::cli::exit_usage;
  }
  return isofield::cli::run(cfg, std::cout, std::cerr);
}
