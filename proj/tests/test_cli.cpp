#include <catch2/catch.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "isofield/cli.hpp"

using namespace isofield;
namespace fs = std::filesystem;

namespace {

class Workdir {
public:
  Workdir() {
    path_ = fs::temp_directory_path() / ("isofield_cli_" + std::to_string(::getpid()) + "_" + std::to_string(count_++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~Workdir() { fs::remove_all(path_); }

  std::string operator/(const std::string &name) const { return (path_ / name).string(); }

private:
  fs::path path_;
  static inline int count_ = 0;
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(const Workdir &w, const std::string &args, const std::string &env = "") {
  const std::string out = w / "stdout.txt";
  const std::string err = w / "stderr.txt";
  const std::string cmd = env + " " + std::string(ISOFIELD_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
  const int status = std::system(cmd.c_str());
  auto slurp = [](const std::string &p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string read_file(const std::string &p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string &p, const std::string &text) { std::ofstream(p, std::ios::binary) << text; }

std::string flat_spectrum(int lmax, double c) {
  std::ostringstream out;
  write_spectrum(out, PowerSpectrum::flat(lmax, c));
  return out.str();
}

std::vector<std::map<std::string, std::string>> report_blocks(const std::string &text) {
  std::istringstream in(text);
  return read_report(in);
}

} // namespace

TEST_CASE("simulate writes coefficient files and ensembles", "[cli]") {
  Workdir w;
  write_file(w / "zero.txt", flat_spectrum(4, 0.0));
  REQUIRE(run_cli(w, "simulate --spectrum " + (w / "zero.txt") + " --n 1 -o " + (w / "z.txt")).code == 0);
  std::ifstream zin(w / "z.txt");
  CHECK(read_coefficients(zin).coeffs == CoefficientSet(4));

  write_file(w / "flat.txt", flat_spectrum(4, 1.0));
  const std::string args = "simulate --spectrum " + (w / "flat.txt") + " --n 50 --sampler laplace --seed 9 -o ";
  REQUIRE(run_cli(w, args + (w / "a.txt")).code == 0);
  REQUIRE(run_cli(w, args + (w / "b.txt") + " --jobs 3").code == 0);
  CHECK(read_file(w / "a.txt") == read_file(w / "b.txt"));
  std::ifstream ein(w / "a.txt");
  const Ensemble e = read_ensemble(ein);
  CHECK(e.size() == 50);
  CHECK(e.sampler() == "laplace");
  CHECK(e.seed_base() == 9);
  CHECK(e[3] == sample_coeffs(PowerSpectrum::flat(4, 1.0), Sampler::laplace, 12));

  REQUIRE(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " --n 3 --lmax 2 -o " + (w / "t.txt")).code == 0);
  std::ifstream tin(w / "t.txt");
  CHECK(read_ensemble(tin).lmax() == 2);
}

TEST_CASE("ISOFIELD_SEED overrides the seed", "[cli]") {
  Workdir w;
  write_file(w / "flat.txt", flat_spectrum(3, 1.0));
  REQUIRE(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " --n 1 --seed 5 -o " + (w / "a.txt"),
                  "ISOFIELD_SEED=77")
              .code == 0);
  std::ifstream in(w / "a.txt");
  const SeededCoefficients a = read_coefficients(in);
  CHECK(a.seed == 77);
  CHECK(a.coeffs == sample_gaussian_coeffs(PowerSpectrum::flat(3, 1.0), 77));
  CHECK(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " -o " + (w / "b.txt"), "ISOFIELD_SEED=x").code == 2);
}

TEST_CASE("synth and analyze", "[cli]") {
  Workdir w;
  CoefficientSet mono(2);
  mono.set(0, 0, {3.0, 0.0});
  {
    std::ofstream out(w / "mono.txt");
    write_coefficients(out, mono, 0);
  }
  REQUIRE(run_cli(w, "synth -i " + (w / "mono.txt") + " -o " + (w / "mono.bin")).code == 0);
  std::ifstream gin(w / "mono.bin", std::ios::binary);
  const FieldGrid f = read_grid(gin);
  for (double v : f.values())
    CHECK(v == Approx(3.0 / std::sqrt(4.0 * pi)).epsilon(1e-14));

  {
    std::ofstream out(w / "zero.bin", std::ios::binary);
    write_grid(out, FieldGrid(make_grid(3), std::vector<double>(4 * 7, 0.0)));
  }
  REQUIRE(run_cli(w, "analyze -i " + (w / "zero.bin") + " -o " + (w / "zero.txt")).code == 0);
  std::ifstream zin(w / "zero.txt");
  CHECK(read_coefficients(zin).coeffs == CoefficientSet(3));

  const CoefficientSet a = sample_gaussian_coeffs(PowerSpectrum::flat(16, 1.0), 123);
  {
    std::ofstream out(w / "a.txt");
    write_coefficients(out, a, 123);
  }
  REQUIRE(run_cli(w, "synth -i " + (w / "a.txt") + " -o " + (w / "a.bin")).code == 0);
  REQUIRE(run_cli(w, "analyze -i " + (w / "a.bin") + " --seed 123 -o " + (w / "back.txt")).code == 0);
  std::ifstream bin(w / "back.txt");
  const SeededCoefficients back = read_coefficients(bin);
  CHECK(back.seed == 123);
  double worst = 0.0;
  for (int l = 0; l <= 16; ++l)
    for (int m = 0; m <= l; ++m)
      worst = std::max(worst, std::abs(back.coeffs(l, m) - a(l, m)));
  CHECK(worst < 1e-8);

  const Run coarse = run_cli(w, "synth -i " + (w / "a.txt") + " --lmax 10 -o " + (w / "c.bin"));
  CHECK(coarse.code == 2);
  CHECK_THAT(coarse.err, Catch::Contains("10") && Catch::Contains("16"));
  const Run over = run_cli(w, "analyze -i " + (w / "a.bin") + " --lmax 20 -o " + (w / "c.txt"));
  CHECK(over.code == 2);
  CHECK_THAT(over.err, Catch::Contains("20") && Catch::Contains("16"));
}

TEST_CASE("rotate preserves the file kind", "[cli]") {
  Workdir w;
  const CoefficientSet a = sample_gaussian_coeffs(PowerSpectrum::flat(3, 1.0), 4);
  {
    std::ofstream out(w / "a.txt");
    write_coefficients(out, a, 4);
  }
  REQUIRE(run_cli(w, "rotate -i " + (w / "a.txt") + " --angles 0.3,1.1,2.0 -o " + (w / "r.txt")).code == 0);
  std::ifstream in(w / "r.txt");
  const CoefficientSet r = read_coefficients(in).coeffs;
  const CoefficientSet expected = rotate(a, {0.3, 1.1, 2.0});
  for (int l = 0; l <= 3; ++l)
    for (int m = 0; m <= l; ++m)
      CHECK(std::abs(r(l, m) - expected(l, m)) < 1e-15);

  write_file(w / "flat.txt", flat_spectrum(2, 1.0));
  REQUIRE(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " --n 4 -o " + (w / "e.txt")).code == 0);
  REQUIRE(run_cli(w, "rotate -i " + (w / "e.txt") + " -o " + (w / "er.txt") + " -j 2").code == 0);
  std::ifstream ein(w / "er.txt");
  CHECK(read_ensemble(ein).size() == 4);
}

TEST_CASE("test command exit status", "[cli]") {
  Workdir w;
  write_file(w / "flat.txt", flat_spectrum(4, 1.0));
  REQUIRE(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " --n 4000 --seed 1 -o " + (w / "g.txt")).code == 0);
  REQUIRE(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " --n 4000 --seed 2 --sampler rademacher -o " +
                         (w / "r.txt"))
              .code == 0);

  const Run all = run_cli(w, "test -i " + (w / "g.txt") + " --spectrum " + (w / "flat.txt") + " -o " + (w / "rep.txt"));
  CHECK(all.code == 0);
  const auto blocks = report_blocks(read_file(w / "rep.txt"));
  REQUIRE(blocks.size() == 6);
  for (const auto &b : blocks)
    CHECK(b.at("verdict") == "pass");

  const Run cov = run_cli(w, "test -i " + (w / "g.txt") + " --cov --l 2");
  CHECK(cov.code == 0);
  CHECK(report_blocks(cov.out.substr(cov.out.find("# isofield report"))).size() == 1);

  const Run mixing = run_cli(w, "test -i " + (w / "r.txt") + " --mixing");
  CHECK(mixing.code == 1);
  CHECK_THAT(mixing.out, Catch::Contains("verdict=reject"));

  // mixed provenance
  CHECK(run_cli(w, "test -i " + (w / "g.txt") + " -i " + (w / "r.txt")).code == 2);
  write_file(w / "flat3.txt", flat_spectrum(3, 1.0));
  REQUIRE(run_cli(w, "simulate --spectrum " + (w / "flat3.txt") + " --n 200 -o " + (w / "g3.txt")).code == 0);
  CHECK(run_cli(w, "test -i " + (w / "g.txt") + " -i " + (w / "g3.txt")).code == 2);

  // merging compatible files
  REQUIRE(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " --n 200 --seed 4000 -o " + (w / "g2.txt")).code ==
          0);
  CHECK(run_cli(w, "test -i " + (w / "g.txt") + " -i " + (w / "g2.txt") + " --phase").code == 0);

  write_file(w / "empty.txt", "# isofield ensemble v1 n=0 lmax=4 sampler=gaussian seed=0\n");
  CHECK(run_cli(w, "test -i " + (w / "empty.txt")).code == 2);
  CHECK(run_cli(w, "test -i " + (w / "missing.txt")).code == 3);
  write_file(w / "junk.txt", "not an ensemble\n");
  CHECK(run_cli(w, "test -i " + (w / "junk.txt")).code == 3);
}

TEST_CASE("usage and I/O errors map to exit codes", "[cli]") {
  Workdir w;
  write_file(w / "flat.txt", flat_spectrum(2, 1.0));
  CHECK(run_cli(w, "").code == 2);
  CHECK(run_cli(w, "frobnicate").code == 2);
  CHECK(run_cli(w, "simulate --bogus").code == 2);
  CHECK(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " --sampler cauchy -o " + (w / "x.txt")).code == 2);
  CHECK(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " --n 0 -o " + (w / "x.txt")).code == 2);
  CHECK(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " --lmax 5 -o " + (w / "x.txt")).code == 2);
  CHECK(run_cli(w, "simulate --spectrum " + (w / "nope.txt") + " -o " + (w / "x.txt")).code == 3);
  CHECK(run_cli(w, "simulate --spectrum " + (w / "flat.txt") + " -o " + (w / "no/such/dir/x.txt")).code == 3);
  write_file(w / "bad.txt", "# isofield spectrum v1\n0 1\n2 1\n");
  CHECK(run_cli(w, "simulate --spectrum " + (w / "bad.txt") + " -o " + (w / "x.txt")).code == 3);
  CHECK(run_cli(w, "synth -i " + (w / "flat.txt") + " -o " + (w / "x.bin")).code == 3);
  CHECK(run_cli(w, "analyze -i " + (w / "flat.txt") + " -o " + (w / "x.txt")).code == 3);
  CHECK(run_cli(w, "test -i " + (w / "flat.txt") + " --angles 1,4,0").code == 2);
}

TEST_CASE("lmax guard", "[cli]") {
  Workdir w;
  write_file(w / "big.txt", flat_spectrum(300, 1.0));
  const Run guarded = run_cli(w, "simulate --spectrum " + (w / "big.txt") + " --n 1 -o " + (w / "x.txt"));
  CHECK(guarded.code == 2);
  CHECK_THAT(guarded.err, Catch::Contains("--allow-large"));
  CHECK(run_cli(w, "simulate --spectrum " + (w / "big.txt") + " --n 1 --allow-large -o " + (w / "x.txt")).code == 0);
  CHECK(run_cli(w, "demo-theorem4 --lmax 257 --n 10").code == 2);
}

TEST_CASE("demo-theorem4", "[cli]") {
  Workdir w;
  const Run first = run_cli(w, "demo-theorem4 -o " + (w / "demo1.txt"));
  REQUIRE(first.code == 0);
  REQUIRE(run_cli(w, "demo-theorem4 -o " + (w / "demo2.txt") + " -j 3").code == 0);
  const std::string text = read_file(w / "demo1.txt");
  CHECK(text == read_file(w / "demo2.txt"));
  CHECK_THAT(text, Catch::Contains("# summary n=4000 lmax=4 l=2 m=1"));

  const auto blocks = report_blocks(text);
  REQUIRE(blocks.size() == 24);
  for (const auto &b : blocks) {
    if (b.at("sampler") == "gaussian")
      CHECK(b.at("verdict") == "pass");
    if (b.at("sampler") == "rademacher" && b.at("test") == "mixing")
      CHECK(b.at("verdict") == "reject");
    if (b.at("sampler") == "uniform" && b.at("test") == "mixing")
      CHECK(b.at("verdict") == "reject");
    if (b.at("test") == "cov")
      CHECK(b.at("verdict") == "pass");
  }

  const Run small = run_cli(w, "demo-theorem4 --n 10");
  CHECK(small.code == 0);
  CHECK_THAT(small.out, Catch::Contains("underpowered"));
  for (const auto &b : report_blocks(small.out.substr(small.out.find("# isofield report"))))
    CHECK(b.at("verdict") == "inconclusive");
}

TEST_CASE("run maps exceptions in-process", "[cli]") {
  std::ostringstream log;
  std::ostringstream err;
  cli::RunConfig cfg;
  cfg.command = "simulate";
  CHECK(cli::run(cfg, log, err) == cli::exit_usage);
  cfg.command = "nothing";
  CHECK(cli::run(cfg, log, err) == cli::exit_usage);
  cfg.command = "test";
  cfg.input_paths = {"/nonexistent/e.txt"};
  CHECK(cli::run(cfg, log, err) == cli::exit_io);
}
