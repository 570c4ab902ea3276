#ifndef ISOFIELD_IO_HPP
#define ISOFIELD_IO_HPP

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "isofield/coefficients.hpp"
#include "isofield/ensemble.hpp"
#include "isofield/quadrature.hpp"
#include "isofield/report.hpp"
#include "isofield/transform.hpp"

namespace isofield {

/// Malformed file contents.
class format_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view spectrum_header = "# isofield spectrum v1";
inline constexpr std::string_view coeffs_header_prefix = "# isofield coeffs v1";
inline constexpr std::string_view ensemble_header_prefix = "# isofield ensemble v1";
inline constexpr std::string_view report_header = "# isofield report v1";
inline constexpr std::array<char, 4> grid_magic{'I', 'F', 'G', '1'};

namespace detail {

// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw format_error("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view s, std::string_view what) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw format_error("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
      ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
      ++i;
    if (i > start)
      out.push_back(line.substr(start, i - start));
  }
  return out;
}

// key=value pairs following a fixed header prefix
inline std::map<std::string, std::string, std::less<>> parse_header(std::string_view line, std::string_view prefix) {
  if (line.substr(0, prefix.size()) != prefix)
    throw format_error("expected header '" + std::string(prefix) + "', got '" + std::string(line) + "'");
  std::map<std::string, std::string, std::less<>> kv;
  for (std::string_view tok : split_ws(line.substr(prefix.size()))) {
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos)
      throw format_error("malformed header field '" + std::string(tok) + "'");
    kv.emplace(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
  }
  return kv;
}

inline const std::string &require_key(const std::map<std::string, std::string, std::less<>> &kv,
                                      std::string_view key) {
  const auto it = kv.find(key);
  if (it == kv.end())
    throw format_error("header is missing '" + std::string(key) + "='");
  return it->second;
}

inline bool is_blank(std::string_view line) { return split_ws(line).empty(); }

inline void put_u32(std::ostream &out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFFu), static_cast<char>((v >> 8) & 0xFFu),
                              static_cast<char>((v >> 16) & 0xFFu), static_cast<char>((v >> 24) & 0xFFu)};
  out.write(b.data(), 4);
}

inline void put_f64(std::ostream &out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  std::array<char, 8> b{};
  for (int k = 0; k < 8; ++k)
    b[static_cast<std::size_t>(k)] = static_cast<char>((v >> (8 * k)) & 0xFFu);
  out.write(b.data(), 8);
}

inline std::uint32_t get_u32(std::istream &in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char *>(b.data()), 4))
    throw format_error("grid file truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline double get_f64(std::istream &in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char *>(b.data()), 8))
    throw format_error("grid file truncated");
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k)
    v = (v << 8) | b[static_cast<std::size_t>(k)];
  return std::bit_cast<double>(v);
}

} // namespace detail

// ---- spectrum --------------------------------------------------------------

inline void write_spectrum(std::ostream &out, const PowerSpectrum &spec) {
  out << spectrum_header << '\n';
  for (int l = 0; l <= spec.lmax(); ++l)
    out << l << ' ' << detail::format_double(spec[l]) << '\n';
}

/// One "l C_l" line per degree; every degree 0..L must appear exactly once.
inline PowerSpectrum read_spectrum(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || detail::split_ws(line) != detail::split_ws(spectrum_header))
    throw format_error("missing spectrum header '" + std::string(spectrum_header) + "'");
  std::map<int, double> entries;
  while (std::getline(in, line)) {
    if (detail::is_blank(line) || line.front() == '#')
      continue;
    const auto tok = detail::split_ws(line);
    if (tok.size() != 2)
      throw format_error("spectrum line must be 'l C_l': '" + line + "'");
    const int l = detail::parse_int<int>(tok[0], "degree");
    const double c = detail::parse_double(tok[1], "C_l");
    if (l < 0 || !entries.emplace(l, c).second)
      throw format_error("invalid or repeated degree " + std::to_string(l) + " in spectrum");
  }
  if (entries.empty())
    throw format_error("spectrum has no entries");
  std::vector<double> c;
  for (const auto &[l, v] : entries) {
    if (l != static_cast<int>(c.size()))
      throw format_error("spectrum is missing degree " + std::to_string(c.size()));
    c.push_back(v);
  }
  try {
    return PowerSpectrum(std::move(c));
  } catch (const std::invalid_argument &e) {
    throw format_error(e.what());
  }
}

// ---- coefficients ----------------------------------------------------------

inline void write_coefficients(std::ostream &out, const CoefficientSet &a, std::uint64_t seed) {
  out << coeffs_header_prefix << " lmax=" << a.lmax() << " seed=" << seed << '\n';
  for (int l = 0; l <= a.lmax(); ++l)
    for (int m = 0; m <= l; ++m) {
      const complex z = a(l, m);
      out << l << ' ' << m << ' ' << detail::format_double(z.real()) << ' ' << detail::format_double(z.imag())
          << '\n';
    }
}

struct SeededCoefficients {
  CoefficientSet coeffs;
  std::uint64_t seed;
};

namespace detail {

inline SeededCoefficients read_coefficient_body(std::istream &in, int lmax, std::uint64_t seed) {
  CoefficientSet a(lmax);
  std::string line;
  for (int l = 0; l <= lmax; ++l)
    for (int m = 0; m <= l; ++m) {
      do {
        if (!std::getline(in, line))
          throw format_error("coefficient file truncated before (" + std::to_string(l) + ", " +
                             std::to_string(m) + ")");
      } while (is_blank(line));
      const auto tok = split_ws(line);
      if (tok.size() != 4)
        throw format_error("coefficient line must be 'l m re im': '" + line + "'");
      if (parse_int<int>(tok[0], "degree") != l || parse_int<int>(tok[1], "order") != m)
        throw format_error("coefficient lines out of order: expected (" + std::to_string(l) + ", " +
                           std::to_string(m) + "), got '" + line + "'");
      const double re = parse_double(tok[2], "real part");
      const double im = parse_double(tok[3], "imaginary part");
      if (!std::isfinite(re) || !std::isfinite(im))
        throw format_error("non-finite coefficient at (" + std::to_string(l) + ", " + std::to_string(m) + ")");
      if (m == 0 && im != 0.0)
        throw format_error("a_" + std::to_string(l) + "0 must be real");
      a.set(l, m, complex(re, im));
    }
  return {std::move(a), seed};
}

inline std::string next_nonblank(std::istream &in) {
  std::string line;
  while (std::getline(in, line))
    if (!is_blank(line))
      return line;
  return {};
}

} // namespace detail

inline SeededCoefficients read_coefficients(std::istream &in) {
  const auto kv = detail::parse_header(detail::next_nonblank(in), coeffs_header_prefix);
  const int lmax = detail::parse_int<int>(detail::require_key(kv, "lmax"), "lmax");
  const auto seed = detail::parse_int<std::uint64_t>(detail::require_key(kv, "seed"), "seed");
  if (lmax < 0)
    throw format_error("negative lmax in coefficient header");
  return detail::read_coefficient_body(in, lmax, seed);
}

/// One container: an ensemble header, then one coefficient section per
/// replicate (replicate i carries seed seed_base + i).
inline void write_ensemble(std::ostream &out, const Ensemble &e) {
  out << ensemble_header_prefix << " n=" << e.size() << " lmax=" << e.lmax() << " sampler=" << e.sampler()
      << " seed=" << e.seed_base() << '\n';
  for (std::size_t i = 0; i < e.size(); ++i)
    write_coefficients(out, e[i], e.seed_base() + i);
}

inline Ensemble read_ensemble(std::istream &in) {
  const auto kv = detail::parse_header(detail::next_nonblank(in), ensemble_header_prefix);
  const auto n = detail::parse_int<std::size_t>(detail::require_key(kv, "n"), "n");
  const int lmax = detail::parse_int<int>(detail::require_key(kv, "lmax"), "lmax");
  const std::string sampler = detail::require_key(kv, "sampler");
  const auto seed = detail::parse_int<std::uint64_t>(detail::require_key(kv, "seed"), "seed");
  if (n < 2)
    throw std::invalid_argument("empty ensemble: header declares n=" + std::to_string(n) +
                                " replicates, at least 2 are needed");
  std::vector<CoefficientSet> sets;
  sets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rep = read_coefficients(in);
    if (rep.coeffs.lmax() != lmax)
      throw format_error("replicate " + std::to_string(i) + " has lmax " + std::to_string(rep.coeffs.lmax()) +
                         ", ensemble header says " + std::to_string(lmax));
    sets.push_back(std::move(rep.coeffs));
  }
  if (!detail::next_nonblank(in).empty())
    throw format_error("trailing data after " + std::to_string(n) + " replicates");
  try {
    return Ensemble(std::move(sets), sampler, seed);
  } catch (const std::invalid_argument &e) {
    throw format_error(e.what());
  }
}

// ---- grid ------------------------------------------------------------------

/// Binary layout, little-endian: "IFG1", u32 N_theta, u32 N_phi, N_theta
/// colatitude nodes, N_theta weights, then the N_theta x N_phi values
/// row-major, all float64.
inline void write_grid(std::ostream &out, const FieldGrid &f) {
  const QuadratureGrid &g = f.grid();
  out.write(grid_magic.data(), 4);
  detail::put_u32(out, static_cast<std::uint32_t>(g.n_theta()));
  detail::put_u32(out, static_cast<std::uint32_t>(g.n_phi()));
  for (double t : g.thetas)
    detail::put_f64(out, t);
  for (double w : g.theta_weights)
    detail::put_f64(out, w);
  for (double v : f.values())
    detail::put_f64(out, v);
}

/// The grid geometry is rebuilt from the dimensions and checked against the
/// stored nodes and weights.
inline FieldGrid read_grid(std::istream &in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != grid_magic)
    throw format_error("not a grid file (bad magic)");
  const std::uint32_t ntheta = detail::get_u32(in);
  const std::uint32_t nphi = detail::get_u32(in);
  if (ntheta == 0 || nphi == 0 || ntheta > 1u << 16 || nphi > 1u << 17)
    throw format_error("implausible grid dimensions " + std::to_string(ntheta) + " x " + std::to_string(nphi));

  QuadratureGrid grid = make_grid_sized(static_cast<int>(ntheta), static_cast<int>(nphi));
  for (std::uint32_t i = 0; i < ntheta; ++i)
    if (std::abs(detail::get_f64(in) - grid.thetas[i]) > 1e-12)
      throw format_error("grid nodes do not match a Gauss-Legendre rule of size " + std::to_string(ntheta));
  for (std::uint32_t i = 0; i < ntheta; ++i)
    if (std::abs(detail::get_f64(in) - grid.theta_weights[i]) > 1e-12)
      throw format_error("grid weights do not match a Gauss-Legendre rule of size " + std::to_string(ntheta));
  std::vector<double> values(static_cast<std::size_t>(ntheta) * nphi);
  for (double &v : values)
    v = detail::get_f64(in);
  if (in.peek() != std::char_traits<char>::eof())
    throw format_error("trailing bytes after grid values");
  try {
    return FieldGrid(std::move(grid), std::move(values));
  } catch (const std::invalid_argument &e) {
    throw format_error(e.what());
  }
}

// ---- reports ---------------------------------------------------------------

/// A report block with an optional sampler label (used by side-by-side runs).
struct ReportEntry {
  TestReport report;
  std::string sampler;
};

inline void write_report(std::ostream &out, const std::vector<ReportEntry> &entries) {
  out << report_header << '\n';
  for (const auto &[r, sampler] : entries) {
    out << '\n';
    if (!sampler.empty())
      out << "sampler=" << sampler << '\n';
    out << "test=" << r.test << '\n';
    out << "l=" << r.l << '\n';
    out << "m=" << r.m << '\n';
    out << "stat=" << (std::isnan(r.statistic) ? std::string("na") : detail::format_double(r.statistic)) << '\n';
    out << "p=" << (std::isnan(r.p_value) ? std::string("na") : detail::format_double(r.p_value)) << '\n';
    out << "alpha=" << detail::format_double(r.alpha) << '\n';
    out << "n=" << r.n << '\n';
    out << "verdict=" << to_string(r.verdict) << '\n';
    if (!r.note.empty())
      out << "note=" << r.note << '\n';
  }
}

/// Blocks as key/value maps, in file order.
inline std::vector<std::map<std::string, std::string>> read_report(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != report_header)
    throw format_error("missing report header");
  std::vector<std::map<std::string, std::string>> blocks;
  bool open = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') {
      open = false;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw format_error("report line without '=': '" + line + "'");
    if (!open) {
      blocks.emplace_back();
      open = true;
    }
    blocks.back()[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return blocks;
}

// ---- file helpers ----------------------------------------------------------

inline std::ifstream open_input(const std::string &path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!in)
    throw io_error("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::string &path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::out | std::ios::binary | std::ios::trunc
                                 : std::ios::out | std::ios::trunc);
  if (!out)
    throw io_error("cannot open '" + path + "' for writing");
  return out;
}

} // namespace isofield

#endif // ISOFIELD_IO_HPP
