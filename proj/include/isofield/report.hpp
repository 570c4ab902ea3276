#ifndef ISOFIELD_REPORT_HPP
#define ISOFIELD_REPORT_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>

namespace isofield {

enum class Verdict { pass, reject, inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
  case Verdict::pass:
    return "pass";
  case Verdict::reject:
    return "reject";
  case Verdict::inconclusive:
    return "inconclusive";
  }
  return "unknown";
}

/// Outcome of one statistical test. A test rejects iff p_value < alpha; tests
/// without a p-value (moment diagnostics) carry NaN and decide from flags.
struct TestReport {
  std::string test;
  int l = -1;
  int m = 0;
  double statistic = 0.0;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
  double alpha = 0.01;
  Verdict verdict = Verdict::inconclusive;
  std::string note;

  bool passed() const { return verdict == Verdict::pass; }
};

inline Verdict verdict_for(double p_value, double alpha) {
  return p_value < alpha ? Verdict::reject : Verdict::pass;
}

} // namespace isofield

#endif // ISOFIELD_REPORT_HPP
