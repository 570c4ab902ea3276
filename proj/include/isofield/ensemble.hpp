#ifndef ISOFIELD_ENSEMBLE_HPP
#define ISOFIELD_ENSEMBLE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "isofield/coefficients.hpp"

namespace isofield {

/// N >= 2 independent replicates sharing one band limit, plus the sampler
/// label and seed base they were drawn with.
class Ensemble {
public:
  Ensemble(std::vector<CoefficientSet> sets, std::string sampler, std::uint64_t seed_base)
      : sets_(std::move(sets)), sampler_(std::move(sampler)), seed_base_(seed_base) {
    if (sets_.size() < 2)
      throw std::invalid_argument("Ensemble: need at least two replicates, got " +
                                  std::to_string(sets_.size()));
    for (const auto &s : sets_)
      if (s.lmax() != sets_.front().lmax())
        throw std::invalid_argument("Ensemble: replicates disagree on lmax");
  }

  std::size_t size() const { return sets_.size(); }
  int lmax() const { return sets_.front().lmax(); }
  const std::string &sampler() const { return sampler_; }
  std::uint64_t seed_base() const { return seed_base_; }

  const CoefficientSet &operator[](std::size_t i) const { return sets_[i]; }
  const std::vector<CoefficientSet> &sets() const { return sets_; }

  /// a_lm across replicates, in replicate order.
  std::vector<complex> column(int l, int m) const {
    std::vector<complex> out;
    out.reserve(sets_.size());
    for (const auto &s : sets_)
      out.push_back(s(l, m));
    return out;
  }

private:
  std::vector<CoefficientSet> sets_;
  std::string sampler_;
  std::uint64_t seed_base_;
};

} // namespace isofield

#endif // ISOFIELD_ENSEMBLE_HPP
