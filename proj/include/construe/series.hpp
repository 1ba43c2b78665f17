#ifndef CONSTRUE_SERIES_HPP
#define CONSTRUE_SERIES_HPP

#include <optional>
#include <string>
#include <vector>

#include "construe/time_types.hpp"

namespace construe {

// A sampled base signal: strictly increasing times, one value per sample.
// Samples are the q0 layer of the hierarchy; they are consumed by detectors
// and observation procedures rather than ingested as observations.
struct SampleSeries {
  std::vector<TimeMs> t;
  std::vector<double> v;
  std::string unit = "uV";

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  void push(TimeMs ti, double vi);

  // Index range [first, last] of samples with t in [lo, hi]; nullopt if none.
  std::optional<std::pair<std::size_t, std::size_t>> range(TimeMs lo,
                                                           TimeMs hi) const;

  // max |v[i+1]-v[i]| / (t[i+1]-t[i]) over samples within [lo, hi].
  double max_abs_slope(TimeMs lo, TimeMs hi) const;
};

}  // namespace construe

#endif
