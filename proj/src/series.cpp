#include "construe/series.hpp"

#include <cmath>
#include <stdexcept>

namespace construe {

void SampleSeries::push(TimeMs ti, double vi) {
  if (!t.empty() && ti <= t.back())
    throw std::runtime_error("sample times must be strictly increasing");
  t.push_back(ti);
  v.push_back(vi);
}

std::optional<std::pair<std::size_t, std::size_t>> SampleSeries::range(
    TimeMs lo, TimeMs hi) const {
  std::size_t first = t.size();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= lo) {
      first = i;
      break;
    }
  }
  if (first == t.size() || t[first] > hi) return std::nullopt;
  std::size_t last = first;
  while (last + 1 < t.size() && t[last + 1] <= hi) ++last;
  return std::make_pair(first, last);
}

double SampleSeries::max_abs_slope(TimeMs lo, TimeMs hi) const {
  auto r = range(lo, hi);
  if (!r) return 0.0;
  double best = 0.0;
  for (std::size_t i = r->first; i < r->second; ++i) {
    const double dt = static_cast<double>(t[i + 1] - t[i]);
    if (dt <= 0) continue;
    best = std::max(best, std::fabs((v[i + 1] - v[i]) / dt));
  }
  return best;
}

}  // namespace construe
