#include "construe/stn.hpp"

#include <algorithm>

namespace construe {

TemporalNetwork::TemporalNetwork() {
  names_.push_back("$origin");
  dist_.assign(1, 0);
}

VarId TemporalNetwork::add_variable(std::string name, TimeInterval domain) {
  const std::size_t n = names_.size();
  std::vector<TimeMs> next((n + 1) * (n + 1), kTimeInf);
  for (VarId i = 0; i < n; ++i)
    for (VarId j = 0; j < n; ++j) next[i * (n + 1) + j] = dcell(i, j);
  names_.push_back(std::move(name));
  dist_ = std::move(next);
  const VarId v = n;
  d(v, v) = 0;
  // domain bounds against the origin: x - z <= hi, z - x <= -lo
  d(0, v) = domain.hi >= kTimeInf ? kTimeInf : domain.hi;
  d(v, 0) = domain.lo <= -kTimeInf ? kTimeInf : -domain.lo;
  closed_ = false;
  return v;
}

void TemporalNetwork::add_difference(const DifferenceSpec& c) {
  constraints_.push_back(c);
  // x - y <= hi  -> edge y -> x with weight hi
  if (c.hi < kTimeInf) d(c.y, c.x) = std::min(dcell(c.y, c.x), c.hi);
  // y - x <= -lo -> edge x -> y with weight -lo
  if (c.lo > -kTimeInf) d(c.x, c.y) = std::min(dcell(c.x, c.y), -c.lo);
  closed_ = false;
  // If the next propagate fails, the most recent tagged constraint is the
  // best available culprit.
  if (!c.tag.empty()) pending_tag_ = c.tag;
}

bool TemporalNetwork::propagate() {
  if (!consistent_) return false;
  const std::size_t n = names_.size();
  for (VarId k = 0; k < n; ++k) {
    for (VarId i = 0; i < n; ++i) {
      const TimeMs dik = dcell(i, k);
      if (dik >= kTimeInf) continue;
      for (VarId j = 0; j < n; ++j) {
        const TimeMs w = sat_add(dik, dcell(k, j));
        if (w < dcell(i, j)) d(i, j) = w;
      }
    }
  }
  for (VarId i = 0; i < n; ++i) {
    if (dcell(i, i) < 0) {
      consistent_ = false;
      conflict_tag_ = pending_tag_;
      return false;
    }
  }
  closed_ = true;
  return true;
}

bool TemporalNetwork::tighten_edge(VarId i, VarId j, TimeMs w,
                                   const std::string& tag) {
  if (w >= dcell(i, j)) return consistent_;
  d(i, j) = w;
  if (!tag.empty()) pending_tag_ = tag;
  return propagate();
}

bool TemporalNetwork::bind(VarId v, TimeMs t) {
  return restrict_domain(v, {t, t});
}

bool TemporalNetwork::restrict_domain(VarId v, TimeInterval dom) {
  if (!consistent_) return false;
  if (!closed_ && !propagate()) return false;
  const TimeInterval cur = domain(v);
  const TimeInterval next{std::max(cur.lo, dom.lo), std::min(cur.hi, dom.hi)};
  if (next.empty()) {
    consistent_ = false;
    conflict_tag_ = "domain(" + names_[v] + ")";
    return false;
  }
  if (next == cur) return true;
  bool ok = tighten_edge(0, v, next.hi >= kTimeInf ? kTimeInf : next.hi,
                         "domain(" + names_[v] + ")");
  if (!ok) return false;
  return tighten_edge(v, 0, next.lo <= -kTimeInf ? kTimeInf : -next.lo,
                      "domain(" + names_[v] + ")");
}

TimeInterval TemporalNetwork::domain(VarId v) const {
  TimeInterval out;
  const TimeMs hi = dcell(0, v);
  const TimeMs lo = dcell(v, 0);
  out.hi = hi >= kTimeInf ? kTimeInf : hi;
  out.lo = lo >= kTimeInf ? -kTimeInf : -lo;
  return out;
}

bool TemporalNetwork::is_bound(VarId v) const {
  const TimeInterval dom = domain(v);
  return dom.lo == dom.hi;
}

}  // namespace construe
