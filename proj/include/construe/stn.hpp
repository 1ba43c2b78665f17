#ifndef CONSTRUE_STN_HPP
#define CONSTRUE_STN_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "construe/time_types.hpp"

namespace construe {

using VarId = std::size_t;

// lo <= x - y <= hi
struct DifferenceSpec {
  VarId x = 0;
  VarId y = 0;
  TimeMs lo = -kTimeInf;
  TimeMs hi = kTimeInf;
  std::string tag;  // constraint id carried into failure reports
};

// Simple temporal network over interval-valued variables. Variable 0 is the
// fixed origin (domain [0,0]); unary domain bounds are differences against it.
// Propagation computes the min/+ closure of the distance matrix, so after a
// consistent propagate() every variable domain is minimal.
//
// Networks are small (pattern-sized); the all-pairs closure is recomputed on
// each propagate call.
class TemporalNetwork {
 public:
  TemporalNetwork();

  VarId add_variable(std::string name, TimeInterval domain = {});
  std::size_t size() const { return names_.size(); }
  const std::string& name(VarId v) const { return names_.at(v); }

  // Conjoins lo <= x - y <= hi. Does not propagate.
  void add_difference(const DifferenceSpec& c);

  // Collapses the variable to [t, t] and propagates incrementally.
  // Returns false (and marks the network inconsistent) on an empty domain.
  bool bind(VarId v, TimeMs t);

  // Narrows a variable's domain and propagates. Returns false on conflict.
  bool restrict_domain(VarId v, TimeInterval dom);

  // Recomputes the full closure. Returns false iff inconsistent.
  bool propagate();

  bool consistent() const { return consistent_; }
  TimeInterval domain(VarId v) const;
  bool is_bound(VarId v) const;

  // On an inconsistent network: the tag of the constraint whose insertion
  // produced the first negative cycle, when known.
  const std::string& conflict_tag() const { return conflict_tag_; }

 private:
  TimeMs& d(VarId i, VarId j) { return dist_[i * names_.size() + j]; }
  TimeMs dcell(VarId i, VarId j) const { return dist_[i * names_.size() + j]; }
  bool tighten_edge(VarId i, VarId j, TimeMs w, const std::string& tag);

  std::vector<std::string> names_;
  std::vector<TimeMs> dist_;  // dist_[i][j] = tightest bound on x_j - x_i
  std::vector<DifferenceSpec> constraints_;
  bool consistent_ = true;
  bool closed_ = true;  // distance matrix currently equals its closure
  std::string conflict_tag_;
  std::string pending_tag_;
};

}  // namespace construe

#endif
