#ifndef CONSTRUE_MODEL_HPP
#define CONSTRUE_MODEL_HPP

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "construe/time_types.hpp"
#include "construe/values.hpp"

namespace construe {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AttributeDecl {
  std::string name;
  ValueDomain domain = Unconstrained{};
};

// A named process type that can be instantiated by observations. Interval
// observables carry begin/end times; instantaneous ones a single time point.
struct Observable {
  std::string id;
  std::string process;
  std::vector<AttributeDecl> attributes;
  bool instantaneous = false;

  const AttributeDecl* find_attribute(const std::string& name) const;
};

// A valued, time-anchored instance of an observable. Attribute values may be
// absent (unvalued).
struct Observation {
  std::string observable;
  std::map<std::string, Value> values;
  TimeMs t_begin = 0;
  TimeMs t_end = 0;
};

// Strict total order on observations: begin time, end time, observable name.
bool obs_less(const Observation& a, const Observation& b);

// Declared generalization (is_a) and exclusion relations between observables.
// The is_a relation is stored with its reflexive-transitive closure; the
// exclusion relation with its symmetric-transitive closure, both materialized
// at load time.
class RelationTable {
 public:
  void declare_observable(const Observable& q);
  bool has_observable(const std::string& id) const;
  const Observable& observable(const std::string& id) const;
  std::vector<std::string> observable_ids() const;

  // Declares `specific isa general`; validates the attribute-subset and
  // domain-inclusion conditions of the generalization relation.
  void declare_is_a(const std::string& specific, const std::string& general);
  void declare_excludes(const std::string& a, const std::string& b);

  // Closes both relations. Exclusion pairs added by transitive closure beyond
  // the declared ones are reported as lint warnings.
  void finalize();

  bool is_a(const std::string& specific, const std::string& general) const;
  bool mutually_exclusive(const std::string& a, const std::string& b) const;

  // All declared observables q' with q' is_a q (includes q itself).
  std::vector<std::string> specializations_of(const std::string& q) const;

  const std::vector<std::string>& lint_warnings() const { return lint_; }

 private:
  void require_known(const std::string& id) const;

  std::map<std::string, Observable> observables_;
  std::vector<std::string> order_;  // declaration order
  std::set<std::pair<std::string, std::string>> is_a_declared_;
  std::set<std::pair<std::string, std::string>> is_a_closure_;
  std::set<std::pair<std::string, std::string>> excl_declared_;
  std::set<std::pair<std::string, std::string>> excl_closure_;
  std::vector<std::string> lint_;
  bool finalized_ = false;
};

// Index of an observation in an ObservationSequence.
using ObsIndex = std::size_t;

// A sequence of observations sorted under obs_less, with a per-observable
// index. Observations of the same observable must not overlap; violating
// inserts are rejected.
class ObservationSequence {
 public:
  explicit ObservationSequence(const RelationTable* rel = nullptr) : rel_(rel) {}

  // Inserts keeping the sequence sorted. Throws ModelError on a same-observable
  // overlap, an unknown observable, a value outside its declared domain, or an
  // instantaneous observable with t_begin != t_end.
  ObsIndex insert(Observation o);

  std::size_t size() const { return obs_.size(); }
  bool empty() const { return obs_.empty(); }
  const Observation& at(ObsIndex i) const { return obs_.at(i); }

  // Successor of obs_[i] within the q-sequence of its own observable.
  std::optional<ObsIndex> q_succ(ObsIndex i) const;
  std::optional<ObsIndex> q_pred(ObsIndex i) const;

  // Indices of all observations of observable q, in sequence order.
  const std::vector<ObsIndex>& q_sequence(const std::string& q) const;

  // All indices in obs_less order.
  std::vector<ObsIndex> ordered_indices() const;

 private:
  void validate(const Observation& o) const;

  const RelationTable* rel_;
  std::vector<Observation> obs_;           // insertion-ordered storage
  std::vector<ObsIndex> sorted_;           // indices in obs_less order
  std::map<std::string, std::vector<ObsIndex>> by_observable_;
  static const std::vector<ObsIndex> kEmpty;
};

}  // namespace construe

#endif
