#include "construe/model.hpp"

#include <algorithm>
#include <functional>

namespace construe {

const std::vector<ObsIndex> ObservationSequence::kEmpty = {};

const AttributeDecl* Observable::find_attribute(const std::string& name) const {
  for (const auto& a : attributes)
    if (a.name == name) return &a;
  return nullptr;
}

bool obs_less(const Observation& a, const Observation& b) {
  if (a.t_begin != b.t_begin) return a.t_begin < b.t_begin;
  if (a.t_end != b.t_end) return a.t_end < b.t_end;
  return a.observable < b.observable;
}

void RelationTable::declare_observable(const Observable& q) {
  if (observables_.count(q.id))
    throw ModelError("duplicate observable id: " + q.id);
  std::set<std::string> names;
  for (const auto& a : q.attributes)
    if (!names.insert(a.name).second)
      throw ModelError("duplicate attribute '" + a.name + "' in observable " +
                       q.id);
  observables_.emplace(q.id, q);
  order_.push_back(q.id);
}

bool RelationTable::has_observable(const std::string& id) const {
  return observables_.count(id) > 0;
}

const Observable& RelationTable::observable(const std::string& id) const {
  auto it = observables_.find(id);
  if (it == observables_.end()) throw ModelError("unknown observable: " + id);
  return it->second;
}

std::vector<std::string> RelationTable::observable_ids() const {
  return order_;
}

void RelationTable::require_known(const std::string& id) const {
  if (!observables_.count(id)) throw ModelError("unknown observable: " + id);
}

void RelationTable::declare_is_a(const std::string& specific,
                                 const std::string& general) {
  require_known(specific);
  require_known(general);
  if (specific == general) return;  // reflexive, nothing to record
  const Observable& s = observable(specific);
  const Observable& g = observable(general);
  // q generalizes q' iff attributes(q) <= attributes(q') with nested domains.
  for (const auto& ga : g.attributes) {
    const AttributeDecl* sa = s.find_attribute(ga.name);
    if (!sa)
      throw ModelError("isa " + specific + " " + general + ": attribute '" +
                       ga.name + "' of the general observable is missing");
    if (!domain_included(sa->domain, ga.domain))
      throw ModelError("isa " + specific + " " + general + ": domain of '" +
                       ga.name + "' is not included in the general domain");
  }
  is_a_declared_.insert({specific, general});
}

void RelationTable::declare_excludes(const std::string& a,
                                     const std::string& b) {
  require_known(a);
  require_known(b);
  if (a == b) throw ModelError("observable cannot exclude itself: " + a);
  excl_declared_.insert({std::min(a, b), std::max(a, b)});
}

void RelationTable::finalize() {
  // Transitive closure of is_a; cycles beyond reflexivity are rejected.
  is_a_closure_ = is_a_declared_;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : std::set<std::pair<std::string, std::string>>(
             is_a_closure_)) {
      for (const auto& q : is_a_closure_) {
        if (p.second == q.first) {
          if (p.first == q.second)
            throw ModelError("cyclic generalization involving " + p.first);
          if (is_a_closure_.insert({p.first, q.second}).second) changed = true;
        }
      }
    }
  }
  // Symmetric-transitive closure of exclusion (connected components).
  std::map<std::string, std::string> parent;
  for (const auto& id : order_) parent[id] = id;
  std::function<std::string(const std::string&)> find =
      [&](const std::string& x) -> std::string {
    std::string r = x;
    while (parent[r] != r) r = parent[r];
    return r;
  };
  for (const auto& [a, b] : excl_declared_) parent[find(a)] = find(b);
  std::map<std::string, std::vector<std::string>> comps;
  for (const auto& id : order_) comps[find(id)].push_back(id);
  excl_closure_.clear();
  for (const auto& [root, members] : comps) {
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        auto pair = std::make_pair(std::min(members[i], members[j]),
                                   std::max(members[i], members[j]));
        excl_closure_.insert(pair);
        if (!excl_declared_.count(pair))
          lint_.push_back("exclusion closure adds undeclared pair (" +
                          pair.first + ", " + pair.second + ")");
      }
  }
  finalized_ = true;
}

bool RelationTable::is_a(const std::string& specific,
                         const std::string& general) const {
  require_known(specific);
  require_known(general);
  if (specific == general) return true;
  return is_a_closure_.count({specific, general}) > 0;
}

bool RelationTable::mutually_exclusive(const std::string& a,
                                       const std::string& b) const {
  require_known(a);
  require_known(b);
  if (a == b) return false;
  return excl_closure_.count({std::min(a, b), std::max(a, b)}) > 0;
}

std::vector<std::string> RelationTable::specializations_of(
    const std::string& q) const {
  require_known(q);
  std::vector<std::string> out;
  for (const auto& id : order_)
    if (is_a(id, q)) out.push_back(id);
  return out;
}

void ObservationSequence::validate(const Observation& o) const {
  if (o.t_begin > o.t_end)
    throw ModelError("observation of " + o.observable + " has t_begin > t_end");
  if (rel_) {
    const Observable& q = rel_->observable(o.observable);
    if (q.instantaneous && o.t_begin != o.t_end)
      throw ModelError("instantaneous observable " + o.observable +
                       " requires t_begin == t_end");
    for (const auto& [name, v] : o.values) {
      const AttributeDecl* a = q.find_attribute(name);
      if (!a)
        throw ModelError("observable " + o.observable +
                         " has no attribute '" + name + "'");
      if (!domain_admits(a->domain, v))
        throw ModelError("value of '" + name + "' outside declared domain of " +
                         o.observable);
    }
  }
}

ObsIndex ObservationSequence::insert(Observation o) {
  validate(o);
  auto& qseq = by_observable_[o.observable];
  for (ObsIndex i : qseq) {
    const Observation& e = obs_[i];
    if (!(o.t_end < e.t_begin || e.t_end < o.t_begin))
      throw ModelError("overlapping observations of " + o.observable + " at [" +
                       format_time(o.t_begin) + "," + format_time(o.t_end) +
                       "]");
  }
  const ObsIndex idx = obs_.size();
  obs_.push_back(std::move(o));
  const Observation& stored = obs_.back();

  auto pos = std::lower_bound(sorted_.begin(), sorted_.end(), idx,
                              [&](ObsIndex a, ObsIndex b) {
                                return obs_less(obs_[a], obs_[b]);
                              });
  sorted_.insert(pos, idx);

  auto qpos = std::lower_bound(qseq.begin(), qseq.end(), idx,
                               [&](ObsIndex a, ObsIndex b) {
                                 return obs_less(obs_[a], obs_[b]);
                               });
  qseq.insert(qpos, idx);
  (void)stored;
  return idx;
}

std::optional<ObsIndex> ObservationSequence::q_succ(ObsIndex i) const {
  if (i >= obs_.size()) throw ModelError("q_succ: index out of range");
  const auto& qseq = by_observable_.at(obs_[i].observable);
  auto it = std::find(qseq.begin(), qseq.end(), i);
  if (it == qseq.end()) throw ModelError("q_succ: observation not in sequence");
  ++it;
  if (it == qseq.end()) return std::nullopt;
  return *it;
}

std::optional<ObsIndex> ObservationSequence::q_pred(ObsIndex i) const {
  if (i >= obs_.size()) throw ModelError("q_pred: index out of range");
  const auto& qseq = by_observable_.at(obs_[i].observable);
  auto it = std::find(qseq.begin(), qseq.end(), i);
  if (it == qseq.end()) throw ModelError("q_pred: observation not in sequence");
  if (it == qseq.begin()) return std::nullopt;
  return *(--it);
}

const std::vector<ObsIndex>& ObservationSequence::q_sequence(
    const std::string& q) const {
  auto it = by_observable_.find(q);
  if (it == by_observable_.end()) return kEmpty;
  return it->second;
}

std::vector<ObsIndex> ObservationSequence::ordered_indices() const {
  return sorted_;
}

}  // namespace construe
