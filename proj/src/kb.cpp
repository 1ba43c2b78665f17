#include "construe/kb.hpp"

#include <algorithm>

namespace construe {

std::vector<std::size_t> AbstractionGrammar::productions_from(
    const std::string& nt) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < productions.size(); ++i)
    if (productions[i].lhs == nt && !productions[i].is_lambda())
      out.push_back(i);
  return out;
}

std::vector<std::size_t> AbstractionGrammar::productions_into(
    const std::string& nt) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < productions.size(); ++i)
    if (productions[i].rhs_nonterminal == nt) out.push_back(i);
  return out;
}

std::optional<std::size_t> AbstractionGrammar::lambda_from(
    const std::string& nt) const {
  for (std::size_t i = 0; i < productions.size(); ++i)
    if (productions[i].lhs == nt && productions[i].is_lambda()) return i;
  return std::nullopt;
}

std::set<std::string> AbstractionGrammar::terminals() const {
  std::set<std::string> out;
  for (const auto& p : productions)
    if (!p.is_lambda()) out.insert(p.terminal);
  return out;
}

std::set<std::string> AbstractionGrammar::nonterminals() const {
  std::set<std::string> out{"H"};
  for (const auto& p : productions) {
    out.insert(p.lhs);
    if (p.rhs_nonterminal) out.insert(*p.rhs_nonterminal);
  }
  return out;
}

void ProcedureRegistry::register_predicate(const std::string& name,
                                           PredicateFn fn) {
  predicates_[name] = std::move(fn);
}
void ProcedureRegistry::register_theta(const std::string& name, ThetaFn fn) {
  thetas_[name] = std::move(fn);
}
void ProcedureRegistry::register_detector(const std::string& name,
                                          DetectorFn fn) {
  detectors_[name] = std::move(fn);
}
bool ProcedureRegistry::has_predicate(const std::string& name) const {
  return predicates_.count(name) > 0;
}
bool ProcedureRegistry::has_theta(const std::string& name) const {
  return thetas_.count(name) > 0;
}
bool ProcedureRegistry::has_detector(const std::string& name) const {
  return detectors_.count(name) > 0;
}
const PredicateFn& ProcedureRegistry::predicate(const std::string& name) const {
  auto it = predicates_.find(name);
  if (it == predicates_.end()) throw KbError("unknown predicate: " + name);
  return it->second;
}
const ThetaFn& ProcedureRegistry::theta(const std::string& name) const {
  auto it = thetas_.find(name);
  if (it == thetas_.end())
    throw KbError("unknown observation procedure: " + name);
  return it->second;
}
const DetectorFn& ProcedureRegistry::detector(const std::string& name) const {
  auto it = detectors_.find(name);
  if (it == detectors_.end()) throw KbError("unknown detector: " + name);
  return it->second;
}

std::optional<std::size_t> KnowledgeBase::grammar_by_id(
    const std::string& id) const {
  for (std::size_t i = 0; i < grammars.size(); ++i)
    if (grammars[i].id == id) return i;
  return std::nullopt;
}

void KnowledgeBase::validate_grammar(const AbstractionGrammar& g) const {
  if (!relations.has_observable(g.hypothesis))
    throw KbError("grammar " + g.id + " hypothesizes unknown observable " +
                  g.hypothesis);
  for (const auto& s : g.salient)
    if (!relations.has_observable(s))
      throw KbError("grammar " + g.id + ": unknown salient observable " + s);
  if (g.detector && !procedures.has_detector(*g.detector))
    throw KbError("grammar " + g.id + ": unknown detector " + *g.detector);
  if (g.productions.empty()) {
    if (!g.detector)
      throw KbError("grammar " + g.id +
                    " has no productions and no detector");
    return;
  }
  for (const auto& p : g.productions) {
    if (p.rhs_nonterminal && *p.rhs_nonterminal == "H")
      throw KbError("grammar " + g.id +
                    ": H cannot appear on a right-hand side");
    if (p.lhs == "H" && (p.is_lambda() || !p.rhs_nonterminal))
      throw KbError("grammar " + g.id +
                    ": productions from H must take the form H -> q D");
    if (!p.is_lambda() && !relations.has_observable(p.terminal))
      throw KbError("grammar " + g.id + ": unknown terminal observable " +
                    p.terminal);
    if (p.theta && !procedures.has_theta(*p.theta))
      throw KbError("grammar " + g.id + ": unknown observation procedure " +
                    *p.theta);
    for (const auto& pr : p.predicates)
      if (!procedures.has_predicate(pr.name))
        throw KbError("grammar " + g.id + ": unknown predicate " + pr.name);
    // prev references require a possible chain predecessor
    if (p.lhs == "H") {
      auto mentions_prev = [](const TimeTermSpec& t) {
        return t.entity == EntityRef::Prev;
      };
      for (const auto& c : p.temporal)
        if (mentions_prev(c.a) || (c.b && mentions_prev(*c.b)))
          throw KbError("grammar " + g.id +
                        ": production from H references prev");
      for (const auto& pr : p.predicates)
        for (const auto& a : pr.args)
          if (std::holds_alternative<EntityRef>(a) &&
              std::get<EntityRef>(a) == EntityRef::Prev)
            throw KbError("grammar " + g.id +
                          ": production from H references prev");
    }
  }
  // Reachability of nonterminals from H.
  std::set<std::string> reachable{"H"};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& p : g.productions)
      if (reachable.count(p.lhs) && p.rhs_nonterminal &&
          !reachable.count(*p.rhs_nonterminal)) {
        reachable.insert(*p.rhs_nonterminal);
        grew = true;
      }
  }
  for (const auto& nt : g.nonterminals())
    if (!reachable.count(nt))
      throw KbError("grammar " + g.id + ": unreachable nonterminal " + nt);
  // Productivity: every reachable nonterminal can derive a closed pattern.
  std::set<std::string> productive;
  for (const auto& p : g.productions)
    if (p.closes()) productive.insert(p.lhs);
  grew = true;
  while (grew) {
    grew = false;
    for (const auto& p : g.productions)
      if (p.rhs_nonterminal && productive.count(*p.rhs_nonterminal) &&
          !productive.count(p.lhs)) {
        productive.insert(p.lhs);
        grew = true;
      }
  }
  for (const auto& nt : reachable)
    if (!productive.count(nt))
      throw KbError("grammar " + g.id + ": nonterminal " + nt +
                    " cannot derive a complete pattern");
}

void KnowledgeBase::finalize() {
  relations.finalize();
  abstracts_.clear();
  std::set<std::string> grammar_ids;
  for (const auto& g : grammars) {
    if (!grammar_ids.insert(g.id).second)
      throw KbError("duplicate grammar id: " + g.id);
    validate_grammar(g);
    for (const auto& p : g.productions)
      if (!p.is_lambda() && p.abstracted)
        abstracts_.insert({p.terminal, g.hypothesis});
  }
  // Acyclicity of the abstraction relation (Def. 9, condition 3).
  std::set<std::pair<std::string, std::string>> closure = abstracts_;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& a : std::set<std::pair<std::string, std::string>>(closure))
      for (const auto& b : closure)
        if (a.second == b.first && closure.insert({a.first, b.second}).second)
          grew = true;
  }
  for (const auto& [x, y] : closure)
    if (x == y) throw KbError("cyclic abstraction relation involving " + x);

  abstractable_cache_.clear();
  std::set<std::string> domain;
  for (const auto& [qi, qj] : abstracts_) domain.insert(qi);
  for (const auto& q : relations.observable_ids())
    for (const auto& d : domain)
      if (relations.is_a(q, d)) {
        abstractable_cache_.insert(q);
        break;
      }
  finalized_ = true;
}

bool KnowledgeBase::abstracts(const std::string& qi,
                              const std::string& qj) const {
  return abstracts_.count({qi, qj}) > 0;
}

bool KnowledgeBase::abstractable(const std::string& q) const {
  return abstractable_cache_.count(q) > 0;
}

int KnowledgeBase::default_k() const {
  int best = 0;
  for (const auto& q : relations.observable_ids()) {
    int n = 0;
    for (const auto& [qi, qj] : abstracts_)
      if (qi == q) ++n;
    best = std::max(best, n);
  }
  return best;
}

}  // namespace construe
