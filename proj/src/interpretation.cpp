#include "construe/interpretation.hpp"

#include <algorithm>
#include <sstream>

namespace construe {

namespace {

std::string interval_str(TimeInterval iv) {
  return "[" + format_time(iv.lo) + "," + format_time(iv.hi) + "]";
}

}  // namespace

std::vector<std::size_t> Hypothesis::slots_in_chain_order() const {
  std::vector<std::size_t> out;
  out.reserve(chain.size());
  for (const auto& s : chain) out.push_back(s.slot);
  return out;
}

void InterpretationProblem::finalize_attention(bool salient_first) {
  attention_order = observations.ordered_indices();
  if (!salient_first) return;
  std::set<std::string> salient;
  for (const auto& g : kb.grammars)
    for (const auto& s : g.salient) salient.insert(s);
  if (salient.empty()) return;
  std::stable_partition(attention_order.begin(), attention_order.end(),
                        [&](ObsIndex i) {
                          const auto& q = observations.at(i).observable;
                          for (const auto& s : salient)
                            if (kb.relations.is_a(q, s)) return true;
                          return false;
                        });
}

int compare_heuristic(const HeuristicVector& a, const HeuristicVector& b) {
  // 1 - sigma as exact rationals: (den-cov)/den, den==0 treated as 0/1.
  const std::int64_t an = a.abstractable == 0 ? 0 : a.abstractable - a.covered;
  const std::int64_t ad = a.abstractable == 0 ? 1 : a.abstractable;
  const std::int64_t bn = b.abstractable == 0 ? 0 : b.abstractable - b.covered;
  const std::int64_t bd = b.abstractable == 0 ? 1 : b.abstractable;
  const std::int64_t lhs = an * bd;
  const std::int64_t rhs = bn * ad;
  if (lhs != rhs) return lhs < rhs ? -1 : 1;
  if (a.complexity != b.complexity) return a.complexity < b.complexity ? -1 : 1;
  return 0;
}

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::Root: return "ROOT";
    case OpKind::Abduce: return "ABDUCE";
    case OpKind::Deduce: return "DEDUCE";
    case OpKind::Subsume: return "SUBSUME";
    case OpKind::Predict: return "PREDICT";
    case OpKind::Advance: return "ADVANCE";
  }
  return "?";
}

Interpretation Interpretation::root(
    std::shared_ptr<const InterpretationProblem> ip) {
  Interpretation out;
  out.ip_ = std::move(ip);
  out.delta.op = OpKind::Root;
  if (!out.ip_->attention_order.empty()) {
    out.focus_.push_back(ObsRef{ObsRef::Kind::Initial,
                                out.ip_->attention_order.front()});
    out.refill_pos_ = 1;
  }
  return out;
}

std::string Interpretation::obs_observable(ObsRef o) const {
  if (o.kind == ObsRef::Kind::Initial)
    return ip_->observations.at(o.index).observable;
  return guessed_.at(o.index).observable;
}

TimeInterval Interpretation::obs_begin(ObsRef o) const {
  if (o.kind == ObsRef::Kind::Initial) {
    const TimeMs t = ip_->observations.at(o.index).t_begin;
    return {t, t};
  }
  return net_.domain(guessed_.at(o.index).var_begin);
}

TimeInterval Interpretation::obs_end(ObsRef o) const {
  if (o.kind == ObsRef::Kind::Initial) {
    const TimeMs t = ip_->observations.at(o.index).t_end;
    return {t, t};
  }
  return net_.domain(guessed_.at(o.index).var_end);
}

bool Interpretation::obs_bound(ObsRef o) const {
  return obs_begin(o).bound() && obs_end(o).bound();
}

const std::map<std::string, Value>& Interpretation::obs_values(ObsRef o) const {
  if (o.kind == ObsRef::Kind::Initial)
    return ip_->observations.at(o.index).values;
  return guessed_.at(o.index).values;
}

std::optional<std::size_t> Interpretation::hypothesis_of(ObsRef o) const {
  if (o.kind != ObsRef::Kind::Guessed) return std::nullopt;
  return guessed_.at(o.index).hyp_index;
}

bool Interpretation::is_abstracted(ObsRef o) const {
  for (const auto& h : hyps_)
    for (const auto& s : h.slots)
      if (s.abstracted && s.matched && *s.matched == o) return true;
  return false;
}

std::set<ObsRef> Interpretation::abstracted_by(std::size_t hyp) const {
  std::set<ObsRef> out;
  for (const auto& s : hyps_.at(hyp).slots)
    if (s.abstracted && s.matched) out.insert(*s.matched);
  return out;
}

std::set<ObsRef> Interpretation::environment_of(std::size_t hyp) const {
  std::set<ObsRef> out;
  for (const auto& s : hyps_.at(hyp).slots)
    if (!s.abstracted && s.matched) out.insert(*s.matched);
  return out;
}

std::set<ObsRef> Interpretation::evidence_of(std::size_t hyp) const {
  std::set<ObsRef> out = abstracted_by(hyp);
  const std::set<ObsRef> env = environment_of(hyp);
  out.insert(env.begin(), env.end());
  return out;
}

std::set<ObsRef> Interpretation::abstracted_by_all() const {
  std::set<ObsRef> out;
  for (std::size_t i = 0; i < hyps_.size(); ++i) {
    const auto s = abstracted_by(i);
    out.insert(s.begin(), s.end());
  }
  return out;
}

bool Interpretation::hypothesis_complete(std::size_t hyp) const {
  const Hypothesis& h = hyps_.at(hyp);
  if (h.detector_backed) return true;
  if (h.chain.empty()) return false;
  const AbstractionGrammar& g = kb().grammar(h.grammar_index);
  const bool closable =
      h.closed() || (h.right_nt && g.lambda_from(*h.right_nt).has_value());
  if (!closable) return false;
  for (const auto& s : h.slots) {
    if (!s.matched) return false;
    if (!net_.domain(s.var_begin).bound() || !net_.domain(s.var_end).bound())
      return false;
  }
  return true;
}

bool Interpretation::all_hypotheses_complete() const {
  for (std::size_t i = 0; i < hyps_.size(); ++i)
    if (!hypothesis_complete(i)) return false;
  return true;
}

HeuristicVector Interpretation::heuristic() const {
  HeuristicVector hv;
  hv.complexity = static_cast<std::int64_t>(guessed_.size());
  const std::set<ObsRef> abstracted = abstracted_by_all();
  for (std::size_t i = 0; i < ip_->observations.size(); ++i) {
    const ObsRef r{ObsRef::Kind::Initial, i};
    if (!kb().abstractable(obs_observable(r))) continue;
    ++hv.abstractable;
    if (abstracted.count(r)) ++hv.covered;
  }
  for (std::size_t i = 0; i < guessed_.size(); ++i) {
    const ObsRef r{ObsRef::Kind::Guessed, i};
    if (!kb().abstractable(obs_observable(r))) continue;
    ++hv.abstractable;
    if (abstracted.count(r)) ++hv.covered;
  }
  return hv;
}

std::vector<ObsIndex> Interpretation::unexplained_initial() const {
  std::vector<ObsIndex> out;
  const std::set<ObsRef> abstracted = abstracted_by_all();
  for (std::size_t i = 0; i < ip_->observations.size(); ++i) {
    const ObsRef r{ObsRef::Kind::Initial, i};
    if (!abstracted.count(r)) out.push_back(i);
  }
  return out;
}

// --- Pattern instantiation ---------------------------------------------------

VarId Interpretation::ensure_hyp_vars(Hypothesis& h) {
  GuessedObs& g = guessed_.at(h.o_h);
  if (g.var_begin == 0) {
    const bool instant = kb().relations.observable(g.observable).instantaneous;
    g.var_begin = net_.add_variable("h" + std::to_string(h.o_h) + ".b");
    g.var_end = instant ? g.var_begin
                        : net_.add_variable("h" + std::to_string(h.o_h) + ".e");
    if (!instant)
      net_.add_difference({g.var_end, g.var_begin, 0, kTimeInf, "h:duration"});
  }
  return g.var_begin;
}

ResolvedEntity Interpretation::resolve_entity(
    const Hypothesis& h, EntityRef e, std::optional<std::size_t> this_slot,
    std::optional<std::size_t> prev_slot) const {
  ResolvedEntity out;
  VarId vb = 0, ve = 0;
  if (e == EntityRef::Hypothesis) {
    const GuessedObs& g = guessed_.at(h.o_h);
    vb = g.var_begin;
    ve = g.var_end;
    out.values = g.values;
  } else {
    const std::size_t idx = e == EntityRef::This ? *this_slot : *prev_slot;
    const FindingSlot& s = h.slots.at(idx);
    vb = s.var_begin;
    ve = s.var_end;
    out.values = s.values;
  }
  out.begin = net_.domain(vb);
  out.end = net_.domain(ve);
  out.bound = out.begin.bound() && out.end.bound();
  return out;
}

bool Interpretation::add_spec_constraint(Hypothesis& h,
                                         const TemporalConstraintSpec& spec,
                                         std::size_t this_slot,
                                         std::optional<std::size_t> prev_slot,
                                         const std::string& label,
                                         MatchFailure* why) {
  auto var_of = [&](const TimeTermSpec& t) -> VarId {
    auto pick = [&](VarId b, VarId e, bool instant) -> VarId {
      switch (t.field) {
        case TimeField::Begin: return b;
        case TimeField::End: return e;
        case TimeField::Point:
          if (!instant)
            throw KbError("'.t' referenced on an interval entity (" + label +
                          ")");
          return b;
      }
      return b;
    };
    if (t.entity == EntityRef::Hypothesis) {
      const GuessedObs& g = guessed_.at(h.o_h);
      const bool instant =
          kb().relations.observable(g.observable).instantaneous;
      return pick(g.var_begin, g.var_end, instant);
    }
    const std::size_t idx =
        t.entity == EntityRef::This ? this_slot : *prev_slot;
    const FindingSlot& s = h.slots.at(idx);
    return pick(s.var_begin, s.var_end, s.instantaneous);
  };

  const VarId a = var_of(spec.a);
  const VarId b = spec.b ? var_of(*spec.b) : 0;  // 0 = origin for absolutes
  net_.add_difference({a, b, spec.lo, spec.hi, label});

  // Findings whose time is pinned to an absolute instant are exempt from the
  // basic-periodicity rule (their positions are forced by the pattern).
  if (!spec.b && spec.lo == spec.hi) {
    if (spec.a.entity == EntityRef::This)
      h.slots.at(this_slot).abs_pinned = true;
    else if (spec.a.entity == EntityRef::Prev && prev_slot)
      h.slots.at(*prev_slot).abs_pinned = true;
  }
  (void)why;
  return true;
}

bool Interpretation::instantiate_block(Hypothesis& h, std::size_t chain_pos,
                                       bool include_prev_refs,
                                       MatchFailure* why) {
  const AbstractionGrammar& g = kb().grammar(h.grammar_index);
  const ChainStep& step = h.chain.at(chain_pos);
  const Production& p = g.productions.at(step.production);
  const std::optional<std::size_t> prev_slot =
      chain_pos > 0 ? std::optional(h.chain[chain_pos - 1].slot) : std::nullopt;

  auto mentions_prev = [](const TemporalConstraintSpec& c) {
    return c.a.entity == EntityRef::Prev ||
           (c.b && c.b->entity == EntityRef::Prev);
  };
  for (std::size_t ci = 0; ci < p.temporal.size(); ++ci) {
    const auto& c = p.temporal[ci];
    const bool needs_prev = mentions_prev(c);
    if (needs_prev && !prev_slot) {
      h.head_prev_pending = true;
      continue;
    }
    if (needs_prev && !include_prev_refs) continue;
    if (!needs_prev && include_prev_refs) continue;  // already added earlier
    const std::string label = g.id + ":" + p.lhs + ">" +
                              (p.terminal.empty() ? "~" : p.terminal) + ":" +
                              c.label;
    if (!add_spec_constraint(h, c, step.slot, prev_slot, label, why))
      return false;
  }
  return true;
}

bool Interpretation::inject_defaults(Hypothesis& h, std::size_t chain_pos,
                                     MatchFailure* why) {
  (void)why;
  const std::size_t slot_idx = h.chain.at(chain_pos).slot;
  FindingSlot& s = h.slots.at(slot_idx);

  // Increasing temporal order between chain-consecutive findings.
  if (chain_pos > 0) {
    const FindingSlot& prev = h.slots.at(h.chain[chain_pos - 1].slot);
    net_.add_difference(
        {s.var_begin, prev.var_begin, 0, kTimeInf, "default:order"});
  }
  if (chain_pos + 1 < h.chain.size()) {
    const FindingSlot& next = h.slots.at(h.chain[chain_pos + 1].slot);
    net_.add_difference(
        {next.var_begin, s.var_begin, 0, kTimeInf, "default:order"});
  }
  // Strict non-overlap between nearest same-observable findings.
  auto add_nonoverlap = [&](const FindingSlot& earlier,
                            const FindingSlot& later) {
    net_.add_difference({later.var_begin, earlier.var_end, 1, kTimeInf,
                         "default:nonoverlap"});
  };
  for (std::size_t i = chain_pos; i-- > 0;) {
    const FindingSlot& other = h.slots.at(h.chain[i].slot);
    if (other.observable == s.observable) {
      add_nonoverlap(other, s);
      break;
    }
  }
  for (std::size_t i = chain_pos + 1; i < h.chain.size(); ++i) {
    const FindingSlot& other = h.slots.at(h.chain[i].slot);
    if (other.observable == s.observable) {
      add_nonoverlap(s, other);
      break;
    }
  }
  // Temporal covering default for abstracted findings.
  if (s.abstracted) {
    const GuessedObs& g = guessed_.at(h.o_h);
    net_.add_difference(
        {s.var_begin, g.var_begin, 0, kTimeInf, "default:covering"});
    net_.add_difference(
        {g.var_end, s.var_end, 0, kTimeInf, "default:covering"});
  }
  return true;
}

std::optional<std::size_t> Interpretation::add_finding(
    Hypothesis& h, std::size_t production_index, bool at_front,
    MatchFailure* why) {
  const AbstractionGrammar& g = kb().grammar(h.grammar_index);
  const Production& p = g.productions.at(production_index);
  const Observable& q = kb().relations.observable(p.terminal);

  FindingSlot s;
  s.observable = p.terminal;
  s.abstracted = p.abstracted;
  s.instantaneous = q.instantaneous;
  const std::string vname =
      "m" + std::to_string(h.o_h) + "." + std::to_string(h.slots.size());
  s.var_begin = net_.add_variable(vname + ".b");
  s.var_end = s.instantaneous ? s.var_begin : net_.add_variable(vname + ".e");
  if (!s.instantaneous)
    net_.add_difference({s.var_end, s.var_begin, 0, kTimeInf, "m:duration"});
  h.slots.push_back(std::move(s));
  const std::size_t slot_idx = h.slots.size() - 1;

  std::size_t chain_pos;
  if (at_front) {
    h.chain.insert(h.chain.begin(), {production_index, slot_idx});
    chain_pos = 0;
  } else {
    h.chain.push_back({production_index, slot_idx});
    chain_pos = h.chain.size() - 1;
  }

  // The new step's own constraints (prev-refs deferred when it is the head).
  const bool had_pending = h.head_prev_pending;
  h.head_prev_pending = false;
  if (!instantiate_block(h, chain_pos, /*include_prev_refs=*/false, why))
    return std::nullopt;
  if (chain_pos > 0) {
    // A predecessor exists right away (appended mid-chain).
    if (!instantiate_block(h, chain_pos, /*include_prev_refs=*/true, why))
      return std::nullopt;
  }
  // Prepending gives the old head its predecessor: resolve its deferred refs.
  if (at_front && h.chain.size() > 1 && had_pending) {
    if (!instantiate_block(h, 1, /*include_prev_refs=*/true, why))
      return std::nullopt;
  }
  if (!inject_defaults(h, chain_pos, why)) return std::nullopt;

  // theta inheritance along the chain; the latest named procedure is active.
  h.active_theta.reset();
  for (const auto& step : h.chain) {
    const auto& th = g.productions[step.production].theta;
    if (th) h.active_theta = th;
  }
  return slot_idx;
}

// --- Matching ----------------------------------------------------------------

std::vector<ObsRef> Interpretation::merged_q_sequence(
    const std::string& observable) const {
  std::vector<ObsRef> out;
  for (const auto& q : kb().relations.specializations_of(observable))
    for (ObsIndex i : ip_->observations.q_sequence(q))
      out.push_back(ObsRef{ObsRef::Kind::Initial, i});
  for (std::size_t i = 0; i < guessed_.size(); ++i) {
    if (!kb().relations.is_a(guessed_[i].observable, observable)) continue;
    const ObsRef r{ObsRef::Kind::Guessed, i};
    if (obs_bound(r)) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [&](ObsRef a, ObsRef b) {
    const TimeMs ab = obs_begin(a).lo, bb = obs_begin(b).lo;
    if (ab != bb) return ab < bb;
    const TimeMs ae = obs_end(a).lo, be = obs_end(b).lo;
    if (ae != be) return ae < be;
    if (obs_observable(a) != obs_observable(b))
      return obs_observable(a) < obs_observable(b);
    return a < b;
  });
  return out;
}

bool Interpretation::periodicity_ok(std::size_t hyp, std::size_t slot,
                                    ObsRef o, MatchFailure* why) const {
  const Hypothesis& h = hyps_.at(hyp);
  const FindingSlot& s = h.slots.at(slot);
  std::size_t chain_pos = 0;
  for (std::size_t i = 0; i < h.chain.size(); ++i)
    if (h.chain[i].slot == slot) chain_pos = i;

  const std::vector<ObsRef> qseq = merged_q_sequence(s.observable);
  auto index_of = [&](ObsRef r) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < qseq.size(); ++i)
      if (qseq[i] == r) return i;
    return std::nullopt;
  };
  const auto oi = index_of(o);
  if (!oi) return true;  // unbound guessed observation; re-checked when bound

  // Nearest matched same-observable finding before/after in pattern order must
  // be assigned the q-consecutive observation.
  for (std::size_t i = chain_pos; i-- > 0;) {
    const FindingSlot& other = h.slots.at(h.chain[i].slot);
    if (other.observable != s.observable) continue;
    if (!other.matched) break;
    if (s.abs_pinned && other.abs_pinned) break;
    const auto pi = index_of(*other.matched);
    if (pi && *pi + 1 != *oi) {
      if (why) why->cause = "periodicity";
      return false;
    }
    break;
  }
  for (std::size_t i = chain_pos + 1; i < h.chain.size(); ++i) {
    const FindingSlot& other = h.slots.at(h.chain[i].slot);
    if (other.observable != s.observable) continue;
    if (!other.matched) break;
    if (s.abs_pinned && other.abs_pinned) break;
    const auto ni = index_of(*other.matched);
    if (ni && *oi + 1 != *ni) {
      if (why) why->cause = "periodicity";
      return false;
    }
    break;
  }
  return true;
}

bool Interpretation::exclusivity_ok(std::size_t hyp, ObsRef o,
                                    MatchFailure* why) const {
  const std::string& qh = guessed_.at(hyps_.at(hyp).o_h).observable;
  for (std::size_t i = 0; i < hyps_.size(); ++i) {
    if (i == hyp) continue;
    const std::string& qo = guessed_.at(hyps_[i].o_h).observable;
    if (!kb().relations.mutually_exclusive(qh, qo)) continue;
    if (abstracted_by(i).count(o)) {
      if (why) why->cause = "exclusivity";
      return false;
    }
  }
  return true;
}

bool Interpretation::check_predicates(MatchFailure* why) const {
  const EvalContext ctx{ip_->series.empty() ? nullptr : &ip_->series};
  for (const auto& h : hyps_) {
    const AbstractionGrammar& g = kb().grammar(h.grammar_index);
    for (std::size_t pos = 0; pos < h.chain.size(); ++pos) {
      const Production& p = g.productions[h.chain[pos].production];
      const std::optional<std::size_t> prev_slot =
          pos > 0 ? std::optional(h.chain[pos - 1].slot) : std::nullopt;
      for (const auto& ps : p.predicates) {
        bool resolvable = true;
        bool all_bound = true;
        std::vector<PredArg> args;
        for (const auto& a : ps.args) {
          if (std::holds_alternative<double>(a)) {
            args.push_back(std::get<double>(a));
          } else if (std::holds_alternative<std::string>(a)) {
            args.push_back(std::get<std::string>(a));
          } else {
            const EntityRef e = std::get<EntityRef>(a);
            if (e == EntityRef::Prev && !prev_slot) {
              resolvable = false;
              break;
            }
            ResolvedEntity re =
                resolve_entity(h, e, h.chain[pos].slot, prev_slot);
            if (!re.bound) all_bound = false;
            args.push_back(std::move(re));
          }
        }
        // Predicates are necessary conditions evaluated once every referenced
        // variable is assigned; partially bound scopes are skipped.
        if (!resolvable || !all_bound) continue;
        if (!kb().procedures.predicate(ps.name)(args, ctx)) {
          if (why) why->cause = "constraint:" + g.id + ":" + ps.label;
          return false;
        }
      }
    }
  }
  return true;
}

bool Interpretation::check_guessed_overlap(MatchFailure* why) const {
  for (std::size_t i = 0; i < guessed_.size(); ++i) {
    const ObsRef gi{ObsRef::Kind::Guessed, i};
    if (!obs_bound(gi)) continue;
    const TimeMs gb = obs_begin(gi).lo, ge = obs_end(gi).lo;
    const std::string& q = guessed_[i].observable;
    for (ObsIndex j : ip_->observations.q_sequence(q)) {
      const Observation& o = ip_->observations.at(j);
      if (!(ge < o.t_begin || o.t_end < gb)) {
        if (why) why->cause = "overlap:" + q;
        return false;
      }
    }
    for (std::size_t j = i + 1; j < guessed_.size(); ++j) {
      if (guessed_[j].observable != q) continue;
      const ObsRef gj{ObsRef::Kind::Guessed, j};
      if (!obs_bound(gj)) continue;
      if (!(ge < obs_begin(gj).lo || obs_end(gj).lo < gb)) {
        if (why) why->cause = "overlap:" + q;
        return false;
      }
    }
  }
  return true;
}

bool Interpretation::run_completion_cascade(MatchFailure* why) {
  const EvalContext ctx{ip_->series.empty() ? nullptr : &ip_->series};
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t hi = 0; hi < hyps_.size(); ++hi) {
      Hypothesis& h = hyps_[hi];
      if (h.theta_applied || h.detector_backed) continue;
      if (!hypothesis_complete(hi)) continue;
      // Effective procedure: the lambda closing the pattern may override the
      // one inherited along the chain.
      std::optional<std::string> theta = h.active_theta;
      if (!h.closed() && h.right_nt) {
        const AbstractionGrammar& g = kb().grammar(h.grammar_index);
        if (auto li = g.lambda_from(*h.right_nt)) {
          const auto& lt = g.productions[*li].theta;
          if (lt) theta = lt;
        }
      }
      if (theta) {
        std::vector<ThetaEvidence> evidence;
        for (std::size_t slot_idx : h.slots_in_chain_order()) {
          const FindingSlot& s = h.slots[slot_idx];
          ThetaEvidence ev;
          ev.observable = s.observable;
          ev.abstracted = s.abstracted;
          ev.t_begin = net_.domain(s.var_begin).lo;
          ev.t_end = net_.domain(s.var_end).lo;
          ev.values = s.values;
          evidence.push_back(std::move(ev));
        }
        ThetaResult res;
        try {
          res = kb().procedures.theta(*theta)(evidence, ctx);
        } catch (const std::exception& e) {
          if (why) why->cause = std::string("theta:") + e.what();
          return false;
        }
        GuessedObs& g = guessed_.at(h.o_h);
        const Observable& q = kb().relations.observable(g.observable);
        for (const auto& [name, v] : res.values) {
          const AttributeDecl* a = q.find_attribute(name);
          if (!a || !domain_admits(a->domain, v)) {
            if (why) why->cause = "theta:value-domain:" + name;
            return false;
          }
          g.values[name] = v;
        }
        if (res.t_begin && !net_.bind(g.var_begin, *res.t_begin)) {
          if (why) why->cause = "theta:t_begin";
          return false;
        }
        if (res.t_end && !net_.bind(g.var_end, *res.t_end)) {
          if (why) why->cause = "theta:t_end";
          return false;
        }
        // Propagate the new values to any finding matched to this observation.
        const ObsRef ref{ObsRef::Kind::Guessed, h.o_h};
        for (auto& h2 : hyps_)
          for (auto& s2 : h2.slots)
            if (s2.matched && *s2.matched == ref) s2.values = g.values;
      }
      h.theta_applied = true;
      changed = true;
    }
  }
  if (!net_.consistent()) {
    if (why) why->cause = "constraint:" + net_.conflict_tag();
    return false;
  }
  if (!check_predicates(why)) return false;
  if (!check_guessed_overlap(why)) return false;
  return true;
}

bool Interpretation::bind_match(std::size_t hyp, std::size_t slot, ObsRef o,
                                MatchFailure* why) {
  Hypothesis& h = hyps_.at(hyp);
  FindingSlot& s = h.slots.at(slot);
  if (s.matched) {
    if (why) why->cause = "slot-already-matched";
    return false;
  }
  if (!kb().relations.is_a(obs_observable(o), s.observable)) {
    if (why) why->cause = "is_a";
    return false;
  }
  for (const auto& other : h.slots)
    if (other.matched && *other.matched == o) {
      if (why) why->cause = "injectivity";
      return false;
    }
  if (!obs_bound(o)) {
    if (why) why->cause = "unbound-candidate";
    return false;
  }
  if (!periodicity_ok(hyp, slot, o, why)) return false;
  if (s.abstracted && !exclusivity_ok(hyp, o, why)) return false;

  const TimeMs tb = obs_begin(o).lo;
  const TimeMs te = obs_end(o).lo;
  if (s.instantaneous && tb != te) {
    if (why) why->cause = "instantaneous-finding";
    return false;
  }
  if (!net_.bind(s.var_begin, tb) || !net_.bind(s.var_end, te)) {
    if (why) why->cause = "constraint:" + net_.conflict_tag();
    return false;
  }
  s.matched = o;
  s.values = obs_values(o);
  return run_completion_cascade(why);
}

// --- Reasoning steps -----------------------------------------------------------

std::optional<Interpretation> Interpretation::abduce_step(
    std::size_t grammar_index, std::size_t production_index, ObsRef evidence,
    MatchFailure* why) const {
  Interpretation out = *this;
  const AbstractionGrammar& g = kb().grammar(grammar_index);
  const Production& p = g.productions.at(production_index);

  GuessedObs go;
  go.observable = g.hypothesis;
  go.hyp_index = out.hyps_.size();
  out.guessed_.push_back(go);

  Hypothesis h;
  h.grammar_index = grammar_index;
  h.o_h = out.guessed_.size() - 1;
  out.ensure_hyp_vars(h);
  h.left_nt = p.lhs;
  h.right_nt = p.rhs_nonterminal;
  out.hyps_.push_back(std::move(h));
  Hypothesis& href = out.hyps_.back();

  const auto slot = out.add_finding(href, production_index, false, why);
  if (!slot) return std::nullopt;
  if (!out.net_.propagate()) {
    if (why) why->cause = "constraint:" + out.net_.conflict_tag();
    return std::nullopt;
  }
  if (!out.bind_match(out.hyps_.size() - 1, *slot, evidence, why))
    return std::nullopt;

  out.focus_.pop_back();
  out.focus_.push_back(ObsRef{ObsRef::Kind::Guessed, href.o_h});
  return out;
}

std::optional<Interpretation> Interpretation::deduce_back_step(
    std::size_t hyp, std::size_t production_index, MatchFailure* why) const {
  Interpretation out = *this;
  Hypothesis& h = out.hyps_.at(hyp);
  const Production& p =
      kb().grammar(h.grammar_index).productions.at(production_index);
  const auto slot = out.add_finding(h, production_index, true, why);
  if (!slot) return std::nullopt;
  h.left_nt = p.lhs;
  if (!out.net_.propagate()) {
    if (why) why->cause = "constraint:" + out.net_.conflict_tag();
    return std::nullopt;
  }
  if (!out.run_completion_cascade(why)) return std::nullopt;
  out.focus_.push_back(FindingRef{hyp, *slot});
  return out;
}

std::optional<Interpretation> Interpretation::deduce_forward_step(
    std::size_t hyp, std::size_t production_index, MatchFailure* why) const {
  Interpretation out = *this;
  Hypothesis& h = out.hyps_.at(hyp);
  const Production& p =
      kb().grammar(h.grammar_index).productions.at(production_index);
  const auto slot = out.add_finding(h, production_index, false, why);
  if (!slot) return std::nullopt;
  h.right_nt = p.rhs_nonterminal;  // nullopt closes the pattern
  if (!out.net_.propagate()) {
    if (why) why->cause = "constraint:" + out.net_.conflict_tag();
    return std::nullopt;
  }
  if (!out.run_completion_cascade(why)) return std::nullopt;
  out.focus_.push_back(FindingRef{hyp, *slot});
  return out;
}

std::optional<Interpretation> Interpretation::subsume_step(
    FindingRef finding, ObsRef obs, MatchFailure* why) const {
  Interpretation out = *this;
  if (!out.bind_match(finding.hyp, finding.slot, obs, why))
    return std::nullopt;
  out.focus_.pop_back();
  return out;
}

std::optional<Interpretation> Interpretation::predict_step(
    FindingRef finding, std::size_t grammar_index, MatchFailure* why) const {
  Interpretation out = *this;
  const AbstractionGrammar& g = kb().grammar(grammar_index);

  GuessedObs go;
  go.observable = g.hypothesis;
  go.hyp_index = out.hyps_.size();
  out.guessed_.push_back(go);

  Hypothesis h;
  h.grammar_index = grammar_index;
  h.o_h = out.guessed_.size() - 1;
  out.ensure_hyp_vars(h);
  h.left_nt = "H";
  h.right_nt = "H";
  out.hyps_.push_back(std::move(h));
  const std::size_t hyp_idx = out.hyps_.size() - 1;

  // Couple the predicted finding to the conjectured observation: they denote
  // the same temporal entity.
  FindingSlot& s = out.hyps_.at(finding.hyp).slots.at(finding.slot);
  if (s.matched) {
    if (why) why->cause = "slot-already-matched";
    return std::nullopt;
  }
  const GuessedObs& go2 = out.guessed_.back();
  out.net_.add_difference({go2.var_begin, s.var_begin, 0, 0, "predict:link"});
  out.net_.add_difference({go2.var_end, s.var_end, 0, 0, "predict:link"});
  if (!out.net_.propagate()) {
    if (why) why->cause = "constraint:" + out.net_.conflict_tag();
    return std::nullopt;
  }
  s.matched = ObsRef{ObsRef::Kind::Guessed, out.guessed_.size() - 1};
  if (!out.run_completion_cascade(why)) return std::nullopt;

  out.focus_.pop_back();
  out.focus_.push_back(ObsRef{ObsRef::Kind::Guessed, out.hyps_[hyp_idx].o_h});
  return out;
}

std::optional<Interpretation> Interpretation::predict_detected_step(
    FindingRef finding, std::size_t grammar_index, const Observation& detected,
    MatchFailure* why) const {
  Interpretation out = *this;
  const AbstractionGrammar& g = kb().grammar(grammar_index);

  GuessedObs go;
  go.observable = detected.observable;
  go.values = detected.values;
  go.hyp_index = out.hyps_.size();
  out.guessed_.push_back(go);

  Hypothesis h;
  h.grammar_index = grammar_index;
  h.o_h = out.guessed_.size() - 1;
  h.detector_backed = true;
  h.theta_applied = true;
  out.ensure_hyp_vars(h);
  GuessedObs& stored = out.guessed_.back();
  if (!out.net_.bind(stored.var_begin, detected.t_begin) ||
      !out.net_.bind(stored.var_end, detected.t_end)) {
    if (why) why->cause = "constraint:" + out.net_.conflict_tag();
    return std::nullopt;
  }
  out.hyps_.push_back(std::move(h));
  const std::size_t hyp_idx = out.hyps_.size() - 1;

  const ObsRef ref{ObsRef::Kind::Guessed, out.guessed_.size() - 1};
  if (!out.bind_match(finding.hyp, finding.slot, ref, why))
    return std::nullopt;

  out.focus_.pop_back();
  out.focus_.push_back(ObsRef{ObsRef::Kind::Guessed, out.hyps_[hyp_idx].o_h});
  return out;
}

std::optional<Interpretation> Interpretation::advance_step() const {
  if (focus_.empty() || !std::holds_alternative<ObsRef>(focus_.back()))
    return std::nullopt;
  Interpretation out = *this;
  const ObsRef popped = std::get<ObsRef>(out.focus_.back());
  out.focus_.pop_back();
  if (!out.is_abstracted(popped)) out.set_aside_.push_back(popped);
  if (out.focus_.empty()) {
    const std::set<ObsRef> abstracted = out.abstracted_by_all();
    while (out.refill_pos_ < ip_->attention_order.size()) {
      const ObsIndex idx = ip_->attention_order[out.refill_pos_++];
      const ObsRef r{ObsRef::Kind::Initial, idx};
      if (!abstracted.count(r)) {
        out.focus_.push_back(r);
        break;
      }
    }
  }
  return out;
}

std::vector<ObsRef> Interpretation::subsume_candidates(
    FindingRef finding) const {
  const Hypothesis& h = hyps_.at(finding.hyp);
  const FindingSlot& s = h.slots.at(finding.slot);
  const TimeInterval wb = net_.domain(s.var_begin);
  const TimeInterval we = net_.domain(s.var_end);
  std::vector<ObsRef> out;
  for (ObsRef r : merged_q_sequence(s.observable)) {
    if (!obs_bound(r)) continue;
    if (!wb.contains(obs_begin(r).lo)) continue;
    if (!we.contains(obs_end(r).lo)) continue;
    out.push_back(r);
  }
  return out;
}

std::optional<Interpretation> Interpretation::oracle_add_hypothesis(
    std::size_t grammar_index, const std::vector<std::size_t>& chain,
    MatchFailure* why) const {
  Interpretation out = *this;
  const AbstractionGrammar& g = kb().grammar(grammar_index);

  GuessedObs go;
  go.observable = g.hypothesis;
  go.hyp_index = out.hyps_.size();
  out.guessed_.push_back(go);

  Hypothesis h;
  h.grammar_index = grammar_index;
  h.o_h = out.guessed_.size() - 1;
  out.ensure_hyp_vars(h);
  out.hyps_.push_back(std::move(h));
  Hypothesis& href = out.hyps_.back();
  for (std::size_t pi : chain) {
    const Production& p = g.productions.at(pi);
    if (p.is_lambda()) break;
    if (!out.add_finding(href, pi, false, why)) return std::nullopt;
    href.right_nt = p.rhs_nonterminal;
  }
  href.left_nt = g.productions.at(chain.front()).lhs;
  if (!out.net_.propagate()) {
    if (why) why->cause = "constraint:" + out.net_.conflict_tag();
    return std::nullopt;
  }
  return out;
}

std::optional<Interpretation> Interpretation::oracle_match(
    std::size_t hyp, std::size_t chain_pos, ObsRef o, MatchFailure* why) const {
  Interpretation out = *this;
  const std::size_t slot = out.hyps_.at(hyp).chain.at(chain_pos).slot;
  if (!out.bind_match(hyp, slot, o, why)) return std::nullopt;
  return out;
}

// --- Validation ----------------------------------------------------------------

std::vector<std::string> Interpretation::validate() const {
  std::vector<std::string> bad;
  MatchFailure why;
  if (!net_.consistent()) bad.push_back("network inconsistent");
  for (std::size_t hi = 0; hi < hyps_.size(); ++hi) {
    const Hypothesis& h = hyps_[hi];
    std::set<ObsRef> seen;
    for (std::size_t si = 0; si < h.slots.size(); ++si) {
      const FindingSlot& s = h.slots[si];
      if (!s.matched) continue;
      if (!seen.insert(*s.matched).second)
        bad.push_back("hyp " + std::to_string(hi) + ": matching not injective");
      if (!kb().relations.is_a(obs_observable(*s.matched), s.observable))
        bad.push_back("hyp " + std::to_string(hi) + ": is_a violated");
      // Temporal covering of abstracted, fully bound evidence.
      if (s.abstracted && obs_bound(*s.matched)) {
        const GuessedObs& g = guessed_.at(h.o_h);
        const TimeInterval hb = net_.domain(g.var_begin);
        const TimeInterval he = net_.domain(g.var_end);
        if (hb.lo > obs_begin(*s.matched).lo || he.hi < obs_end(*s.matched).lo)
          bad.push_back("hyp " + std::to_string(hi) + ": temporal covering");
      }
    }
    // Periodicity over consecutive matched same-observable findings.
    const auto order = h.slots_in_chain_order();
    for (std::size_t i = 0; i < order.size(); ++i) {
      const FindingSlot& a = h.slots[order[i]];
      if (!a.matched) continue;
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        const FindingSlot& b = h.slots[order[j]];
        if (b.observable != a.observable) continue;
        if (b.matched && !(a.abs_pinned && b.abs_pinned)) {
          const auto qseq = merged_q_sequence(a.observable);
          std::optional<std::size_t> ia, ib;
          for (std::size_t k = 0; k < qseq.size(); ++k) {
            if (qseq[k] == *a.matched) ia = k;
            if (qseq[k] == *b.matched) ib = k;
          }
          if (ia && ib && *ia + 1 != *ib)
            bad.push_back("hyp " + std::to_string(hi) + ": periodicity");
        }
        break;
      }
    }
  }
  // Exclusivity between alternative hypotheses.
  for (std::size_t i = 0; i < hyps_.size(); ++i)
    for (std::size_t j = i + 1; j < hyps_.size(); ++j) {
      const std::string& qi = guessed_.at(hyps_[i].o_h).observable;
      const std::string& qj = guessed_.at(hyps_[j].o_h).observable;
      if (!kb().relations.mutually_exclusive(qi, qj)) continue;
      const auto ai = abstracted_by(i);
      const auto aj = abstracted_by(j);
      for (const auto& o : ai)
        if (aj.count(o))
          bad.push_back("alternative hypotheses " + std::to_string(i) + "," +
                        std::to_string(j));
    }
  if (!check_predicates(&why)) bad.push_back("predicate: " + why.cause);
  if (!check_guessed_overlap(&why)) bad.push_back(why.cause);
  return bad;
}

// --- Eager pattern enumeration ---------------------------------------------------

namespace {

struct EnumState {
  std::vector<std::size_t> productions;
  std::string tail_nt;  // empty = closed by terminal form
  bool closed = false;
};

std::string render_term(const TimeTermSpec& t) {
  std::string e = t.entity == EntityRef::Hypothesis ? "h"
                  : t.entity == EntityRef::This     ? "this"
                                                    : "prev";
  std::string f = t.field == TimeField::Begin ? "begin"
                  : t.field == TimeField::End ? "end"
                                              : "t";
  return e + "." + f;
}

}  // namespace

std::vector<EnumeratedPattern> enumerate_patterns(const KnowledgeBase& kb,
                                                  std::size_t grammar_index,
                                                  std::size_t max_findings) {
  const AbstractionGrammar& g = kb.grammar(grammar_index);
  std::vector<EnumeratedPattern> out;
  if (max_findings == 0) return out;

  std::vector<EnumState> frontier;
  for (std::size_t pi : g.productions_from("H")) {
    const Production& p = g.productions[pi];
    EnumState st;
    st.productions = {pi};
    if (p.closes())
      st.closed = true;
    else
      st.tail_nt = *p.rhs_nonterminal;
    frontier.push_back(std::move(st));
  }

  auto emit = [&](const EnumState& st, bool via_lambda,
                  std::optional<std::size_t> lambda_pi) {
    EnumeratedPattern pat;
    std::optional<std::string> theta;
    for (std::size_t k = 0; k < st.productions.size(); ++k) {
      const Production& p = g.productions[st.productions[k]];
      pat.terminal_string.push_back(p.terminal);
      pat.abstracted.push_back(p.abstracted);
      if (p.theta) theta = p.theta;
      auto slot_name = [&](EntityRef e) -> std::string {
        if (e == EntityRef::Hypothesis) return "h";
        const std::size_t idx = e == EntityRef::This ? k : k - 1;
        return "m" + std::to_string(idx + 1);
      };
      for (const auto& c : p.temporal) {
        std::ostringstream os;
        os << format_time(c.lo) << " <= " << slot_name(c.a.entity) << "."
           << render_term(c.a).substr(render_term(c.a).find('.') + 1);
        if (c.b)
          os << " - " << slot_name(c.b->entity) << "."
             << render_term(*c.b).substr(render_term(*c.b).find('.') + 1);
        os << " <= " << format_time(c.hi);
        pat.constraints.push_back(os.str());
      }
      for (const auto& ps : p.predicates) pat.predicates.push_back(ps.name);
    }
    if (via_lambda && lambda_pi) {
      const auto& lt = g.productions[*lambda_pi].theta;
      if (lt) theta = lt;
    }
    pat.theta = theta;
    out.push_back(std::move(pat));
  };

  while (!frontier.empty()) {
    std::vector<EnumState> next;
    for (const auto& st : frontier) {
      if (st.closed) {
        emit(st, false, std::nullopt);
        continue;
      }
      if (auto li = g.lambda_from(st.tail_nt)) emit(st, true, li);
      if (st.productions.size() >= max_findings) continue;
      for (std::size_t pi : g.productions_from(st.tail_nt)) {
        const Production& p = g.productions[pi];
        EnumState grown = st;
        grown.productions.push_back(pi);
        if (p.closes()) {
          grown.closed = true;
          grown.tail_nt.clear();
        } else {
          grown.tail_nt = *p.rhs_nonterminal;
        }
        next.push_back(std::move(grown));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

}  // namespace construe
