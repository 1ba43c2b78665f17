#include "construe/reasoning.hpp"

#include <sstream>

namespace construe {

namespace {

std::string obs_label(const Interpretation& I, ObsRef o) {
  std::ostringstream os;
  os << (o.kind == ObsRef::Kind::Initial ? "o" : "g") << o.index << ":"
     << I.obs_observable(o);
  return os.str();
}

std::string finding_label(const Interpretation& I, FindingRef f) {
  const auto& s = I.hypotheses().at(f.hyp).slots.at(f.slot);
  std::ostringstream os;
  os << "m[" << f.hyp << "." << f.slot << "]:" << s.observable;
  return os.str();
}

}  // namespace

DescendantCursor::DescendantCursor(
    std::shared_ptr<const Interpretation> parent)
    : parent_(std::move(parent)) {
  plan();
}

void DescendantCursor::plan() {
  const Interpretation& I = *parent_;
  const KnowledgeBase& kb = I.problem().kb;
  if (I.focus().empty()) return;
  const FocusEntry& top = I.focus().back();

  if (std::holds_alternative<ObsRef>(top)) {
    const ObsRef o = std::get<ObsRef>(top);
    // DEDUCE applies only when the focused observation is a conjecture of
    // this interpretation.
    if (auto hyp = I.hypothesis_of(o)) {
      const Hypothesis& h = I.hypotheses().at(*hyp);
      const AbstractionGrammar& g = kb.grammar(h.grammar_index);
      if (!h.chain.empty() && h.left_nt != "H") {
        for (std::size_t pi : g.productions_into(h.left_nt)) {
          Candidate c;
          c.kind = Candidate::Kind::DeduceBack;
          c.hyp = *hyp;
          c.production = pi;
          candidates_.push_back(c);
        }
      } else if (h.right_nt) {
        for (std::size_t pi : g.productions_from(*h.right_nt)) {
          Candidate c;
          c.kind = Candidate::Kind::DeduceForward;
          c.hyp = *hyp;
          c.production = pi;
          candidates_.push_back(c);
        }
      }
    }
    // ABDUCE over every production whose terminal generalizes q(o) and whose
    // finding is abstracted.
    const std::string q = I.obs_observable(o);
    for (std::size_t gi = 0; gi < kb.grammars.size(); ++gi) {
      const AbstractionGrammar& g = kb.grammars[gi];
      for (std::size_t pi = 0; pi < g.productions.size(); ++pi) {
        const Production& p = g.productions[pi];
        if (p.is_lambda() || !p.abstracted) continue;
        if (!kb.relations.is_a(q, p.terminal)) continue;
        Candidate c;
        c.kind = Candidate::Kind::Abduce;
        c.grammar = gi;
        c.production = pi;
        c.obs = o;
        candidates_.push_back(c);
      }
    }
    Candidate adv;
    adv.kind = Candidate::Kind::Advance;
    candidates_.push_back(adv);
    return;
  }

  const FindingRef f = std::get<FindingRef>(top);
  const FindingSlot& slot = I.hypotheses().at(f.hyp).slots.at(f.slot);
  for (ObsRef o : I.subsume_candidates(f)) {
    Candidate c;
    c.kind = Candidate::Kind::Subsume;
    c.finding = f;
    c.obs = o;
    candidates_.push_back(c);
  }
  for (std::size_t gi = 0; gi < kb.grammars.size(); ++gi) {
    const AbstractionGrammar& g = kb.grammars[gi];
    if (!kb.relations.is_a(g.hypothesis, slot.observable)) continue;
    if (g.detector) {
      const EvalContext ctx{I.problem().series.empty() ? nullptr
                                                       : &I.problem().series};
      const TimeInterval wb = I.net().domain(slot.var_begin);
      const TimeInterval we = I.net().domain(slot.var_end);
      const auto proposals =
          kb.procedures.detector(*g.detector)(g.hypothesis, wb, we.hi, ctx);
      for (const auto& obs : proposals) {
        Candidate c;
        c.kind = Candidate::Kind::PredictDetected;
        c.grammar = gi;
        c.finding = f;
        c.detected = obs;
        candidates_.push_back(c);
      }
    }
    if (!g.productions.empty()) {
      Candidate c;
      c.kind = Candidate::Kind::Predict;
      c.grammar = gi;
      c.finding = f;
      candidates_.push_back(c);
    }
  }
}

std::optional<Interpretation> DescendantCursor::next(
    std::vector<Rejection>* rejections) {
  const Interpretation& I = *parent_;
  const KnowledgeBase& kb = I.problem().kb;
  while (pos_ < candidates_.size()) {
    const Candidate c = candidates_[pos_++];
    MatchFailure why;
    std::optional<Interpretation> child;
    OpKind op = OpKind::Advance;
    std::string detail;
    switch (c.kind) {
      case Candidate::Kind::DeduceBack:
      case Candidate::Kind::DeduceForward: {
        op = OpKind::Deduce;
        const Hypothesis& h = I.hypotheses().at(c.hyp);
        const Production& p =
            kb.grammar(h.grammar_index).productions.at(c.production);
        detail = "hyp g" + std::to_string(I.hypotheses().at(c.hyp).o_h) +
                 " via " + p.lhs + "->" + p.terminal +
                 (c.kind == Candidate::Kind::DeduceBack ? " (back)"
                                                        : " (forward)");
        child = c.kind == Candidate::Kind::DeduceBack
                    ? I.deduce_back_step(c.hyp, c.production, &why)
                    : I.deduce_forward_step(c.hyp, c.production, &why);
        break;
      }
      case Candidate::Kind::Abduce: {
        op = OpKind::Abduce;
        const AbstractionGrammar& g = kb.grammar(c.grammar);
        const Production& p = g.productions.at(c.production);
        detail = obs_label(I, c.obs) + " under " + g.id + " via " + p.lhs +
                 "->" + p.terminal;
        child = I.abduce_step(c.grammar, c.production, c.obs, &why);
        break;
      }
      case Candidate::Kind::Advance: {
        op = OpKind::Advance;
        detail = "pop " + obs_label(I, std::get<ObsRef>(I.focus().back()));
        child = I.advance_step();
        break;
      }
      case Candidate::Kind::Subsume: {
        op = OpKind::Subsume;
        detail = finding_label(I, c.finding) + " <- " + obs_label(I, c.obs);
        child = I.subsume_step(c.finding, c.obs, &why);
        break;
      }
      case Candidate::Kind::Predict: {
        op = OpKind::Predict;
        detail = finding_label(I, c.finding) + " via " +
                 kb.grammar(c.grammar).id;
        child = I.predict_step(c.finding, c.grammar, &why);
        break;
      }
      case Candidate::Kind::PredictDetected: {
        op = OpKind::Predict;
        detail = finding_label(I, c.finding) + " via " +
                 kb.grammar(c.grammar).id + " detector at [" +
                 format_time(c.detected.t_begin) + "," +
                 format_time(c.detected.t_end) + "]";
        child = I.predict_detected_step(c.finding, c.grammar, c.detected, &why);
        break;
      }
    }
    if (child) {
      child->delta = {op, detail};
      return child;
    }
    if (rejections && c.kind != Candidate::Kind::Advance)
      rejections->push_back({op, detail, why.cause});
  }
  return std::nullopt;
}

namespace {

std::vector<Interpretation> drain(const Interpretation& I,
                                  std::vector<Rejection>* rej,
                                  auto keep) {
  auto parent = std::make_shared<Interpretation>(I);
  DescendantCursor cur(parent);
  std::vector<Interpretation> out;
  std::vector<Rejection> local;
  while (auto child = cur.next(&local)) {
    if (keep(child->delta.op)) out.push_back(std::move(*child));
  }
  if (rej)
    for (auto& r : local)
      if (keep(r.op)) rej->push_back(std::move(r));
  return out;
}

}  // namespace

std::vector<Interpretation> abduce(const Interpretation& I,
                                   std::vector<Rejection>* rej) {
  return drain(I, rej, [](OpKind k) { return k == OpKind::Abduce; });
}
std::vector<Interpretation> deduce(const Interpretation& I,
                                   std::vector<Rejection>* rej) {
  return drain(I, rej, [](OpKind k) { return k == OpKind::Deduce; });
}
std::vector<Interpretation> subsume(const Interpretation& I,
                                    std::vector<Rejection>* rej) {
  return drain(I, rej, [](OpKind k) { return k == OpKind::Subsume; });
}
std::vector<Interpretation> predict(const Interpretation& I,
                                    std::vector<Rejection>* rej) {
  return drain(I, rej, [](OpKind k) { return k == OpKind::Predict; });
}
std::optional<Interpretation> advance(const Interpretation& I) {
  auto out = drain(I, nullptr, [](OpKind k) { return k == OpKind::Advance; });
  if (out.empty()) return std::nullopt;
  return std::move(out.front());
}
std::vector<Interpretation> get_descendants(const Interpretation& I) {
  return drain(I, nullptr, [](OpKind) { return true; });
}

}  // namespace construe
