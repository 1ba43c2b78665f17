#include "construe/oracle.hpp"

#include <algorithm>
#include <sstream>

namespace construe {

namespace {

// Closed production chains from H with at most max_findings findings.
std::vector<std::vector<std::size_t>> closed_chains(
    const AbstractionGrammar& g, std::size_t max_findings) {
  std::vector<std::vector<std::size_t>> out;
  struct St {
    std::vector<std::size_t> chain;
    std::string tail;
    bool closed;
  };
  std::vector<St> frontier;
  for (std::size_t pi : g.productions_from("H")) {
    const Production& p = g.productions[pi];
    frontier.push_back(
        {{pi}, p.closes() ? "" : *p.rhs_nonterminal, p.closes()});
  }
  while (!frontier.empty()) {
    std::vector<St> next;
    for (auto& st : frontier) {
      if (st.closed || g.lambda_from(st.tail))
        out.push_back(st.chain);
      if (st.closed || st.chain.size() >= max_findings) continue;
      for (std::size_t pi : g.productions_from(st.tail)) {
        const Production& p = g.productions[pi];
        St grown = st;
        grown.chain.push_back(pi);
        grown.closed = p.closes();
        grown.tail = p.closes() ? "" : *p.rhs_nonterminal;
        next.push_back(std::move(grown));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

struct Candidate {
  std::size_t grammar = 0;
  std::vector<std::size_t> chain;
  std::vector<ObsIndex> assignment;  // per chain position
  std::set<ObsRef> abstracted;
};

}  // namespace

BruteForceResult brute_force_solution(
    std::shared_ptr<const InterpretationProblem> ip,
    const OracleBounds& bounds) {
  BruteForceResult res;
  const std::size_t n_obs = ip->observations.size();
  if (n_obs > bounds.max_observations) {
    res.refused = true;
    res.refusal = "instance too large: " + std::to_string(n_obs) +
                  " observations > " + std::to_string(bounds.max_observations);
    return res;
  }
  const KnowledgeBase& kb = ip->kb;
  const Interpretation root = Interpretation::root(ip);

  // Enumerate consistent, complete single-hypothesis interpretations by
  // backtracking over slot assignments.
  std::vector<Candidate> candidates;
  bool overflow = false;
  for (std::size_t gi = 0; gi < kb.grammars.size() && !overflow; ++gi) {
    const AbstractionGrammar& g = kb.grammars[gi];
    if (g.productions.empty()) continue;
    for (const auto& chain : closed_chains(g, bounds.max_findings)) {
      if (overflow) break;
      MatchFailure why;
      auto seeded = root.oracle_add_hypothesis(gi, chain, &why);
      if (!seeded) continue;
      // Depth-first assignment of initial observations to chain slots.
      struct Frame {
        Interpretation interp;
        std::vector<ObsIndex> assigned;
      };
      std::vector<Frame> stack{{std::move(*seeded), {}}};
      while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const std::size_t pos = f.assigned.size();
        if (pos == chain.size()) {
          if (!f.interp.hypothesis_complete(0)) continue;
          Candidate c;
          c.grammar = gi;
          c.chain = chain;
          c.assignment = f.assigned;
          c.abstracted = f.interp.abstracted_by(0);
          candidates.push_back(std::move(c));
          if (candidates.size() > bounds.max_candidates) overflow = true;
          continue;
        }
        if (overflow) break;
        const std::string& q =
            g.productions[chain[pos]].is_lambda()
                ? ""
                : g.productions[chain[pos]].terminal;
        if (q.empty()) continue;
        // Candidates in reverse so the stack pops them in sequence order.
        std::vector<ObsIndex> opts;
        for (const auto& spec : kb.relations.specializations_of(q))
          for (ObsIndex oi : ip->observations.q_sequence(spec))
            opts.push_back(oi);
        std::sort(opts.begin(), opts.end());
        for (auto it = opts.rbegin(); it != opts.rend(); ++it) {
          MatchFailure w2;
          auto next = f.interp.oracle_match(
              0, pos, ObsRef{ObsRef::Kind::Initial, *it}, &w2);
          if (!next) continue;
          Frame nf{std::move(*next), f.assigned};
          nf.assigned.push_back(*it);
          stack.push_back(std::move(nf));
        }
      }
    }
  }
  if (overflow) {
    res.refused = true;
    res.refusal = "candidate bound exceeded (" +
                  std::to_string(bounds.max_candidates) + ")";
    return res;
  }
  res.candidates = candidates.size();

  // Required coverage: abstractable initial observations.
  std::set<ObsRef> required;
  for (std::size_t i = 0; i < n_obs; ++i)
    if (kb.abstractable(ip->observations.at(i).observable))
      required.insert(ObsRef{ObsRef::Kind::Initial, i});
  if (required.empty()) {
    res.minimal_covers.push_back(root);
    return res;
  }

  // Subsets of candidates by increasing cardinality; a subset is a cover when
  // the rebuilt interpretation is consistent (exclusivity and non-overlap
  // included) and the union of abstracted sets contains every required
  // observation.
  auto rebuild = [&](const std::vector<std::size_t>& subset)
      -> std::optional<Interpretation> {
    Interpretation cur = root;
    for (std::size_t ci : subset) {
      const Candidate& c = candidates[ci];
      MatchFailure why;
      auto seeded = cur.oracle_add_hypothesis(c.grammar, c.chain, &why);
      if (!seeded) return std::nullopt;
      cur = std::move(*seeded);
      const std::size_t hyp = cur.hypotheses().size() - 1;
      for (std::size_t pos = 0; pos < c.assignment.size(); ++pos) {
        auto next = cur.oracle_match(
            hyp, pos, ObsRef{ObsRef::Kind::Initial, c.assignment[pos]}, &why);
        if (!next) return std::nullopt;
        cur = std::move(*next);
      }
    }
    return cur;
  };

  for (std::size_t k = 1;
       k <= std::min(bounds.max_hypotheses, candidates.size()); ++k) {
    std::vector<std::size_t> idx(k);
    // k-combinations of candidate indices
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start,
                                                            std::size_t depth) {
      if (!res.minimal_covers.empty() && depth == 0 &&
          res.minimal_covers.front().hypotheses().size() < k)
        return;
      if (depth == k) {
        std::set<ObsRef> covered;
        for (std::size_t ci : idx)
          covered.insert(candidates[ci].abstracted.begin(),
                         candidates[ci].abstracted.end());
        for (const auto& r : required)
          if (!covered.count(r)) return;
        std::vector<std::size_t> subset(idx.begin(), idx.end());
        auto interp = rebuild(subset);
        if (interp) res.minimal_covers.push_back(std::move(*interp));
        return;
      }
      for (std::size_t i = start; i + (k - depth) <= candidates.size(); ++i) {
        idx[depth] = i;
        rec(i + 1, depth + 1);
      }
    };
    rec(0, 0);
    if (!res.minimal_covers.empty()) break;  // minimal cardinality reached
  }
  return res;
}

std::optional<std::size_t> set_cover_min(const std::set<int>& universe,
                                         const SetFamily& family) {
  if (universe.empty()) return 0;
  const std::size_t n = family.size();
  std::optional<std::size_t> best;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::set<int> covered;
    std::size_t size = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::uint64_t{1} << i)) {
        ++size;
        covered.insert(family[i].begin(), family[i].end());
      }
    if (best && size >= *best) continue;
    bool all = true;
    for (int u : universe)
      if (!covered.count(u)) {
        all = false;
        break;
      }
    if (all) best = size;
  }
  return best;
}

PhiResult phi_reduction(const std::set<int>& universe,
                        const SetFamily& family) {
  PhiResult out;
  out.ip = std::make_shared<InterpretationProblem>();
  KnowledgeBase& kb = out.ip->kb;
  register_builtin_procedures(kb.procedures);

  Observable u;
  u.id = "u";
  u.process = "element_presence";
  u.attributes.push_back({"present", LabelSet{{"true"}}});
  u.instantaneous = true;
  kb.relations.declare_observable(u);

  if (universe.empty()) out.degenerate = true;

  for (std::size_t si = 0; si < family.size(); ++si) {
    std::vector<int> members(family[si].begin(), family[si].end());
    std::sort(members.begin(), members.end());
    if (members.empty()) continue;  // an empty subset covers nothing

    Observable h;
    h.id = "s" + std::to_string(si + 1);
    h.process = "subset_presence";
    h.attributes.push_back({"present", LabelSet{{"true"}}});
    kb.relations.declare_observable(h);

    AbstractionGrammar g;
    g.id = "G_" + h.id;
    g.hypothesis = h.id;
    std::string nt = "H";
    for (std::size_t k = 0; k < members.size(); ++k) {
      Production p;
      p.lhs = nt;
      p.terminal = "u";
      nt = "D" + std::to_string(k + 1);
      p.rhs_nonterminal = nt;
      p.abstracted = true;
      TemporalConstraintSpec pin;
      pin.a = {EntityRef::This, TimeField::Point};
      pin.lo = pin.hi = members[k];
      pin.label = "pin" + std::to_string(k + 1);
      p.temporal.push_back(pin);
      if (k == 0)
        p.temporal.push_back({{EntityRef::Hypothesis, TimeField::Begin},
                              TimeTermSpec{EntityRef::This, TimeField::Point},
                              0,
                              0,
                              "hbegin"});
      if (k + 1 == members.size())
        p.temporal.push_back({{EntityRef::Hypothesis, TimeField::End},
                              TimeTermSpec{EntityRef::This, TimeField::Point},
                              0,
                              0,
                              "hend"});
      g.productions.push_back(std::move(p));
    }
    Production lambda;
    lambda.lhs = nt;
    lambda.theta = "presence_conj";
    g.productions.push_back(std::move(lambda));
    kb.grammars.push_back(std::move(g));
  }
  // Wider subsets first: at equal heuristics the search then prefers the
  // hypotheses with the larger scope, matching the parsimony criterion.
  std::stable_sort(kb.grammars.begin(), kb.grammars.end(),
                   [](const AbstractionGrammar& a, const AbstractionGrammar& b) {
                     return a.productions.size() > b.productions.size();
                   });
  kb.finalize();

  out.ip->observations = ObservationSequence(&kb.relations);
  for (int ui : universe) {
    Observation o;
    o.observable = "u";
    o.values["present"] = std::string("true");
    o.t_begin = o.t_end = ui;
    out.ip->observations.insert(std::move(o));
  }
  out.ip->finalize_attention(false);
  return out;
}

}  // namespace construe
