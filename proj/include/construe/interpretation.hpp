#ifndef CONSTRUE_INTERPRETATION_HPP
#define CONSTRUE_INTERPRETATION_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "construe/kb.hpp"
#include "construe/model.hpp"
#include "construe/series.hpp"
#include "construe/stn.hpp"

namespace construe {

// --- References -------------------------------------------------------------

struct ObsRef {
  enum class Kind { Initial, Guessed };
  Kind kind = Kind::Initial;
  std::size_t index = 0;

  bool operator==(const ObsRef&) const = default;
  auto operator<=>(const ObsRef&) const = default;
};

struct FindingRef {
  std::size_t hyp = 0;
  std::size_t slot = 0;
  bool operator==(const FindingRef&) const = default;
};

using FocusEntry = std::variant<ObsRef, FindingRef>;

// --- Hypothesis state ---------------------------------------------------------

// A role slot of an abstraction pattern, to be filled by an observation.
struct FindingSlot {
  std::string observable;
  bool abstracted = true;
  bool instantaneous = false;
  VarId var_begin = 0;
  VarId var_end = 0;  // == var_begin for instantaneous findings
  std::optional<ObsRef> matched;
  std::map<std::string, Value> values;
  bool abs_pinned = false;  // declared constraints pin this finding's time
};

struct ChainStep {
  std::size_t production = 0;
  std::size_t slot = 0;
};

// An abstraction hypothesis under construction: the conjectured observation,
// the incrementally generated pattern (chain of applied productions with its
// leftmost/rightmost nonterminals), and the per-slot matching.
struct Hypothesis {
  std::size_t grammar_index = 0;
  std::vector<FindingSlot> slots;      // stable storage, indexed by ChainStep
  std::vector<ChainStep> chain;        // pattern order, head first
  std::string left_nt = "H";           // B
  std::optional<std::string> right_nt = "H";  // E; nullopt once closed
  std::size_t o_h = 0;                 // index into guessed observations
  std::optional<std::string> active_theta;
  bool theta_applied = false;
  bool head_prev_pending = false;  // head production's prev-refs await a predecessor
  bool detector_backed = false;    // conjectured directly from the base series

  bool closed() const { return !right_nt.has_value(); }
  std::vector<std::size_t> slots_in_chain_order() const;
};

// A conjectured observation. Temporal limits live as network domains until
// fully bound, so interpretations can be reported with interval-valued fields.
struct GuessedObs {
  std::string observable;
  std::map<std::string, Value> values;
  VarId var_begin = 0;
  VarId var_end = 0;
  std::size_t hyp_index = 0;
};

// --- Problem ------------------------------------------------------------------

struct InterpretationProblem {
  KnowledgeBase kb;
  ObservationSequence observations{&kb.relations};
  SampleSeries series;
  // Focus refill order over initial observations (saliency-reordered when
  // configured; obs_less order otherwise).
  std::vector<ObsIndex> attention_order;

  void finalize_attention(bool salient_first);
};

// --- Heuristic ----------------------------------------------------------------

// epsilon(I) = (1 - covering_ratio, complexity), compared lexicographically
// with exact rational arithmetic.
struct HeuristicVector {
  std::int64_t covered = 0;     // abstracted abstractable observations
  std::int64_t abstractable = 0;
  std::int64_t complexity = 0;  // |O_I|

  double sigma() const {
    return abstractable == 0 ? 1.0
                             : static_cast<double>(covered) / abstractable;
  }
};

// <0, 0, >0 like strcmp; lexicographic on (1-sigma, kappa).
int compare_heuristic(const HeuristicVector& a, const HeuristicVector& b);

// --- Interpretation -----------------------------------------------------------

enum class OpKind { Root, Abduce, Deduce, Subsume, Predict, Advance };

const char* op_name(OpKind k);

// Trace payload describing how a node differs from its parent.
struct DeltaRecord {
  OpKind op = OpKind::Root;
  std::string detail;
};

struct MatchFailure {
  std::string cause;  // "constraint:<id>", "injectivity", "periodicity", ...
};

// Immutable snapshot of a partial interpretation: a set of abstraction
// hypotheses over a shared observation sequence plus this branch's guessed
// observations, with the focus-of-attention stack and cached heuristic.
// All mutating operations copy first; parents are never modified.
class Interpretation {
 public:
  static Interpretation root(std::shared_ptr<const InterpretationProblem> ip);

  const InterpretationProblem& problem() const { return *ip_; }
  const TemporalNetwork& net() const { return net_; }
  const std::vector<Hypothesis>& hypotheses() const { return hyps_; }
  const std::vector<GuessedObs>& guessed() const { return guessed_; }
  const std::vector<FocusEntry>& focus() const { return focus_; }
  const std::vector<ObsRef>& set_aside() const { return set_aside_; }

  std::int64_t node_id = 0;
  std::int64_t parent_id = -1;
  DeltaRecord delta;

  // Observation access across initial and guessed stores.
  std::string obs_observable(ObsRef o) const;
  TimeInterval obs_begin(ObsRef o) const;
  TimeInterval obs_end(ObsRef o) const;
  bool obs_bound(ObsRef o) const;
  const std::map<std::string, Value>& obs_values(ObsRef o) const;

  // The hypothesis conjecturing o, when o is a guessed observation.
  std::optional<std::size_t> hypothesis_of(ObsRef o) const;

  bool is_abstracted(ObsRef o) const;
  std::set<ObsRef> abstracted_by(std::size_t hyp) const;
  std::set<ObsRef> environment_of(std::size_t hyp) const;
  std::set<ObsRef> evidence_of(std::size_t hyp) const;
  std::set<ObsRef> abstracted_by_all() const;

  bool hypothesis_complete(std::size_t hyp) const;
  bool all_hypotheses_complete() const;

  HeuristicVector heuristic() const;

  // Initial observations that are abstractable but not abstracted.
  std::vector<ObsIndex> unexplained_initial() const;

  // --- Construction steps used by the reasoning operations. Each returns the
  // new snapshot, or nullopt with `why` set when the step is inconsistent.

  std::optional<Interpretation> abduce_step(std::size_t grammar_index,
                                            std::size_t production_index,
                                            ObsRef evidence,
                                            MatchFailure* why) const;

  std::optional<Interpretation> deduce_back_step(std::size_t hyp,
                                                 std::size_t production_index,
                                                 MatchFailure* why) const;
  std::optional<Interpretation> deduce_forward_step(std::size_t hyp,
                                                    std::size_t production_index,
                                                    MatchFailure* why) const;

  std::optional<Interpretation> subsume_step(FindingRef finding, ObsRef obs,
                                             MatchFailure* why) const;

  // Alg. 6 prediction: a fresh empty-evidence hypothesis coupled to `finding`.
  std::optional<Interpretation> predict_step(FindingRef finding,
                                             std::size_t grammar_index,
                                             MatchFailure* why) const;

  // Detector-backed prediction: `detected` was proposed by the grammar's
  // registered detector inside the finding's propagated window.
  std::optional<Interpretation> predict_detected_step(FindingRef finding,
                                                      std::size_t grammar_index,
                                                      const Observation& detected,
                                                      MatchFailure* why) const;

  std::optional<Interpretation> advance_step() const;

  // Candidate enumeration helpers used by the reasoning layer.
  std::vector<ObsRef> merged_q_sequence(const std::string& observable) const;
  std::vector<ObsRef> subsume_candidates(FindingRef finding) const;

  // Validation sweep re-checking every invariant from scratch; returns
  // human-readable violation descriptions (empty = valid).
  std::vector<std::string> validate() const;

  // Oracle/test surface: builds a hypothesis by applying a full production
  // chain from H at once (findings unmatched), or matches a slot, without
  // touching the focus stack. Same consistency rules as the search steps.
  std::optional<Interpretation> oracle_add_hypothesis(
      std::size_t grammar_index, const std::vector<std::size_t>& chain,
      MatchFailure* why) const;
  std::optional<Interpretation> oracle_match(std::size_t hyp,
                                             std::size_t chain_pos, ObsRef o,
                                             MatchFailure* why) const;

 private:
  Interpretation() = default;

  const KnowledgeBase& kb() const { return ip_->kb; }

  // Pattern instantiation.
  VarId ensure_hyp_vars(Hypothesis& h);
  std::optional<std::size_t> add_finding(Hypothesis& h,
                                         std::size_t production_index,
                                         bool at_front, MatchFailure* why);
  bool instantiate_block(Hypothesis& h, std::size_t chain_pos,
                         bool include_prev_refs, MatchFailure* why);
  bool add_spec_constraint(Hypothesis& h, const TemporalConstraintSpec& spec,
                           std::size_t this_slot,
                           std::optional<std::size_t> prev_slot,
                           const std::string& label, MatchFailure* why);
  bool inject_defaults(Hypothesis& h, std::size_t chain_pos, MatchFailure* why);

  // Matching machinery.
  bool bind_match(std::size_t hyp, std::size_t slot, ObsRef o,
                  MatchFailure* why);
  bool periodicity_ok(std::size_t hyp, std::size_t slot, ObsRef o,
                      MatchFailure* why) const;
  bool exclusivity_ok(std::size_t hyp, ObsRef o, MatchFailure* why) const;
  bool check_predicates(MatchFailure* why) const;
  bool check_guessed_overlap(MatchFailure* why) const;
  bool run_completion_cascade(MatchFailure* why);

  ResolvedEntity resolve_entity(const Hypothesis& h, EntityRef e,
                                std::optional<std::size_t> this_slot,
                                std::optional<std::size_t> prev_slot) const;

  std::shared_ptr<const InterpretationProblem> ip_;
  TemporalNetwork net_;
  std::vector<Hypothesis> hyps_;
  std::vector<GuessedObs> guessed_;
  std::vector<FocusEntry> focus_;
  std::vector<ObsRef> set_aside_;  // popped unexplained (trace info)
  std::size_t refill_pos_ = 0;

  friend class PatternEnumerator;
};

// --- Eager pattern enumeration (testing / KB debugging) ------------------------

struct EnumeratedPattern {
  std::vector<std::string> terminal_string;  // observables in pattern order
  std::vector<bool> abstracted;
  std::vector<std::string> constraints;  // rendered difference constraints
  std::vector<std::string> predicates;
  std::optional<std::string> theta;
};

// All complete patterns of `grammar` with at most max_findings findings,
// generated eagerly from H.
std::vector<EnumeratedPattern> enumerate_patterns(const KnowledgeBase& kb,
                                                  std::size_t grammar_index,
                                                  std::size_t max_findings);

}  // namespace construe

#endif
