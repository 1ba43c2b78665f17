#ifndef CONSTRUE_KB_HPP
#define CONSTRUE_KB_HPP

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "construe/model.hpp"
#include "construe/series.hpp"
#include "construe/stn.hpp"

namespace construe {

class KbError : public std::runtime_error {
 public:
  KbError(const std::string& msg, int line = 0, int col = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) +
                                          ", col " + std::to_string(col) + ")"
                                    : msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

// --- Constraint expression atoms -------------------------------------------

// Entities a production's constraint block may reference: the hypothesis, the
// finding added by this production, and the finding of the chain-previous
// production.
enum class EntityRef { Hypothesis, This, Prev };

enum class TimeField { Begin, End, Point };

struct TimeTermSpec {
  EntityRef entity = EntityRef::This;
  TimeField field = TimeField::Point;
};

// lo <= a - b <= hi; b absent means an absolute bound on a.
struct TemporalConstraintSpec {
  TimeTermSpec a;
  std::optional<TimeTermSpec> b;
  TimeMs lo = -kTimeInf;
  TimeMs hi = kTimeInf;
  std::string label;
};

using PredArgSpec = std::variant<EntityRef, double, std::string>;

struct PredicateSpec {
  std::string name;
  std::vector<PredArgSpec> args;
  std::string label;
};

// --- Grammar ----------------------------------------------------------------

// Right-linear production. terminal empty <=> lambda production.
struct Production {
  std::string lhs;
  std::string terminal;
  std::optional<std::string> rhs_nonterminal;
  bool abstracted = true;
  std::vector<TemporalConstraintSpec> temporal;
  std::vector<PredicateSpec> predicates;
  std::optional<std::string> theta;

  bool is_lambda() const { return terminal.empty(); }
  bool closes() const { return !rhs_nonterminal.has_value(); }
};

struct AbstractionGrammar {
  std::string id;
  std::string hypothesis;
  std::vector<std::string> salient;
  std::optional<std::string> detector;
  std::vector<Production> productions;

  std::vector<std::size_t> productions_from(const std::string& nt) const;
  std::vector<std::size_t> productions_into(const std::string& nt) const;
  std::optional<std::size_t> lambda_from(const std::string& nt) const;
  std::set<std::string> terminals() const;
  std::set<std::string> nonterminals() const;
};

// --- Registries -------------------------------------------------------------

struct EvalContext {
  const SampleSeries* series = nullptr;
};

// A resolved predicate argument: an entity's current temporal window, its
// boundness, and its attribute values (empty for unvalued findings).
struct ResolvedEntity {
  TimeInterval begin;
  TimeInterval end;
  bool bound = false;
  std::map<std::string, Value> values;
};

using PredArg = std::variant<ResolvedEntity, double, std::string>;
using PredicateFn =
    std::function<bool(const std::vector<PredArg>&, const EvalContext&)>;

// Result of an observation procedure: attribute values for the hypothesis
// observation, plus optional temporal limits when the constraints alone do
// not determine them.
struct ThetaResult {
  std::map<std::string, Value> values;
  std::optional<TimeMs> t_begin;
  std::optional<TimeMs> t_end;
};

struct ThetaEvidence {
  std::string observable;
  bool abstracted = true;
  TimeMs t_begin = 0;
  TimeMs t_end = 0;
  std::map<std::string, Value> values;
};

using ThetaFn = std::function<ThetaResult(const std::vector<ThetaEvidence>&,
                                          const EvalContext&)>;

// A detector proposes fully valued observations of `observable` whose begin
// time falls inside begin_window (end time capped by end_limit).
using DetectorFn = std::function<std::vector<Observation>(
    const std::string& observable, TimeInterval begin_window, TimeMs end_limit,
    const EvalContext&)>;

class ProcedureRegistry {
 public:
  void register_predicate(const std::string& name, PredicateFn fn);
  void register_theta(const std::string& name, ThetaFn fn);
  void register_detector(const std::string& name, DetectorFn fn);

  bool has_predicate(const std::string& name) const;
  bool has_theta(const std::string& name) const;
  bool has_detector(const std::string& name) const;

  const PredicateFn& predicate(const std::string& name) const;
  const ThetaFn& theta(const std::string& name) const;
  const DetectorFn& detector(const std::string& name) const;

 private:
  std::map<std::string, PredicateFn> predicates_;
  std::map<std::string, ThetaFn> thetas_;
  std::map<std::string, DetectorFn> detectors_;
};

// Registers the predicates and procedures every knowledge base may rely on
// (sign tests, slope ratios, presence conjunction).
void register_builtin_procedures(ProcedureRegistry& reg);

// --- Knowledge base ---------------------------------------------------------

class KnowledgeBase {
 public:
  RelationTable relations;
  std::vector<AbstractionGrammar> grammars;
  ProcedureRegistry procedures;

  // Derives the abstraction relation induced by the grammars, validates
  // acyclicity and grammar well-formedness. Must be called once after all
  // declarations.
  void finalize();

  const AbstractionGrammar& grammar(std::size_t i) const {
    return grammars.at(i);
  }
  std::optional<std::size_t> grammar_by_id(const std::string& id) const;

  // q_i is abstracted into q_j by some pattern (Def. 9 pairs).
  bool abstracts(const std::string& qi, const std::string& qj) const;

  // True iff observations of q can be abstracted by some pattern, i.e. q is_a
  // some observable in domain of the abstraction relation.
  bool abstractable(const std::string& q) const;

  // K = max over observables of |{q_j | q_i abstracted-into q_j}|.
  int default_k() const;

  const std::set<std::pair<std::string, std::string>>& abstraction_pairs()
      const {
    return abstracts_;
  }

 private:
  void validate_grammar(const AbstractionGrammar& g) const;

  std::set<std::pair<std::string, std::string>> abstracts_;
  std::set<std::string> abstractable_cache_;
  bool finalized_ = false;
};

// Parses KB DSL text, accumulating declarations into `kb`. Reports syntax and
// semantic errors with line/column via KbError. Call kb.finalize() after all
// sources are parsed.
void parse_kb(const std::string& text, KnowledgeBase& kb);

void parse_kb_file(const std::string& path, KnowledgeBase& kb);

}  // namespace construe

#endif
