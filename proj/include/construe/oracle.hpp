#ifndef CONSTRUE_ORACLE_HPP
#define CONSTRUE_ORACLE_HPP

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "construe/interpretation.hpp"

namespace construe {

struct OracleBounds {
  std::size_t max_observations = 10;
  std::size_t max_findings = 10;
  std::size_t max_hypotheses = 6;
  std::size_t max_candidates = 20000;
};

struct BruteForceResult {
  bool refused = false;
  std::string refusal;
  std::size_t candidates = 0;  // consistent complete single-hypothesis builds
  // All exclusive covers of minimum cardinality; empty if no cover exists.
  std::vector<Interpretation> minimal_covers;

  std::optional<std::size_t> min_cover_size() const {
    if (minimal_covers.empty()) return std::nullopt;
    return minimal_covers.front().hypotheses().size();
  }
};

// Exhaustive enumeration of hypothesis candidates (pattern chains x injective
// matchings over the initial observations, all constraints checked) followed
// by subset search for exclusive covers of minimum cardinality. Ground truth
// for small instances; independent of the heuristic search.
BruteForceResult brute_force_solution(
    std::shared_ptr<const InterpretationProblem> ip,
    const OracleBounds& bounds = {});

// --- Set covering -------------------------------------------------------------

using SetFamily = std::vector<std::set<int>>;

// Minimum set-cover size by subset enumeration; nullopt when no cover exists.
std::optional<std::size_t> set_cover_min(const std::set<int>& universe,
                                         const SetFamily& family);

struct PhiResult {
  std::shared_ptr<InterpretationProblem> ip;
  bool degenerate = false;  // empty universe
};

// The constructive reduction from set covering: one pinned instantaneous
// observation per universe element, one single-pattern grammar per subset with
// findings pinned to the member indices and a presence-conjunction procedure.
PhiResult phi_reduction(const std::set<int>& universe, const SetFamily& family);

}  // namespace construe

#endif
