#ifndef CONSTRUE_SEARCH_HPP
#define CONSTRUE_SEARCH_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "construe/interpretation.hpp"
#include "construe/reasoning.hpp"

namespace construe {

struct SearchConfig {
  std::optional<int> k;  // nullopt: auto from the abstraction relation
  std::int64_t max_nodes = 200000;
  std::int64_t time_budget_ms = 60000;
  bool salient_attention = false;
};

struct TraceRecord {
  std::int64_t node_id = 0;
  std::int64_t parent_id = -1;
  std::string op;
  std::string detail;
  std::string focus;
  double sigma = 0.0;
  std::int64_t covered = 0;
  std::int64_t abstractable = 0;
  std::int64_t kappa = 0;
  bool complete = false;
};

struct RejectionRecord {
  std::int64_t parent_id = -1;
  std::string op;
  std::string detail;
  std::string cause;
};

struct SearchStats {
  std::int64_t nodes_created = 0;
  std::int64_t nodes_expanded = 0;  // next() calls
  std::int64_t iterations = 0;
  std::size_t max_open = 0;
  bool truncated = false;
  bool solution = false;  // full cover with complete hypotheses
  int k = 1;
};

struct SearchResult {
  std::shared_ptr<const Interpretation> best;
  SearchStats stats;
  std::vector<TraceRecord> trace;
  std::vector<RejectionRecord> rejections;
};

std::string render_focus(const Interpretation& I);

// Algorithm: K-best-first search with partial expansion over interpretation
// nodes. Returns the first interpretation reaching full coverage with every
// hypothesis carrying complete evidence; otherwise the minimum of the closed
// list under the heuristic vector (FIFO among equals, complete interpretations
// preferred). On budget exhaustion returns best-so-far with truncated set.
SearchResult construe_search(std::shared_ptr<const InterpretationProblem> ip,
                             const SearchConfig& cfg = {});

}  // namespace construe

#endif
