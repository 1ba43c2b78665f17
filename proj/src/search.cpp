#include "construe/search.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace construe {

std::string render_focus(const Interpretation& I) {
  std::ostringstream os;
  bool first = true;
  for (const auto& e : I.focus()) {
    if (!first) os << " | ";
    first = false;
    if (std::holds_alternative<ObsRef>(e)) {
      const ObsRef o = std::get<ObsRef>(e);
      os << (o.kind == ObsRef::Kind::Initial ? "o" : "g") << o.index << ":"
         << I.obs_observable(o);
    } else {
      const FindingRef f = std::get<FindingRef>(e);
      os << "m[" << f.hyp << "." << f.slot
         << "]:" << I.hypotheses().at(f.hyp).slots.at(f.slot).observable;
    }
  }
  return os.str();
}

namespace {

struct Node {
  std::shared_ptr<const Interpretation> interp;
  HeuristicVector hv;
  bool complete = false;
  std::unique_ptr<DescendantCursor> cursor;
};

bool open_before(const Node& a, const Node& b) {
  const int c = compare_heuristic(a.hv, b.hv);
  if (c != 0) return c < 0;
  return a.interp->node_id < b.interp->node_id;
}

bool final_before(const Node& a, const Node& b) {
  const int c = compare_heuristic(a.hv, b.hv);
  if (c != 0) return c < 0;
  if (a.complete != b.complete) return a.complete;
  return a.interp->node_id < b.interp->node_id;
}

}  // namespace

SearchResult construe_search(std::shared_ptr<const InterpretationProblem> ip,
                             const SearchConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  SearchResult res;
  res.stats.k = cfg.k.value_or(std::max(1, ip->kb.default_k()));
  const int K = std::max(1, res.stats.k);

  std::int64_t next_id = 0;
  auto make_node = [&](Interpretation&& interp) {
    interp.node_id = next_id++;
    auto node = std::make_unique<Node>();
    node->interp = std::make_shared<const Interpretation>(std::move(interp));
    node->hv = node->interp->heuristic();
    node->complete = node->interp->all_hypotheses_complete();
    node->cursor = std::make_unique<DescendantCursor>(node->interp);
    ++res.stats.nodes_created;
    res.trace.push_back(TraceRecord{
        node->interp->node_id, node->interp->parent_id,
        op_name(node->interp->delta.op), node->interp->delta.detail,
        render_focus(*node->interp), node->hv.sigma(), node->hv.covered,
        node->hv.abstractable, node->hv.complexity, node->complete});
    return node;
  };

  auto is_solution = [](const Node& n) {
    return n.hv.covered == n.hv.abstractable && n.complete;
  };

  std::vector<std::unique_ptr<Node>> open;
  std::vector<std::unique_ptr<Node>> closed;

  open.push_back(make_node(Interpretation::root(ip)));
  if (is_solution(*open.front())) {
    res.stats.solution = true;
    res.best = open.front()->interp;
    return res;
  }

  auto out_of_budget = [&] {
    if (res.stats.nodes_created >= cfg.max_nodes) return true;
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        Clock::now() - t0)
                        .count();
    return ms >= cfg.time_budget_ms;
  };

  std::shared_ptr<const Interpretation> solution;
  while (!open.empty()) {
    if (out_of_budget()) {
      res.stats.truncated = true;
      break;
    }
    ++res.stats.iterations;
    std::sort(open.begin(), open.end(),
              [](const auto& a, const auto& b) { return open_before(*a, *b); });
    res.stats.max_open = std::max(res.stats.max_open, open.size());

    const std::size_t width = std::min<std::size_t>(K, open.size());
    std::vector<Node*> selected;
    for (std::size_t i = 0; i < width; ++i) selected.push_back(open[i].get());

    std::vector<std::unique_ptr<Node>> born;
    std::vector<Node*> exhausted;
    for (Node* node : selected) {
      ++res.stats.nodes_expanded;
      std::vector<Rejection> rejs;
      auto child = node->cursor->next(&rejs);
      for (auto& r : rejs)
        res.rejections.push_back({node->interp->node_id, op_name(r.op),
                                  std::move(r.description),
                                  std::move(r.cause)});
      if (!child) {
        exhausted.push_back(node);
        continue;
      }
      child->parent_id = node->interp->node_id;
      auto cn = make_node(std::move(*child));
      if (is_solution(*cn)) {
        solution = cn->interp;
        break;
      }
      born.push_back(std::move(cn));
    }
    if (solution) break;

    for (Node* node : exhausted) {
      auto it = std::find_if(open.begin(), open.end(),
                             [&](const auto& p) { return p.get() == node; });
      closed.push_back(std::move(*it));
      open.erase(it);
    }
    for (auto& b : born) open.push_back(std::move(b));
  }

  if (solution) {
    res.stats.solution = true;
    res.best = solution;
    return res;
  }

  // No full cover: the minimum of closed (plus, after truncation, whatever is
  // still open) under the heuristic vector.
  Node* best = nullptr;
  for (auto& n : closed)
    if (!best || final_before(*n, *best)) best = n.get();
  if (res.stats.truncated || !best)
    for (auto& n : open)
      if (!best || final_before(*n, *best)) best = n.get();
  res.best = best ? best->interp : nullptr;
  return res;
}

}  // namespace construe
