#include "ehrcsd/search.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ehrcsd {

std::string_view to_string(Strategy s) { return s == Strategy::best_first ? "best_first" : "sweep"; }

Strategy parse_strategy(std::string_view token) {
  if (token == "best_first") return Strategy::best_first;
  if (token == "sweep") return Strategy::sweep;
  throw ConfigError("unknown search strategy '" + std::string(token) + "'");
}

std::string_view to_string(Decision d) {
  switch (d) {
  case Decision::accepted: return "accepted";
  case Decision::rejected: return "rejected";
  case Decision::cycle_skipped: return "cycle_skipped";
  }
  return "?";
}

namespace {

struct Candidate {
  std::size_t parent;
  std::size_t child;
  double delta = 0.0;
  double loglik_after = 0.0;
  bool dirty = true;
};

std::vector<Candidate> resolve(const TransformedDataset& data, const CandidateSet& candidates) {
  std::vector<Candidate> out;
  out.reserve(candidates.pairs.size());
  for (const auto& pair : candidates.pairs) {
    if (pair.parent >= candidates.conditions.size() || pair.child >= candidates.conditions.size()) {
      throw DataError("candidate pair index out of range");
    }
    const auto p = data.find_condition(candidates.conditions[pair.parent]);
    const auto c = data.find_condition(candidates.conditions[pair.child]);
    if (!p || !c) {
      throw DataError("candidate references unknown condition '" +
                      (!p ? candidates.conditions[pair.parent] : candidates.conditions[pair.child]) + "'");
    }
    out.push_back({*p, *c});
  }
  const auto& names = data.conditions();
  std::sort(out.begin(), out.end(), [&](const Candidate& a, const Candidate& b) {
    return std::tie(names[a.parent], names[a.child]) < std::tie(names[b.parent], names[b.child]);
  });
  return out;
}

class SearchState {
public:
  SearchState(const Scorer& scorer, const SearchOptions& options)
      : scorer_(scorer),
        options_(options),
        graph_(scorer.data().conditions()),
        node_loglik_(scorer.data().n_conditions(), 0.0),
        penalty_(std::log(static_cast<double>(scorer.n_common()))) {
    const std::vector<std::size_t> none;
    for_each_index(options_.execution, node_loglik_.size(),
                   [&](std::size_t v) { node_loglik_[v] = scorer_.node_loglik(v, none); });
  }

  void score(Candidate& c) const {
    auto parents = graph_.parents(c.child);
    parents.insert(std::upper_bound(parents.begin(), parents.end(), c.parent), c.parent);
    c.loglik_after = scorer_.node_loglik(c.child, parents);
    c.delta = 2.0 * (c.loglik_after - node_loglik_[c.child]) - penalty_;
    c.dirty = false;
  }

  void accept(const Candidate& c) {
    graph_.add_edge(c.parent, c.child);
    node_loglik_[c.child] = c.loglik_after;
  }

  CausalGraph& graph() { return graph_; }

private:
  const Scorer& scorer_;
  const SearchOptions& options_;
  CausalGraph graph_;
  std::vector<double> node_loglik_;
  double penalty_;
};

void prune_cycles(std::vector<Candidate>& remaining, const CausalGraph& graph, std::size_t round,
                  std::vector<TraceEntry>& trace) {
  std::erase_if(remaining, [&](const Candidate& c) {
    if (!graph.creates_cycle(c.parent, c.child)) return false;
    trace.push_back({round, c.parent, c.child, std::numeric_limits<double>::quiet_NaN(), Decision::cycle_skipped});
    return true;
  });
}

void run_best_first(SearchState& state, std::vector<Candidate> remaining, const SearchOptions& options,
                    SearchResult& result) {
  for (std::size_t round = 0;; ++round) {
    prune_cycles(remaining, state.graph(), round, result.trace);
    if (remaining.empty()) break;

    std::vector<std::size_t> dirty;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      if (remaining[k].dirty) dirty.push_back(k);
    }
    for_each_index(options.execution, dirty.size(), [&](std::size_t d) { state.score(remaining[dirty[d]]); });
    result.evaluations += dirty.size();

    // Candidates are in (parent, child) name order, so the first of a group of
    // tied deltas wins.
    std::size_t best = 0;
    for (std::size_t k = 1; k < remaining.size(); ++k) {
      if (remaining[k].delta > remaining[best].delta + options.tie_tolerance) best = k;
    }
    const bool accept = remaining[best].delta > 0.0;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      const auto& c = remaining[k];
      result.trace.push_back(
          {round, c.parent, c.child, c.delta, accept && k == best ? Decision::accepted : Decision::rejected});
    }
    if (!accept) break;

    const auto chosen = remaining[best];
    state.accept(chosen);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    for (auto& c : remaining) {
      if (c.child == chosen.child) c.dirty = true;
    }
  }
}

void run_sweep(SearchState& state, std::vector<Candidate> remaining, SearchResult& result) {
  for (std::size_t round = 0;; ++round) {
    bool added = false;
    for (auto it = remaining.begin(); it != remaining.end();) {
      if (state.graph().creates_cycle(it->parent, it->child)) {
        result.trace.push_back(
            {round, it->parent, it->child, std::numeric_limits<double>::quiet_NaN(), Decision::cycle_skipped});
        it = remaining.erase(it);
        continue;
      }
      state.score(*it);
      ++result.evaluations;
      if (it->delta > 0.0) {
        result.trace.push_back({round, it->parent, it->child, it->delta, Decision::accepted});
        state.accept(*it);
        it = remaining.erase(it);
        added = true;
      } else {
        result.trace.push_back({round, it->parent, it->child, it->delta, Decision::rejected});
        ++it;
      }
    }
    if (!added || remaining.empty()) break;
  }
}

} // namespace

SearchResult discover(const Scorer& scorer, const CandidateSet& candidates, const SearchOptions& options) {
  const auto& data = scorer.data();
  if (data.n_common() == 0 && !candidates.empty()) {
    throw DataError("cannot search: no patients observed in both cross sections");
  }
  auto remaining = resolve(data, candidates);
  SearchResult result;
  if (remaining.empty()) {
    result.graph = CausalGraph(data.conditions());
    if (data.n_common() > 0) result.score = bic(scorer, result.graph);
    return result;
  }
  SearchState state(scorer, options);
  if (options.strategy == Strategy::best_first) {
    run_best_first(state, std::move(remaining), options, result);
  } else {
    run_sweep(state, std::move(remaining), result);
  }
  result.graph = std::move(state.graph());
  result.score = bic(scorer, result.graph);
  return result;
}

SearchResult discover(const TransformedDataset& data, const CandidateSet& candidates, const SearchOptions& options) {
  const Scorer scorer(data, options.scoring, options.execution);
  return discover(scorer, candidates, options);
}

namespace {

CausalGraph without_edge(const CausalGraph& graph, std::size_t from, std::size_t to) {
  CausalGraph copy = graph;
  copy.remove_edge(from, to);
  return copy;
}

std::string fmt(double v) { return text::format_double(v, 6); }

} // namespace

EdgeInterpretation interpret_edge(const CausalGraph& graph, const TransformedDataset& data,
                                  const CandidateSet& candidates, std::string_view parent, std::string_view child,
                                  const ScoringOptions& options) {
  const auto from = graph.index_of(parent);
  const auto to = graph.index_of(child);
  if (!graph.has_edge(from, to)) {
    throw DataError("edge " + std::string(parent) + " -> " + std::string(child) + " is not in the graph");
  }
  const Scorer scorer(data, options);
  const CausalGraph empty(graph.nodes(), GraphMode::dag);
  const auto reduced = without_edge(graph, from, to);

  auto in_candidates = [&](std::string_view a, std::string_view b) -> const CandidatePair* {
    for (const auto& pair : candidates.pairs) {
      if (candidates.conditions[pair.parent] == a && candidates.conditions[pair.child] == b) return &pair;
    }
    return nullptr;
  };

  EdgeInterpretation out;
  out.parent = std::string(parent);
  out.child = std::string(child);

  for (const auto c : graph.parents(from)) {
    if (graph.has_edge(c, to)) out.common_parents.push_back(graph.name(c));
  }

  if (const auto* pair = in_candidates(parent, child)) {
    out.precedence = {true, pair->ratio, "precedence ratio " + fmt(pair->ratio) + " > w = " + fmt(candidates.w)};
  } else {
    out.precedence = {false, 0.0, "pair not in the candidate set"};
  }

  const double marginal = delta_bic(scorer, empty, from, to);
  out.association = {marginal > 0.0, marginal, "delta BIC with no other parents " + fmt(marginal)};

  const double adjusted = delta_bic(scorer, reduced, from, to);
  out.adjustment = {adjusted > 0.0, adjusted,
                    "delta BIC given the child's other parents " + fmt(adjusted) +
                        (out.common_parents.empty() ? std::string(" (no common parents)")
                                                    : " (common parents: " + text::join(out.common_parents, ",") + ")")};

  const bool rev_precedence = in_candidates(child, parent) != nullptr;
  const double rev_marginal = delta_bic(scorer, empty, to, from);
  bool rev_adjusted = false;
  double rev_adjusted_value = std::numeric_limits<double>::quiet_NaN();
  if (!reduced.creates_cycle(to, from)) {
    rev_adjusted_value = delta_bic(scorer, reduced, to, from);
    rev_adjusted = rev_adjusted_value > 0.0;
  }
  const bool reverse_holds = rev_precedence && rev_marginal > 0.0 && rev_adjusted;
  out.reverse_fails = {!reverse_holds, rev_marginal,
                       std::string("reverse: precedence ") + (rev_precedence ? "holds" : "fails") +
                           ", association " + fmt(rev_marginal) + ", adjusted " + fmt(rev_adjusted_value)};
  return out;
}

} // namespace ehrcsd
