#pragma once

#include "ehrcsd/graph.hpp"
#include "ehrcsd/precedence.hpp"
#include "ehrcsd/scoring.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace ehrcsd {

enum class Strategy {
  /// Each round scores every remaining candidate and adds the best one.
  best_first,
  /// Walks the candidates in order, adding each improving one immediately;
  /// repeats until a full pass adds nothing.
  sweep,
};

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view token);

enum class Decision { accepted, rejected, cycle_skipped };

std::string_view to_string(Decision d);

struct TraceEntry {
  std::size_t round = 0;
  std::size_t parent = 0;
  std::size_t child = 0;
  /// NaN for cycle-skipped candidates, which are never scored.
  double delta_bic = 0.0;
  Decision decision = Decision::rejected;
};

struct SearchOptions {
  Strategy strategy = Strategy::best_first;
  ScoringOptions scoring;
  /// Parallelizes the per-round delta evaluations of best_first.
  Execution execution = Execution::serial;
  /// Deltas closer than this are ties, broken by (parent id, child id).
  double tie_tolerance = 1e-9;
};

struct SearchResult {
  CausalGraph graph;
  std::vector<TraceEntry> trace;
  ScoreReport score;
  /// Node-model refits performed while scoring candidates.
  std::size_t evaluations = 0;
};

/// Greedy precedence-constrained construction of the causal DAG. Only pairs
/// from `candidates` are ever added, in their precedence orientation.
SearchResult discover(const Scorer& scorer, const CandidateSet& candidates, const SearchOptions& options = {});
SearchResult discover(const TransformedDataset& data, const CandidateSet& candidates,
                      const SearchOptions& options = {});

struct CheckOutcome {
  bool pass = false;
  double value = 0.0;
  std::string evidence;
};

/// Evidence that parent -> child reads as "parent causes child": precedence,
/// association, survival of adjustment for the child's other parents (common
/// parents in particular), and failure of the reverse reading.
struct EdgeInterpretation {
  std::string parent;
  std::string child;
  CheckOutcome precedence;
  CheckOutcome association;
  CheckOutcome adjustment;
  CheckOutcome reverse_fails;
  std::vector<std::string> common_parents;

  bool all_pass() const { return precedence.pass && association.pass && adjustment.pass && reverse_fails.pass; }
};

/// Throws DataError if the edge is not in the graph.
EdgeInterpretation interpret_edge(const CausalGraph& graph, const TransformedDataset& data,
                                  const CandidateSet& candidates, std::string_view parent, std::string_view child,
                                  const ScoringOptions& options = {});

} // namespace ehrcsd
