#pragma once

#include "ehrcsd/bootstrap.hpp"
#include "ehrcsd/catalog.hpp"
#include "ehrcsd/cohort.hpp"
#include "ehrcsd/graph.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ehrcsd {

using NamedEdge = std::pair<std::string, std::string>;

// ---- directional stability ------------------------------------------------

struct StabilityOptions {
  /// A pair is frequent when reported (either orientation) in at least this share of B.
  double frequent_share = 0.5;
  /// Minority orientation share of the oriented reports for frequent-ambiguous.
  double minority_share = 0.3;
};

struct StabilityRow {
  std::string i;
  std::string j;
  PairCounts counts;
  bool ambiguous = false;
  bool frequent_ambiguous = false;
};

struct StabilityReport {
  std::size_t iterations = 0;
  /// Pairs reported at least once.
  std::size_t pooled_edges = 0;
  std::size_t ambiguous = 0;
  std::size_t frequent_ambiguous = 0;
  double ambiguous_fraction = 0.0;
  double frequent_ambiguous_fraction = 0.0;
  std::vector<StabilityRow> rows;
};

bool is_ambiguous(const PairCounts& c);
bool is_frequent_ambiguous(const PairCounts& c, std::size_t iterations, const StabilityOptions& options = {});

/// Throws ConfigError when the pool has no iterations.
StabilityReport stability(const EdgePool& pool, const StabilityOptions& options = {});

// ---- category aggregation -------------------------------------------------

struct CategoryEdge {
  /// Dominant direction; for ties, from < to by id.
  std::string from;
  std::string to;
  std::size_t dominant_count = 0;
  std::size_t reverse_count = 0;
  double confidence = 0.0;
  bool bold = false;
  bool tie = false;
};

struct CategoryGraph {
  std::vector<std::string> nodes;
  /// Sorted by (from, to).
  std::vector<CategoryEdge> edges;
};

/// Oriented condition-level reports summed per category pair; within-category
/// and unoriented reports are dropped. Throws DataError for a condition the
/// catalog lacks.
CategoryGraph aggregate_categories(const EdgePool& pool, const ConditionCatalog& catalog, double bold_threshold = 0.8);
CategoryGraph aggregate_categories(const CausalGraph& graph, const ConditionCatalog& catalog,
                                   double bold_threshold = 0.8);

std::string category_dot(const CategoryGraph& graph);

// ---- heuristics -----------------------------------------------------------

struct HeuristicResult {
  std::string name;
  std::size_t applicable = 0;
  std::size_t violating = 0;
  /// Empty when nothing is applicable.
  std::optional<double> proportion;
  std::vector<NamedEdge> violations;
};

struct HeuristicReport {
  /// H1 .. H5.
  std::array<HeuristicResult, 5> results;
};

/// Checks every oriented edge against the five clinical heuristics. Throws
/// DataError for a graph node the catalog lacks.
HeuristicReport check_heuristics(const CausalGraph& graph, const ConditionCatalog& catalog);

// ---- completeness ---------------------------------------------------------

enum class EdgeClass { shared, reversed, both_orientations, explained, unexplained };

std::string_view to_string(EdgeClass c);

struct CompletenessReport {
  /// Indexed by EdgeClass. A pair present in both orientations in the
  /// reference is a single entry.
  std::array<std::vector<NamedEdge>, 5> edges;

  std::size_t count(EdgeClass c) const { return edges[static_cast<std::size_t>(c)].size(); }
  std::size_t total() const;
};

/// Throws DataError unless both graphs have the same node set.
CompletenessReport completeness_partition(const CausalGraph& reference, const CausalGraph& subject);

// ---- concordance ----------------------------------------------------------

struct ConcordanceRow {
  std::string i;
  std::string j;
  PairCounts a;
  PairCounts b;
  bool qualifies_a = false;
  bool qualifies_b = false;
  bool agree = false;
  /// Precedence ratio n_i_first / n_j_first per dataset, when supplied.
  std::optional<double> ratio_a;
  std::optional<double> ratio_b;
};

struct ConcordanceReport {
  std::vector<std::string> shared_nodes;
  double threshold = 2.0 / 3.0;
  std::vector<ConcordanceRow> rows;
  std::size_t agreeing = 0;
  /// agreeing / rows; 1 when nothing qualifies.
  double agreement = 1.0;
};

/// A pair qualifies when its oriented reports reach threshold * B in either
/// pool; it agrees when it qualifies in both with the same majority
/// orientation. Throws DataError when the pools share no conditions.
ConcordanceReport concordance(const EdgePool& a, const EdgePool& b, double threshold = 2.0 / 3.0,
                              const TransformedDataset* data_a = nullptr, const TransformedDataset* data_b = nullptr);

} // namespace ehrcsd
