#pragma once

#include "ehrcsd/baseline.hpp"
#include "ehrcsd/catalog.hpp"
#include "ehrcsd/cohort.hpp"
#include "ehrcsd/graph.hpp"
#include "ehrcsd/precedence.hpp"
#include "ehrcsd/search.hpp"

#include <optional>
#include <span>
#include <string_view>

namespace ehrcsd {

enum class Algorithm { proposed, baseline_raw, baseline_transformed };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view token);

struct AlgorithmConfig {
  Algorithm algorithm = Algorithm::proposed;
  double w = 1.5;
  std::optional<double> alpha;
  SearchOptions search;
  BaselineOptions baseline;
};

struct PipelineResult {
  ExclusionReport exclusions;
  TransformedDataset data;
  /// Empty for the baseline arms.
  CandidateSet candidates;
  CausalGraph graph;
  /// Trace and score of the proposed search; empty for the baseline arms.
  std::vector<TraceEntry> trace;
  std::optional<ScoreReport> score;
};

/// Structure learning on already transformed data.
CausalGraph run_algorithm(const TransformedDataset& data, const AlgorithmConfig& config);

/// inclusion -> transform -> (candidate set -> search | baseline).
PipelineResult run_pipeline(std::span<const EventStream> streams, const CrossSectionSpec& spec,
                            const InclusionCriteria& inclusion, const ConditionCatalog& catalog,
                            const AlgorithmConfig& config);

} // namespace ehrcsd
