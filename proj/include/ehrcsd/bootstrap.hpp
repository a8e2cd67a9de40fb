#pragma once

#include "ehrcsd/catalog.hpp"
#include "ehrcsd/cohort.hpp"
#include "ehrcsd/graph.hpp"
#include "ehrcsd/parallel.hpp"
#include "ehrcsd/pipeline.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ehrcsd {

/// Orientation counts for an unordered pair {i, j}, i before j in pool order.
struct PairCounts {
  std::size_t ij = 0;
  std::size_t ji = 0;
  std::size_t unoriented = 0;

  std::size_t total() const { return ij + ji + unoriented; }
  std::size_t oriented() const { return ij + ji; }
  PairCounts swapped() const { return {ji, ij, unoriented}; }
  bool operator==(const PairCounts&) const = default;
};

struct IterationFailure {
  std::size_t iteration = 0;
  std::string message;

  bool operator==(const IterationFailure&) const = default;
};

/// Graphs pooled over bootstrap iterations.
///
/// Nodes are kept sorted by id and pairs are keyed (i, j) with i < j, so the
/// pool does not depend on the node order of the graphs added to it.
class EdgePool {
public:
  EdgePool() = default;
  EdgePool(std::vector<std::string> nodes, std::size_t iterations);

  const std::vector<std::string>& nodes() const { return nodes_; }
  /// B, the number of iterations requested (failed ones included).
  std::size_t iterations() const { return iterations_; }
  const std::map<std::pair<std::size_t, std::size_t>, PairCounts>& counts() const { return counts_; }
  const std::vector<IterationFailure>& failures() const { return failures_; }

  /// Counts oriented as (a, b); zero when the pair was never reported.
  PairCounts at(std::string_view a, std::string_view b) const;

  /// Adds every edge of the graph once. Throws DataError for a node the pool lacks.
  void add(const CausalGraph& graph);
  void add_counts(std::string_view a, std::string_view b, PairCounts counts);
  void record_failure(std::size_t iteration, std::string message);
  /// Count addition; nodes and iterations must match.
  void merge(const EdgePool& other);

  /// Throws ValidationError if a pair is reported more than B times.
  void validate() const;

  bool operator==(const EdgePool&) const = default;

private:
  std::size_t index(std::string_view node) const;

  std::vector<std::string> nodes_;
  std::size_t iterations_ = 0;
  std::map<std::pair<std::size_t, std::size_t>, PairCounts> counts_;
  std::vector<IterationFailure> failures_;
};

struct BootstrapOptions {
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  /// Runs iterations concurrently; each iteration itself is serial.
  Execution execution = Execution::serial;
};

/// Resamples patients with replacement to the cohort size and re-runs the
/// whole pipeline, inclusion included, B times. Iteration b draws from
/// derive_seed(seed, b). Failing iterations are recorded in the pool.
EdgePool bootstrap_run(std::span<const EventStream> streams, const CrossSectionSpec& spec,
                       const InclusionCriteria& inclusion, const ConditionCatalog& catalog,
                       const AlgorithmConfig& config, const BootstrapOptions& options);

/// The resample used by iteration `iteration`, exposed for testing.
std::vector<std::size_t> resample_indices(std::size_t n, std::uint64_t seed, std::size_t iteration);

} // namespace ehrcsd
