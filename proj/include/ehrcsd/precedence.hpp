#pragma once

#include "ehrcsd/cohort.hpp"
#include "ehrcsd/parallel.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ehrcsd {

/// Onset-order counts for a pair (i, j) among patients who have both
/// conditions at cross section 2 and are observed for both at cross section 1.
struct PrecedenceCounts {
  /// i present at cross section 1, j absent.
  std::size_t n_i_first = 0;
  /// j present at cross section 1, i absent.
  std::size_t n_j_first = 0;
  /// Size of the conditioning set.
  std::size_t n_both_cs2 = 0;

  /// n_i_first / n_j_first; +inf when only i comes first, NaN for 0/0.
  double ratio() const;
  PrecedenceCounts swapped() const { return {n_j_first, n_i_first, n_both_cs2}; }

  bool operator==(const PrecedenceCounts&) const = default;
};

enum class PrecedenceDecision { i_precedes_j, j_precedes_i, neither };

std::string_view to_string(PrecedenceDecision d);

PrecedenceCounts precedence_counts(const TransformedDataset& data, std::size_t i, std::size_t j);
PrecedenceCounts precedence_counts(const TransformedDataset& data, std::string_view i, std::string_view j);

/// Applies the ratio threshold w (> 0) in both directions.
PrecedenceDecision precedes(const PrecedenceCounts& counts, double w);

/// Two-sided p-value of the pooled two-proportion z-test comparing
/// n_i_first / n_both with n_j_first / n_both. Returns 1 when undefined.
double two_proportion_p_value(const PrecedenceCounts& counts);

struct CandidatePair {
  std::size_t parent = 0;
  std::size_t child = 0;
  PrecedenceCounts counts;  // oriented: n_i_first counts parent-first
  double ratio = 0.0;
  double p_value = 1.0;

  bool operator==(const CandidatePair&) const = default;
};

/// Ordered pairs (parent, child) whose precedence ratio exceeds w.
struct CandidateSet {
  double w = 1.5;
  std::optional<double> alpha;
  std::vector<std::string> conditions;
  /// Sorted by (parent id, child id).
  std::vector<CandidatePair> pairs;

  bool contains(std::size_t parent, std::size_t child) const;
  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
};

/// One row per unordered pair (i < j in dataset order).
struct PrecedenceRow {
  std::size_t i = 0;
  std::size_t j = 0;
  PrecedenceCounts counts;
  PrecedenceDecision decision = PrecedenceDecision::neither;
  double p_value = 1.0;
};

std::vector<PrecedenceRow> precedence_table(const TransformedDataset& data, double w,
                                            std::optional<double> alpha = std::nullopt,
                                            Execution execution = Execution::serial);

/// Throws ConfigError when w < 1 or alpha is outside (0, 1).
CandidateSet build_candidate_set(const TransformedDataset& data, double w, std::optional<double> alpha = std::nullopt,
                                 Execution execution = Execution::serial);

} // namespace ehrcsd
