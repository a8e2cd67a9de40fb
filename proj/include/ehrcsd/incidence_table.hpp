#pragma once

#include "ehrcsd/logistic.hpp"
#include "ehrcsd/parallel.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ehrcsd {

/// Rows sharing one predictor bit pattern, with their outcome tally.
struct PatternCount {
  std::uint64_t predictors = 0;
  std::uint32_t trials = 0;
  std::uint32_t successes = 0;
};

/// Per-child compression of binary data for logistic fits.
///
/// Row r is eligible as an observation of child v iff bit v of eligible[r] is
/// set; its outcome is bit v of outcomes[r] and its predictors are the bits of
/// predictors[r] (bit v cleared). Rows with identical predictor patterns are
/// merged, so a fit costs O(distinct patterns) regardless of row count.
class IncidenceTable {
public:
  IncidenceTable() = default;
  IncidenceTable(std::size_t n_nodes, std::span<const std::uint64_t> predictors,
                 std::span<const std::uint64_t> outcomes, std::span<const std::uint64_t> eligible,
                 Execution execution = Execution::serial);

  std::size_t n_nodes() const { return patterns_.size(); }
  /// Number of eligible rows for the child.
  std::size_t rows(std::size_t child) const { return rows_[child]; }
  const std::vector<PatternCount>& patterns(std::size_t child) const { return patterns_[child]; }

  /// Grouped cells for child ~ intercept + parents. Design column a + 1 is the
  /// indicator of parents[a]; cells are ordered by the parent bit pattern.
  BinomialCells cells(std::size_t child, std::span<const std::size_t> parents) const;

private:
  std::vector<std::vector<PatternCount>> patterns_;
  std::vector<std::size_t> rows_;
};

} // namespace ehrcsd
