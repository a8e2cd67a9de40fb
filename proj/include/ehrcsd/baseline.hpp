#pragma once

#include "ehrcsd/cohort.hpp"
#include "ehrcsd/graph.hpp"
#include "ehrcsd/logistic.hpp"
#include "ehrcsd/parallel.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ehrcsd {

/// Binary patient x condition matrix; row r's value for column v is bit v of
/// values[r]. When `eligible` is non-empty, row r only enters column v's own
/// regression if bit v of eligible[r] is set.
struct BinaryMatrix {
  std::vector<std::string> columns;
  std::vector<std::uint64_t> values;
  std::vector<std::uint64_t> eligible;

  std::size_t n_rows() const { return values.size(); }
  std::size_t n_columns() const { return columns.size(); }
};

struct BaselineOptions {
  /// Per-edge penalty multiplier on ln(n).
  double penalty = 2.0;
  LogisticOptions logistic;
  Execution execution = Execution::serial;
  /// Reversals that change the score by less than this leave the edge unoriented.
  double orientation_tolerance = 1e-6;
  /// Score gains closer than this are ties, broken by (parent id, child id).
  double tie_tolerance = 1e-9;
};

struct BaselineResult {
  CausalGraph pattern;
  /// -2 loglik + penalty * ln(n) * edges of the final DAG (before unorienting).
  double score = 0.0;
  std::size_t forward_moves = 0;
  std::size_t backward_moves = 0;
};

/// Greedy DAG hill-climb over per-node logistic models: best single
/// additions, then best single deletions, then every edge whose reversal
/// leaves the score unchanged is reported unoriented. A transparent stand-in
/// for an equivalence-class search, not a reimplementation of one.
///
/// Throws DataError for a matrix with no rows or no columns.
BaselineResult hillclimb(const BinaryMatrix& matrix, const BaselineOptions& options = {});

enum class BaselineMode {
  /// Presence (incident or pre-existing) at cross section 2, every row.
  raw,
  /// Same indicators, but a condition's own regression only uses its at-risk
  /// patients, so its outcome is incidence in cross section 2.
  transformed,
};

std::string_view to_string(BaselineMode mode);
BaselineMode parse_baseline_mode(std::string_view token);

BinaryMatrix baseline_matrix(const TransformedDataset& data, BaselineMode mode);

/// Runs the hill-climb on the requested view of the data. An empty dataset
/// yields an empty pattern.
CausalGraph run_mode(const TransformedDataset& data, BaselineMode mode, const BaselineOptions& options = {});

} // namespace ehrcsd
