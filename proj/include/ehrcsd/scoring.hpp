#pragma once

#include "ehrcsd/cohort.hpp"
#include "ehrcsd/graph.hpp"
#include "ehrcsd/incidence_table.hpp"
#include "ehrcsd/logistic.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ehrcsd {

struct NodeModel {
  std::string child;
  std::vector<std::string> parents;
  double intercept = 0.0;
  std::vector<double> coefficients;
  /// Age (standardized) and male-sex coefficients; empty unless demographics
  /// are included.
  std::vector<double> covariate_coefficients;
  double loglik = 0.0;
  std::size_t n_fit = 0;
  bool converged = false;
};

struct ScoringOptions {
  /// Adds age and sex as always-present covariates. They are not edges and
  /// carry no penalty.
  bool include_demographics = false;
  LogisticOptions logistic;
};

/// Fits child-at-cross-section-2 on parents-at-cross-section-1 over the
/// child's at-risk set. Immutable; safe to share between threads.
class Scorer {
public:
  explicit Scorer(const TransformedDataset& data, ScoringOptions options = {},
                  Execution execution = Execution::serial);

  const TransformedDataset& data() const { return *data_; }
  const ScoringOptions& options() const { return options_; }
  std::size_t n_common() const { return data_->n_common(); }
  std::size_t at_risk_size(std::size_t child) const { return table_.rows(child); }

  /// Throws DataError when the at-risk set is empty or child is a parent.
  NodeModel fit(std::size_t child, std::span<const std::size_t> parents) const;
  /// Fitted log-likelihood; 0 when the at-risk set is empty.
  double node_loglik(std::size_t child, std::span<const std::size_t> parents) const;

private:
  BinomialCells covariate_cells(std::size_t child, std::span<const std::size_t> parents) const;

  const TransformedDataset* data_;
  ScoringOptions options_;
  IncidenceTable table_;
  double age_mean_ = 0.0;
  double age_scale_ = 1.0;
};

NodeModel fit_logistic(const TransformedDataset& data, std::string_view child,
                       const std::vector<std::string>& parents, const ScoringOptions& options = {});

struct ScoreReport {
  double total_loglik = 0.0;
  std::size_t n_common = 0;
  std::size_t n_edges = 0;
  double bic = 0.0;
  /// Conditions that contributed 0 because nobody was at risk.
  std::vector<std::string> empty_at_risk;
};

/// -2 * loglik + ln(n_common) * n_edges.
double bic_value(double total_loglik, std::size_t n_common, std::size_t n_edges);

double graph_loglik(const Scorer& scorer, const CausalGraph& graph);
double graph_loglik(const TransformedDataset& data, const CausalGraph& graph, const ScoringOptions& options = {});

/// Throws DataError when n_common is 0.
ScoreReport bic(const Scorer& scorer, const CausalGraph& graph);
ScoreReport bic(const TransformedDataset& data, const CausalGraph& graph, const ScoringOptions& options = {});

/// BIC(graph) - BIC(graph + from -> to). Only the child's model is refit.
double delta_bic(const Scorer& scorer, const CausalGraph& graph, std::size_t from, std::size_t to);
double delta_bic(const TransformedDataset& data, const CausalGraph& graph, std::string_view from,
                 std::string_view to, const ScoringOptions& options = {});

/// Dataset condition indices of the graph's parents of `node`, sorted.
std::vector<std::size_t> data_parents(const TransformedDataset& data, const CausalGraph& graph, std::size_t node);

} // namespace ehrcsd
