#include "ehrcsd/scoring.hpp"

#include "ehrcsd/error.hpp"

#include <algorithm>
#include <cmath>

namespace ehrcsd {

namespace {

IncidenceTable build_table(const TransformedDataset& data, Execution execution) {
  const auto n = data.n_patients();
  std::vector<std::uint64_t> predictors(n), outcomes(n), eligible(n);
  for (std::size_t p = 0; p < n; ++p) {
    predictors[p] = data.present1(p);
    outcomes[p] = data.incident2(p);
    eligible[p] = data.at_risk(p);
  }
  return IncidenceTable(data.n_conditions(), predictors, outcomes, eligible, execution);
}

void check_parents(const TransformedDataset& data, std::size_t child, std::span<const std::size_t> parents) {
  if (child >= data.n_conditions()) {
    throw DataError("child index out of range");
  }
  for (const auto p : parents) {
    if (p >= data.n_conditions()) throw DataError("parent index out of range");
    if (p == child) throw DataError("condition '" + data.conditions()[child] + "' listed as its own parent");
  }
}

} // namespace

Scorer::Scorer(const TransformedDataset& data, ScoringOptions options, Execution execution)
    : data_(&data), options_(options), table_(build_table(data, execution)) {
  if (options_.include_demographics && data.n_patients() > 0) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& d : data.demographics()) {
      sum += d.age;
      sum_sq += d.age * d.age;
    }
    const auto n = static_cast<double>(data.n_patients());
    age_mean_ = sum / n;
    const double var = sum_sq / n - age_mean_ * age_mean_;
    age_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
  }
}

BinomialCells Scorer::covariate_cells(std::size_t child, std::span<const std::size_t> parents) const {
  const std::uint64_t bit = std::uint64_t{1} << child;
  const auto k = static_cast<Eigen::Index>(parents.size());
  const auto rows = static_cast<Eigen::Index>(table_.rows(child));
  BinomialCells cells;
  cells.design = Eigen::MatrixXd::Zero(rows, k + 3);
  cells.trials = Eigen::VectorXd::Ones(rows);
  cells.successes = Eigen::VectorXd::Zero(rows);
  Eigen::Index r = 0;
  for (std::size_t p = 0; p < data_->n_patients(); ++p) {
    if ((data_->at_risk(p) & bit) == 0) continue;
    cells.design(r, 0) = 1.0;
    for (Eigen::Index a = 0; a < k; ++a) {
      cells.design(r, a + 1) = static_cast<double>((data_->present1(p) >> parents[static_cast<std::size_t>(a)]) & 1U);
    }
    const auto& demo = data_->demographics()[p];
    cells.design(r, k + 1) = (demo.age - age_mean_) / age_scale_;
    cells.design(r, k + 2) = demo.male ? 1.0 : 0.0;
    cells.successes[r] = static_cast<double>((data_->incident2(p) >> child) & 1U);
    ++r;
  }
  return cells;
}

NodeModel Scorer::fit(std::size_t child, std::span<const std::size_t> parents) const {
  check_parents(*data_, child, parents);
  if (table_.rows(child) == 0) {
    throw DataError("empty at-risk set for '" + data_->conditions()[child] + "'");
  }
  const auto cells = options_.include_demographics ? covariate_cells(child, parents) : table_.cells(child, parents);
  const auto result = fit_binomial_logistic(cells, options_.logistic);

  NodeModel model;
  model.child = data_->conditions()[child];
  for (const auto p : parents) model.parents.push_back(data_->conditions()[p]);
  model.intercept = result.beta[0];
  for (std::size_t a = 0; a < parents.size(); ++a) {
    model.coefficients.push_back(result.beta[static_cast<Eigen::Index>(a + 1)]);
  }
  for (Eigen::Index c = static_cast<Eigen::Index>(parents.size()) + 1; c < result.beta.size(); ++c) {
    model.covariate_coefficients.push_back(result.beta[c]);
  }
  model.loglik = result.loglik;
  model.n_fit = table_.rows(child);
  model.converged = result.converged;
  return model;
}

double Scorer::node_loglik(std::size_t child, std::span<const std::size_t> parents) const {
  check_parents(*data_, child, parents);
  if (table_.rows(child) == 0) return 0.0;
  const auto cells = options_.include_demographics ? covariate_cells(child, parents) : table_.cells(child, parents);
  return fit_binomial_logistic(cells, options_.logistic).loglik;
}

NodeModel fit_logistic(const TransformedDataset& data, std::string_view child,
                       const std::vector<std::string>& parents, const ScoringOptions& options) {
  std::vector<std::size_t> idx;
  for (const auto& p : parents) idx.push_back(data.condition_index(p));
  return Scorer(data, options).fit(data.condition_index(child), idx);
}

double bic_value(double total_loglik, std::size_t n_common, std::size_t n_edges) {
  return -2.0 * total_loglik + std::log(static_cast<double>(n_common)) * static_cast<double>(n_edges);
}

std::vector<std::size_t> data_parents(const TransformedDataset& data, const CausalGraph& graph, std::size_t node) {
  std::vector<std::size_t> out;
  for (const auto p : graph.parents(node)) out.push_back(data.condition_index(graph.name(p)));
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<std::size_t> graph_to_data(const TransformedDataset& data, const CausalGraph& graph) {
  if (graph.mode() != GraphMode::dag && !graph.unoriented_edges().empty()) {
    throw DataError("cannot score a pattern with unoriented edges");
  }
  std::vector<std::size_t> map(graph.node_count());
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const auto idx = data.find_condition(graph.name(v));
    if (!idx) throw DataError("graph node '" + graph.name(v) + "' is not a dataset condition");
    map[v] = *idx;
  }
  return map;
}

double total_loglik(const Scorer& scorer, const CausalGraph& graph, std::vector<std::string>* empty) {
  const auto& data = scorer.data();
  const auto map = graph_to_data(data, graph);
  std::vector<std::vector<std::size_t>> parents(data.n_conditions());
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    for (const auto p : graph.parents(v)) parents[map[v]].push_back(map[p]);
    std::sort(parents[map[v]].begin(), parents[map[v]].end());
  }
  double total = 0.0;
  for (std::size_t c = 0; c < data.n_conditions(); ++c) {
    if (scorer.at_risk_size(c) == 0) {
      if (empty) empty->push_back(data.conditions()[c]);
      continue;
    }
    total += scorer.node_loglik(c, parents[c]);
  }
  return total;
}

} // namespace

double graph_loglik(const Scorer& scorer, const CausalGraph& graph) { return total_loglik(scorer, graph, nullptr); }

double graph_loglik(const TransformedDataset& data, const CausalGraph& graph, const ScoringOptions& options) {
  return graph_loglik(Scorer(data, options), graph);
}

ScoreReport bic(const Scorer& scorer, const CausalGraph& graph) {
  if (scorer.n_common() == 0) {
    throw DataError("BIC undefined: no patients observed in both cross sections");
  }
  ScoreReport report;
  report.total_loglik = total_loglik(scorer, graph, &report.empty_at_risk);
  report.n_common = scorer.n_common();
  report.n_edges = graph.directed_edge_count();
  report.bic = bic_value(report.total_loglik, report.n_common, report.n_edges);
  return report;
}

ScoreReport bic(const TransformedDataset& data, const CausalGraph& graph, const ScoringOptions& options) {
  return bic(Scorer(data, options), graph);
}

double delta_bic(const Scorer& scorer, const CausalGraph& graph, std::size_t from, std::size_t to) {
  if (graph.has_edge(from, to)) {
    throw DataError("edge " + graph.name(from) + " -> " + graph.name(to) + " already in graph");
  }
  if (scorer.n_common() == 0) {
    throw DataError("BIC undefined: no patients observed in both cross sections");
  }
  const auto& data = scorer.data();
  const auto child = data.condition_index(graph.name(to));
  auto parents = data_parents(data, graph, to);
  const double before = scorer.node_loglik(child, parents);
  parents.push_back(data.condition_index(graph.name(from)));
  std::sort(parents.begin(), parents.end());
  const double after = scorer.node_loglik(child, parents);
  return 2.0 * (after - before) - std::log(static_cast<double>(scorer.n_common()));
}

double delta_bic(const TransformedDataset& data, const CausalGraph& graph, std::string_view from,
                 std::string_view to, const ScoringOptions& options) {
  return delta_bic(Scorer(data, options), graph, graph.index_of(from), graph.index_of(to));
}

} // namespace ehrcsd
