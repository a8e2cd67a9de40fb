#include "ehrcsd/baseline.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/incidence_table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ehrcsd {

std::string_view to_string(BaselineMode mode) { return mode == BaselineMode::raw ? "raw" : "transformed"; }

BaselineMode parse_baseline_mode(std::string_view token) {
  if (token == "raw") return BaselineMode::raw;
  if (token == "transformed") return BaselineMode::transformed;
  throw ConfigError("unknown baseline mode '" + std::string(token) + "'");
}

namespace {

class HillClimb {
public:
  HillClimb(const BinaryMatrix& matrix, const BaselineOptions& options)
      : matrix_(matrix),
        options_(options),
        m_(matrix.n_columns()),
        graph_(matrix.columns),
        rank_(m_),
        node_loglik_(m_, 0.0),
        penalty_(options.penalty * std::log(static_cast<double>(matrix.n_rows()))) {
    std::vector<std::uint64_t> all;
    if (matrix.eligible.empty()) all.assign(matrix.n_rows(), ~std::uint64_t{0});
    table_ = IncidenceTable(m_, matrix.values, matrix.values, matrix.eligible.empty() ? all : matrix.eligible,
                            options.execution);
    // Column order must not matter: pairs are visited and parents are fed to
    // the fitter in name order.
    std::vector<std::size_t> order(m_);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return matrix.columns[a] < matrix.columns[b]; });
    for (std::size_t r = 0; r < m_; ++r) rank_[order[r]] = r;
    for (const auto u : order) {
      for (const auto v : order) {
        if (u != v) pairs_.push_back({u, v});
      }
    }
    const std::vector<std::size_t> none;
    for_each_index(options.execution, m_, [&](std::size_t v) { node_loglik_[v] = loglik(v, none); });
  }

  void forward() {
    std::vector<Move> moves;
    for (const auto& [u, v] : pairs_) moves.push_back({u, v});
    for (std::size_t step = 0; step < m_ * m_; ++step) {
      std::vector<std::size_t> open, dirty;
      for (std::size_t k = 0; k < moves.size(); ++k) {
        const auto& mv = moves[k];
        if (graph_.adjacent(mv.from, mv.to) || graph_.creates_cycle(mv.from, mv.to)) continue;
        open.push_back(k);
        if (mv.dirty) dirty.push_back(k);
      }
      for_each_index(options_.execution, dirty.size(), [&](std::size_t d) {
        auto& mv = moves[dirty[d]];
        auto parents = graph_.parents(mv.to);
        parents.push_back(mv.from);
        mv.loglik_after = loglik(mv.to, parents);
        mv.gain = 2.0 * (mv.loglik_after - node_loglik_[mv.to]) - penalty_;
        mv.dirty = false;
      });
      const auto best = pick(moves, open);
      if (!best) break;
      const auto chosen = moves[*best];
      graph_.add_edge(chosen.from, chosen.to);
      node_loglik_[chosen.to] = chosen.loglik_after;
      ++forward_moves_;
      for (auto& mv : moves) {
        if (mv.to == chosen.to) mv.dirty = true;
      }
    }
  }

  void backward() {
    for (std::size_t step = 0; step < m_ * m_; ++step) {
      std::vector<Move> moves;
      for (const auto& [u, v] : pairs_) {
        if (graph_.has_edge(u, v)) moves.push_back({u, v});
      }
      std::vector<std::size_t> open(moves.size());
      std::iota(open.begin(), open.end(), 0);
      for_each_index(options_.execution, moves.size(), [&](std::size_t k) {
        auto& mv = moves[k];
        std::vector<std::size_t> parents;
        for (const auto p : graph_.parents(mv.to)) {
          if (p != mv.from) parents.push_back(p);
        }
        mv.loglik_after = loglik(mv.to, parents);
        mv.gain = penalty_ - 2.0 * (node_loglik_[mv.to] - mv.loglik_after);
      });
      const auto best = pick(moves, open);
      if (!best) break;
      const auto chosen = moves[*best];
      graph_.remove_edge(chosen.from, chosen.to);
      node_loglik_[chosen.to] = chosen.loglik_after;
      ++backward_moves_;
    }
  }

  BaselineResult finish() {
    BaselineResult result;
    result.forward_moves = forward_moves_;
    result.backward_moves = backward_moves_;
    result.score = -2.0 * std::accumulate(node_loglik_.begin(), node_loglik_.end(), 0.0) +
                   penalty_ * static_cast<double>(graph_.directed_edge_count());

    const auto edges = graph_.edges();
    std::vector<char> unoriented(edges.size(), 0);
    for_each_index(options_.execution, edges.size(), [&](std::size_t k) {
      const auto [u, v] = edges[k];
      CausalGraph reversed = graph_;
      reversed.remove_edge(u, v);
      if (reversed.creates_cycle(v, u)) return;
      auto parents_u = graph_.parents(u);
      parents_u.push_back(v);
      std::vector<std::size_t> parents_v;
      for (const auto p : graph_.parents(v)) {
        if (p != u) parents_v.push_back(p);
      }
      const double change = 2.0 * ((loglik(u, parents_u) + loglik(v, parents_v)) - (node_loglik_[u] + node_loglik_[v]));
      unoriented[k] = std::abs(change) < options_.orientation_tolerance ? 1 : 0;
    });

    result.pattern = CausalGraph(matrix_.columns, GraphMode::pattern);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (unoriented[k]) result.pattern.add_unoriented(edges[k].from, edges[k].to);
      else result.pattern.add_edge(edges[k].from, edges[k].to);
    }
    return result;
  }

private:
  struct Move {
    std::size_t from;
    std::size_t to;
    double gain = 0.0;
    double loglik_after = 0.0;
    bool dirty = true;
  };

  double loglik(std::size_t child, std::vector<std::size_t> parents) const {
    if (table_.rows(child) == 0) return 0.0;
    std::sort(parents.begin(), parents.end(), [&](auto a, auto b) { return rank_[a] < rank_[b]; });
    return fit_binomial_logistic(table_.cells(child, parents), options_.logistic).loglik;
  }

  std::optional<std::size_t> pick(const std::vector<Move>& moves, const std::vector<std::size_t>& open) const {
    std::optional<std::size_t> best;
    for (const auto k : open) {
      if (!best || moves[k].gain > moves[*best].gain + options_.tie_tolerance) best = k;
    }
    if (best && moves[*best].gain > 0.0) return best;
    return std::nullopt;
  }

  const BinaryMatrix& matrix_;
  const BaselineOptions& options_;
  std::size_t m_;
  CausalGraph graph_;
  IncidenceTable table_;
  std::vector<std::size_t> rank_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<double> node_loglik_;
  double penalty_;
  std::size_t forward_moves_ = 0;
  std::size_t backward_moves_ = 0;
};

} // namespace

BaselineResult hillclimb(const BinaryMatrix& matrix, const BaselineOptions& options) {
  if (matrix.n_rows() == 0 || matrix.n_columns() == 0) {
    throw DataError("baseline needs a non-empty matrix");
  }
  if (matrix.n_columns() > 64) {
    throw DataError("baseline supports at most 64 columns");
  }
  if (!matrix.eligible.empty() && matrix.eligible.size() != matrix.n_rows()) {
    throw DataError("eligibility mask does not match the row count");
  }
  if (!(options.penalty > 0.0)) {
    throw ConfigError("baseline penalty must be positive");
  }
  HillClimb climb(matrix, options);
  climb.forward();
  climb.backward();
  return climb.finish();
}

BinaryMatrix baseline_matrix(const TransformedDataset& data, BaselineMode mode) {
  BinaryMatrix matrix;
  matrix.columns = data.conditions();
  matrix.values.resize(data.n_patients());
  for (std::size_t p = 0; p < data.n_patients(); ++p) matrix.values[p] = data.present2(p);
  if (mode == BaselineMode::transformed) {
    matrix.eligible.resize(data.n_patients());
    for (std::size_t p = 0; p < data.n_patients(); ++p) matrix.eligible[p] = data.at_risk(p);
  }
  return matrix;
}

CausalGraph run_mode(const TransformedDataset& data, BaselineMode mode, const BaselineOptions& options) {
  if (data.n_patients() == 0 || data.n_conditions() == 0) {
    return CausalGraph(data.conditions(), GraphMode::pattern);
  }
  return hillclimb(baseline_matrix(data, mode), options).pattern;
}

} // namespace ehrcsd
