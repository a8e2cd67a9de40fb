#include "ehrcsd/incidence_table.hpp"

#include "ehrcsd/error.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace ehrcsd {

IncidenceTable::IncidenceTable(std::size_t n_nodes, std::span<const std::uint64_t> predictors,
                               std::span<const std::uint64_t> outcomes, std::span<const std::uint64_t> eligible,
                               Execution execution)
    : patterns_(n_nodes), rows_(n_nodes, 0) {
  if (n_nodes > 64) {
    throw DataError("incidence tables support at most 64 nodes");
  }
  if (outcomes.size() != predictors.size() || eligible.size() != predictors.size()) {
    throw DataError("incidence table inputs differ in length");
  }
  for_each_index(execution, n_nodes, [&](std::size_t v) {
    const std::uint64_t bit = std::uint64_t{1} << v;
    std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> tally;
    std::size_t rows = 0;
    for (std::size_t r = 0; r < predictors.size(); ++r) {
      if ((eligible[r] & bit) == 0) continue;
      auto& cell = tally[predictors[r] & ~bit];
      ++cell.first;
      cell.second += (outcomes[r] & bit) != 0 ? 1 : 0;
      ++rows;
    }
    auto& out = patterns_[v];
    out.reserve(tally.size());
    for (const auto& [mask, counts] : tally) out.push_back({mask, counts.first, counts.second});
    std::sort(out.begin(), out.end(),
              [](const PatternCount& a, const PatternCount& b) { return a.predictors < b.predictors; });
    rows_[v] = rows;
  });
}

BinomialCells IncidenceTable::cells(std::size_t child, std::span<const std::size_t> parents) const {
  if (child >= patterns_.size()) {
    throw DataError("child index out of range");
  }
  const auto k = parents.size();
  auto project = [&](std::uint64_t mask) {
    std::uint64_t key = 0;
    for (std::size_t a = 0; a < k; ++a) {
      if ((mask >> parents[a]) & 1U) key |= std::uint64_t{1} << a;
    }
    return key;
  };

  std::vector<std::pair<std::uint64_t, std::pair<double, double>>> grouped;
  if (k <= 16) {
    std::vector<std::pair<double, double>> dense(std::size_t{1} << k, {0.0, 0.0});
    for (const auto& pc : patterns_[child]) {
      auto& cell = dense[project(pc.predictors)];
      cell.first += pc.trials;
      cell.second += pc.successes;
    }
    for (std::size_t key = 0; key < dense.size(); ++key) {
      if (dense[key].first > 0.0) grouped.emplace_back(key, dense[key]);
    }
  } else {
    std::map<std::uint64_t, std::pair<double, double>> sparse;
    for (const auto& pc : patterns_[child]) {
      auto& cell = sparse[project(pc.predictors)];
      cell.first += pc.trials;
      cell.second += pc.successes;
    }
    grouped.assign(sparse.begin(), sparse.end());
  }

  BinomialCells cells;
  const auto rows = static_cast<Eigen::Index>(grouped.size());
  cells.design = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(k + 1));
  cells.trials.resize(rows);
  cells.successes.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& [key, counts] = grouped[static_cast<std::size_t>(r)];
    cells.design(r, 0) = 1.0;
    for (std::size_t a = 0; a < k; ++a) {
      cells.design(r, static_cast<Eigen::Index>(a + 1)) = static_cast<double>((key >> a) & 1U);
    }
    cells.trials[r] = counts.first;
    cells.successes[r] = counts.second;
  }
  return cells;
}

} // namespace ehrcsd
