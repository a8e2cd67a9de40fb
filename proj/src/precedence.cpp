#include "ehrcsd/precedence.hpp"

#include "ehrcsd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ehrcsd {

double PrecedenceCounts::ratio() const {
  if (n_j_first == 0) {
    return n_i_first == 0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(n_i_first) / static_cast<double>(n_j_first);
}

std::string_view to_string(PrecedenceDecision d) {
  switch (d) {
  case PrecedenceDecision::i_precedes_j: return "i_precedes_j";
  case PrecedenceDecision::j_precedes_i: return "j_precedes_i";
  case PrecedenceDecision::neither: return "neither";
  }
  return "?";
}

PrecedenceCounts precedence_counts(const TransformedDataset& data, std::size_t i, std::size_t j) {
  if (i >= data.n_conditions() || j >= data.n_conditions()) {
    throw DataError("condition index out of range");
  }
  if (i == j) {
    throw DataError("precedence of a condition with itself ('" + data.conditions()[i] + "')");
  }
  const std::uint64_t bi = std::uint64_t{1} << i;
  const std::uint64_t bj = std::uint64_t{1} << j;
  const std::uint64_t both = bi | bj;
  PrecedenceCounts c;
  for (std::size_t p = 0; p < data.n_patients(); ++p) {
    if ((data.present2(p) & both) != both || (data.observed1(p) & both) != both) continue;
    ++c.n_both_cs2;
    const auto present = data.present1(p) & both;
    if (present == bi) ++c.n_i_first;
    else if (present == bj) ++c.n_j_first;
  }
  return c;
}

PrecedenceCounts precedence_counts(const TransformedDataset& data, std::string_view i, std::string_view j) {
  return precedence_counts(data, data.condition_index(i), data.condition_index(j));
}

PrecedenceDecision precedes(const PrecedenceCounts& counts, double w) {
  if (!(w > 0.0)) {
    throw ConfigError("precedence ratio threshold must be positive");
  }
  const auto ni = static_cast<double>(counts.n_i_first);
  const auto nj = static_cast<double>(counts.n_j_first);
  // ni / nj > w  <=>  ni > w * nj, which also covers nj = 0 < ni.
  if (ni > w * nj) return PrecedenceDecision::i_precedes_j;
  if (nj > w * ni) return PrecedenceDecision::j_precedes_i;
  return PrecedenceDecision::neither;
}

double two_proportion_p_value(const PrecedenceCounts& counts) {
  if (counts.n_both_cs2 == 0) return 1.0;
  const auto n = static_cast<double>(counts.n_both_cs2);
  const double p1 = static_cast<double>(counts.n_i_first) / n;
  const double p2 = static_cast<double>(counts.n_j_first) / n;
  const double pooled = (p1 + p2) / 2.0;
  const double se = std::sqrt(pooled * (1.0 - pooled) * 2.0 / n);
  if (se == 0.0) return 1.0;
  const double z = std::abs(p1 - p2) / se;
  return std::erfc(z / std::sqrt(2.0));
}

bool CandidateSet::contains(std::size_t parent, std::size_t child) const {
  return std::any_of(pairs.begin(), pairs.end(),
                     [&](const CandidatePair& c) { return c.parent == parent && c.child == child; });
}

std::vector<PrecedenceRow> precedence_table(const TransformedDataset& data, double w, std::optional<double> alpha,
                                            Execution execution) {
  const auto m = data.n_conditions();
  std::vector<PrecedenceRow> rows;
  rows.reserve(m * (m > 0 ? m - 1 : 0) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      rows.push_back(PrecedenceRow{i, j, {}, PrecedenceDecision::neither, 1.0});
    }
  }
  for_each_index(execution, rows.size(), [&](std::size_t k) {
    auto& row = rows[k];
    row.counts = precedence_counts(data, row.i, row.j);
    row.decision = precedes(row.counts, w);
    row.p_value = two_proportion_p_value(row.counts);
    if (alpha && !(row.p_value < *alpha)) {
      row.decision = PrecedenceDecision::neither;
    }
  });
  return rows;
}

CandidateSet build_candidate_set(const TransformedDataset& data, double w, std::optional<double> alpha,
                                 Execution execution) {
  if (!(w >= 1.0)) {
    throw ConfigError("precedence ratio w must be >= 1 (got " + std::to_string(w) + ")");
  }
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) {
    throw ConfigError("significance level alpha must be in (0, 1)");
  }
  CandidateSet set;
  set.w = w;
  set.alpha = alpha;
  set.conditions = data.conditions();
  for (const auto& row : precedence_table(data, w, alpha, execution)) {
    if (row.decision == PrecedenceDecision::i_precedes_j) {
      set.pairs.push_back({row.i, row.j, row.counts, row.counts.ratio(), row.p_value});
    } else if (row.decision == PrecedenceDecision::j_precedes_i) {
      const auto c = row.counts.swapped();
      set.pairs.push_back({row.j, row.i, c, c.ratio(), row.p_value});
    }
  }
  const auto& names = set.conditions;
  std::sort(set.pairs.begin(), set.pairs.end(), [&](const CandidatePair& a, const CandidatePair& b) {
    return std::tie(names[a.parent], names[a.child]) < std::tie(names[b.parent], names[b.child]);
  });
  return set;
}

} // namespace ehrcsd
