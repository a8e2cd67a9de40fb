#include "ehrcsd/bootstrap.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/rng.hpp"

#include <algorithm>
#include <optional>

namespace ehrcsd {

EdgePool::EdgePool(std::vector<std::string> nodes, std::size_t iterations)
    : nodes_(std::move(nodes)), iterations_(iterations) {
  std::sort(nodes_.begin(), nodes_.end());
  if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw ValidationError("edge pool nodes must be unique");
  }
}

std::size_t EdgePool::index(std::string_view node) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node);
  if (it == nodes_.end() || *it != node) {
    throw DataError("edge pool has no node '" + std::string(node) + "'");
  }
  return static_cast<std::size_t>(it - nodes_.begin());
}

PairCounts EdgePool::at(std::string_view a, std::string_view b) const {
  const auto i = index(a);
  const auto j = index(b);
  const auto it = counts_.find({std::min(i, j), std::max(i, j)});
  if (it == counts_.end()) return {};
  return i < j ? it->second : it->second.swapped();
}

void EdgePool::add_counts(std::string_view a, std::string_view b, PairCounts counts) {
  const auto i = index(a);
  const auto j = index(b);
  if (i == j) throw DataError("edge pool pair needs two distinct nodes");
  auto& slot = counts_[{std::min(i, j), std::max(i, j)}];
  const auto oriented = i < j ? counts : counts.swapped();
  slot.ij += oriented.ij;
  slot.ji += oriented.ji;
  slot.unoriented += oriented.unoriented;
}

void EdgePool::add(const CausalGraph& graph) {
  for (std::size_t v = 0; v < graph.node_count(); ++v) index(graph.name(v));
  for (const auto& e : graph.edges()) add_counts(graph.name(e.from), graph.name(e.to), {1, 0, 0});
  for (const auto& [a, b] : graph.unoriented_edges()) add_counts(graph.name(a), graph.name(b), {0, 0, 1});
}

void EdgePool::record_failure(std::size_t iteration, std::string message) {
  failures_.push_back({iteration, std::move(message)});
  std::sort(failures_.begin(), failures_.end(), [](const auto& x, const auto& y) { return x.iteration < y.iteration; });
}

void EdgePool::merge(const EdgePool& other) {
  if (other.nodes_ != nodes_ || other.iterations_ != iterations_) {
    throw DataError("cannot merge edge pools over different nodes or iteration counts");
  }
  for (const auto& [key, c] : other.counts_) {
    auto& slot = counts_[key];
    slot.ij += c.ij;
    slot.ji += c.ji;
    slot.unoriented += c.unoriented;
  }
  for (const auto& f : other.failures_) record_failure(f.iteration, f.message);
}

void EdgePool::validate() const {
  for (const auto& [key, c] : counts_) {
    if (c.total() > iterations_) {
      throw ValidationError("pair " + nodes_[key.first] + " / " + nodes_[key.second] + " reported " +
                            std::to_string(c.total()) + " times in " + std::to_string(iterations_) + " iterations");
    }
  }
}

std::vector<std::size_t> resample_indices(std::size_t n, std::uint64_t seed, std::size_t iteration) {
  Rng rng(derive_seed(seed, iteration));
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = static_cast<std::size_t>(rng.index(n));
  return out;
}

EdgePool bootstrap_run(std::span<const EventStream> streams, const CrossSectionSpec& spec,
                       const InclusionCriteria& inclusion, const ConditionCatalog& catalog,
                       const AlgorithmConfig& config, const BootstrapOptions& options) {
  if (options.iterations < 1) throw ConfigError("bootstrap needs at least one iteration");
  if (streams.empty()) throw DataError("bootstrap needs at least one patient");
  spec.validate();

  AlgorithmConfig inner = config;
  inner.search.execution = Execution::serial;
  inner.baseline.execution = Execution::serial;

  std::vector<std::optional<CausalGraph>> graphs(options.iterations);
  std::vector<std::string> errors(options.iterations);
  for_each_index(options.execution, options.iterations, [&](std::size_t b) {
    const auto picks = resample_indices(streams.size(), options.seed, b);
    std::vector<EventStream> sample;
    sample.reserve(picks.size());
    for (const auto p : picks) sample.push_back(streams[p]);
    try {
      graphs[b] = run_pipeline(sample, spec, inclusion, catalog, inner).graph;
    } catch (const DataError& e) {
      errors[b] = e.what();
    }
  });

  EdgePool pool(catalog.node_ids(), options.iterations);
  for (std::size_t b = 0; b < options.iterations; ++b) {
    if (graphs[b]) pool.add(*graphs[b]);
    else pool.record_failure(b, errors[b]);
  }
  return pool;
}

} // namespace ehrcsd
