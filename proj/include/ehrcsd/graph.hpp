#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ehrcsd {

enum class GraphMode { dag, pattern };

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Directed graph over named nodes. In dag mode every mutation keeps the
/// graph acyclic; pattern mode allows unoriented edges and skips the cycle check,
/// so a reference graph can list a pair in both orientations.
class CausalGraph {
public:
  CausalGraph() = default;
  explicit CausalGraph(std::vector<std::string> nodes, GraphMode mode = GraphMode::dag);

  GraphMode mode() const { return mode_; }
  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  const std::string& name(std::size_t v) const { return nodes_.at(v); }
  std::size_t index_of(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;

  /// Throws ValidationError for self loops, duplicates, unknown nodes, an
  /// edge already present unoriented, or (dag mode) a directed cycle.
  void add_edge(std::size_t from, std::size_t to);
  void add_edge(std::string_view from, std::string_view to);
  /// Pattern mode only.
  void add_unoriented(std::size_t a, std::size_t b);
  void add_unoriented(std::string_view a, std::string_view b);
  void remove_edge(std::size_t from, std::size_t to);
  void remove_unoriented(std::size_t a, std::size_t b);

  bool has_edge(std::size_t from, std::size_t to) const;
  bool has_unoriented(std::size_t a, std::size_t b) const;
  /// Any edge, oriented either way or unoriented, between a and b.
  bool adjacent(std::size_t a, std::size_t b) const;

  /// True if a directed path from -> ... -> to exists (length >= 1).
  bool has_directed_path(std::size_t from, std::size_t to) const;
  /// Adding from -> to would close a directed cycle.
  bool creates_cycle(std::size_t from, std::size_t to) const;

  /// Sorted ascending by index.
  const std::vector<std::size_t>& parents(std::size_t v) const { return parents_.at(v); }
  const std::vector<std::size_t>& children(std::size_t v) const { return children_.at(v); }

  /// Directed edges sorted by (from name, to name).
  std::vector<Edge> edges() const;
  /// Unoriented edges as (a, b) with name(a) < name(b), sorted by names.
  std::vector<std::pair<std::size_t, std::size_t>> unoriented_edges() const;
  std::size_t directed_edge_count() const { return n_directed_; }
  std::size_t edge_count() const { return n_directed_ + unoriented_.size(); }

  bool operator==(const CausalGraph& other) const;

private:
  void check_node(std::size_t v) const;

  GraphMode mode_ = GraphMode::dag;
  std::vector<std::string> nodes_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::pair<std::size_t, std::size_t>> unoriented_;  // (min, max) index
  std::size_t n_directed_ = 0;
};

} // namespace ehrcsd
