#include "ehrcsd/graph.hpp"

#include "ehrcsd/error.hpp"

#include <algorithm>
#include <set>

namespace ehrcsd {

CausalGraph::CausalGraph(std::vector<std::string> nodes, GraphMode mode)
    : mode_(mode), nodes_(std::move(nodes)), parents_(nodes_.size()), children_(nodes_.size()) {
  std::set<std::string_view> seen;
  for (const auto& n : nodes_) {
    if (!seen.insert(n).second) {
      throw ValidationError("duplicate graph node '" + n + "'");
    }
  }
}

std::optional<std::size_t> CausalGraph::find(std::string_view name) const {
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (nodes_[v] == name) return v;
  }
  return std::nullopt;
}

std::size_t CausalGraph::index_of(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw ValidationError("unknown graph node '" + std::string(name) + "'");
}

void CausalGraph::check_node(std::size_t v) const {
  if (v >= nodes_.size()) {
    throw ValidationError("graph node index " + std::to_string(v) + " out of range");
  }
}

bool CausalGraph::has_edge(std::size_t from, std::size_t to) const {
  check_node(from);
  check_node(to);
  const auto& p = parents_[to];
  return std::binary_search(p.begin(), p.end(), from);
}

bool CausalGraph::has_unoriented(std::size_t a, std::size_t b) const {
  const auto key = std::minmax(a, b);
  return std::find(unoriented_.begin(), unoriented_.end(), std::pair{key.first, key.second}) != unoriented_.end();
}

bool CausalGraph::adjacent(std::size_t a, std::size_t b) const {
  return has_edge(a, b) || has_edge(b, a) || has_unoriented(a, b);
}

bool CausalGraph::has_directed_path(std::size_t from, std::size_t to) const {
  check_node(from);
  check_node(to);
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<std::size_t> stack(children_[from].begin(), children_[from].end());
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    if (seen[v]) continue;
    seen[v] = 1;
    for (const auto c : children_[v]) {
      if (!seen[c]) stack.push_back(c);
    }
  }
  return false;
}

bool CausalGraph::creates_cycle(std::size_t from, std::size_t to) const {
  return from == to || has_directed_path(to, from);
}

void CausalGraph::add_edge(std::size_t from, std::size_t to) {
  check_node(from);
  check_node(to);
  if (from == to) {
    throw ValidationError("self loop on '" + nodes_[from] + "'");
  }
  if (has_edge(from, to)) {
    throw ValidationError("duplicate edge " + nodes_[from] + " -> " + nodes_[to]);
  }
  if (has_unoriented(from, to)) {
    throw ValidationError("edge " + nodes_[from] + " - " + nodes_[to] + " already present unoriented");
  }
  if (mode_ == GraphMode::dag && creates_cycle(from, to)) {
    throw ValidationError("edge " + nodes_[from] + " -> " + nodes_[to] + " would create a directed cycle");
  }
  auto& p = parents_[to];
  p.insert(std::upper_bound(p.begin(), p.end(), from), from);
  auto& c = children_[from];
  c.insert(std::upper_bound(c.begin(), c.end(), to), to);
  ++n_directed_;
}

void CausalGraph::add_edge(std::string_view from, std::string_view to) { add_edge(index_of(from), index_of(to)); }

void CausalGraph::add_unoriented(std::size_t a, std::size_t b) {
  check_node(a);
  check_node(b);
  if (mode_ != GraphMode::pattern) {
    throw ValidationError("unoriented edges require pattern mode");
  }
  if (a == b) {
    throw ValidationError("self loop on '" + nodes_[a] + "'");
  }
  if (adjacent(a, b)) {
    throw ValidationError("duplicate edge between " + nodes_[a] + " and " + nodes_[b]);
  }
  const auto key = std::minmax(a, b);
  unoriented_.emplace_back(key.first, key.second);
}

void CausalGraph::add_unoriented(std::string_view a, std::string_view b) { add_unoriented(index_of(a), index_of(b)); }

void CausalGraph::remove_edge(std::size_t from, std::size_t to) {
  if (!has_edge(from, to)) {
    throw ValidationError("no edge " + nodes_[from] + " -> " + nodes_[to]);
  }
  auto& p = parents_[to];
  p.erase(std::lower_bound(p.begin(), p.end(), from));
  auto& c = children_[from];
  c.erase(std::lower_bound(c.begin(), c.end(), to));
  --n_directed_;
}

void CausalGraph::remove_unoriented(std::size_t a, std::size_t b) {
  const auto key = std::minmax(a, b);
  const auto it = std::find(unoriented_.begin(), unoriented_.end(), std::pair{key.first, key.second});
  if (it == unoriented_.end()) {
    throw ValidationError("no unoriented edge between " + nodes_.at(a) + " and " + nodes_.at(b));
  }
  unoriented_.erase(it);
}

std::vector<Edge> CausalGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(n_directed_);
  for (std::size_t to = 0; to < nodes_.size(); ++to) {
    for (const auto from : parents_[to]) out.push_back({from, to});
  }
  std::sort(out.begin(), out.end(), [&](const Edge& a, const Edge& b) {
    return std::tie(nodes_[a.from], nodes_[a.to]) < std::tie(nodes_[b.from], nodes_[b.to]);
  });
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> CausalGraph::unoriented_edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (auto [a, b] : unoriented_) {
    if (nodes_[b] < nodes_[a]) std::swap(a, b);
    out.emplace_back(a, b);
  }
  std::sort(out.begin(), out.end(), [&](const auto& x, const auto& y) {
    return std::tie(nodes_[x.first], nodes_[x.second]) < std::tie(nodes_[y.first], nodes_[y.second]);
  });
  return out;
}

bool CausalGraph::operator==(const CausalGraph& other) const {
  if (mode_ != other.mode_ || nodes_ != other.nodes_) return false;
  return edges() == other.edges() && unoriented_edges() == other.unoriented_edges();
}

} // namespace ehrcsd
