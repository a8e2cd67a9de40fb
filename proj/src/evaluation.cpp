#include "ehrcsd/evaluation.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/precedence.hpp"
#include "ehrcsd/text.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace ehrcsd {

bool is_ambiguous(const PairCounts& c) { return c.ij > 0 && c.ji > 0; }

bool is_frequent_ambiguous(const PairCounts& c, std::size_t iterations, const StabilityOptions& options) {
  const auto oriented = c.oriented();
  if (oriented == 0) return false;
  const bool frequent = static_cast<double>(oriented) >= options.frequent_share * static_cast<double>(iterations);
  const double minority = static_cast<double>(std::min(c.ij, c.ji)) / static_cast<double>(oriented);
  return frequent && minority >= options.minority_share;
}

StabilityReport stability(const EdgePool& pool, const StabilityOptions& options) {
  if (pool.iterations() < 1) throw ConfigError("stability needs a pool with at least one iteration");
  StabilityReport report;
  report.iterations = pool.iterations();
  for (const auto& [key, c] : pool.counts()) {
    if (c.total() == 0) continue;
    StabilityRow row{pool.nodes()[key.first], pool.nodes()[key.second], c, is_ambiguous(c),
                     is_frequent_ambiguous(c, pool.iterations(), options)};
    ++report.pooled_edges;
    report.ambiguous += row.ambiguous ? 1 : 0;
    report.frequent_ambiguous += row.frequent_ambiguous ? 1 : 0;
    report.rows.push_back(std::move(row));
  }
  if (report.pooled_edges > 0) {
    const auto n = static_cast<double>(report.pooled_edges);
    report.ambiguous_fraction = static_cast<double>(report.ambiguous) / n;
    report.frequent_ambiguous_fraction = static_cast<double>(report.frequent_ambiguous) / n;
  }
  return report;
}

namespace {

const ConditionDef& lookup(const ConditionCatalog& catalog, std::string_view id) {
  const auto* def = catalog.find(id);
  if (!def) throw DataError("condition '" + std::string(id) + "' is not in the catalog");
  return *def;
}

CategoryGraph finish_categories(const std::map<std::pair<std::string, std::string>, std::size_t>& directed,
                                const ConditionCatalog& catalog, double bold_threshold) {
  CategoryGraph out;
  for (const auto& c : catalog.categories()) out.nodes.push_back(c.id);
  std::sort(out.nodes.begin(), out.nodes.end());
  std::set<std::pair<std::string, std::string>> done;
  for (const auto& [key, forward] : directed) {
    const auto unordered = std::minmax(key.first, key.second);
    if (!done.insert({unordered.first, unordered.second}).second) continue;
    const auto back_it = directed.find({key.second, key.first});
    const std::size_t backward = back_it == directed.end() ? 0 : back_it->second;
    if (forward + backward == 0) continue;
    CategoryEdge e;
    if (forward >= backward) {
      e = {key.first, key.second, forward, backward};
    } else {
      e = {key.second, key.first, backward, forward};
    }
    e.tie = forward == backward;
    if (e.tie && e.from > e.to) std::swap(e.from, e.to);
    e.confidence = static_cast<double>(e.dominant_count) / static_cast<double>(e.dominant_count + e.reverse_count);
    e.bold = !e.tie && e.confidence > bold_threshold;
    out.edges.push_back(std::move(e));
  }
  std::sort(out.edges.begin(), out.edges.end(),
            [](const auto& x, const auto& y) { return std::tie(x.from, x.to) < std::tie(y.from, y.to); });
  return out;
}

void tally(std::map<std::pair<std::string, std::string>, std::size_t>& directed, const ConditionCatalog& catalog,
           std::string_view from, std::string_view to, std::size_t count) {
  const auto& a = lookup(catalog, from).category;
  const auto& b = lookup(catalog, to).category;
  if (a == b || count == 0) return;
  directed[{a, b}] += count;
}

} // namespace

CategoryGraph aggregate_categories(const EdgePool& pool, const ConditionCatalog& catalog, double bold_threshold) {
  std::map<std::pair<std::string, std::string>, std::size_t> directed;
  for (const auto& [key, c] : pool.counts()) {
    const auto& i = pool.nodes()[key.first];
    const auto& j = pool.nodes()[key.second];
    tally(directed, catalog, i, j, c.ij);
    tally(directed, catalog, j, i, c.ji);
  }
  return finish_categories(directed, catalog, bold_threshold);
}

CategoryGraph aggregate_categories(const CausalGraph& graph, const ConditionCatalog& catalog, double bold_threshold) {
  for (std::size_t v = 0; v < graph.node_count(); ++v) lookup(catalog, graph.name(v));
  std::map<std::pair<std::string, std::string>, std::size_t> directed;
  for (const auto& e : graph.edges()) tally(directed, catalog, graph.name(e.from), graph.name(e.to), 1);
  return finish_categories(directed, catalog, bold_threshold);
}

std::string category_dot(const CategoryGraph& graph) {
  std::ostringstream out;
  out << "digraph categories {\n";
  for (const auto& n : graph.nodes) out << "  \"" << n << "\";\n";
  for (const auto& e : graph.edges) {
    out << "  \"" << e.from << "\" -> \"" << e.to << "\" [label=\"" << text::format_double(e.confidence, 3) << "\"";
    if (e.bold) out << ", style=bold, penwidth=3";
    if (e.tie) out << ", dir=none, style=dashed";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

// ---- heuristics ----

namespace {

bool contains(const std::vector<std::string>& v, std::string_view x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

} // namespace

HeuristicReport check_heuristics(const CausalGraph& graph, const ConditionCatalog& catalog) {
  HeuristicReport report;
  for (std::size_t h = 0; h < 5; ++h) report.results[h].name = "H" + std::to_string(h + 1);
  for (const auto& n : graph.nodes()) lookup(catalog, n);

  const auto edges = graph.edges();
  auto has = [&](std::string_view from, std::string_view to) {
    const auto a = graph.find(from);
    const auto b = graph.find(to);
    return a && b && graph.has_edge(*a, *b);
  };
  auto score = [&](std::size_t h, bool violating, const NamedEdge& edge) {
    auto& r = report.results[h];
    ++r.applicable;
    if (violating) {
      ++r.violating;
      r.violations.push_back(edge);
    }
  };

  for (const auto& e : edges) {
    const NamedEdge edge{graph.name(e.from), graph.name(e.to)};
    const auto& a = catalog.at(edge.first);
    const auto& b = catalog.at(edge.second);
    const bool a_compl = catalog.is_complication_category(a.category);
    const bool b_compl = catalog.is_complication_category(b.category);

    if (a.severity_rank && b.severity_rank && a.chain_key() == b.chain_key() && *a.severity_rank != *b.severity_rank) {
      score(0, *a.severity_rank > *b.severity_rank, edge);
    } else if (a_compl != b_compl) {
      score(0, a_compl, edge);
    }

    if (a.kind == ConditionKind::diagnosis && contains(a.defining_measures, b.id)) score(1, true, edge);
    else if (b.kind == ConditionKind::diagnosis && contains(b.defining_measures, a.id)) score(1, false, edge);

    auto treated_measures = [&](const ConditionDef& t) -> const std::vector<std::string>* {
      if (t.kind != ConditionKind::treatment || !t.treats) return nullptr;
      const auto* d = catalog.find(*t.treats);
      return d ? &d->defining_measures : nullptr;
    };
    if (const auto* m = treated_measures(a); m && contains(*m, b.id)) score(2, true, edge);
    else if (const auto* m2 = treated_measures(b); m2 && contains(*m2, a.id)) score(2, false, edge);

    if (a.kind == ConditionKind::diagnosis && b.kind == ConditionKind::diagnosis && !a.defining_measures.empty()) {
      const bool backed = std::any_of(a.defining_measures.begin(), a.defining_measures.end(),
                                      [&](const auto& m) { return has(m, b.id); });
      score(3, !backed, edge);
    }

    if (b_compl && a.kind == ConditionKind::treatment) {
      if (const auto* m = treated_measures(a); m && !m->empty()) {
        const bool backed = std::any_of(m->begin(), m->end(), [&](const auto& x) { return has(x, b.id); });
        score(4, !backed, edge);
      }
    }
  }
  for (auto& r : report.results) {
    if (r.applicable > 0) r.proportion = static_cast<double>(r.violating) / static_cast<double>(r.applicable);
  }
  return report;
}

// ---- completeness ----

std::string_view to_string(EdgeClass c) {
  switch (c) {
    case EdgeClass::shared: return "shared";
    case EdgeClass::reversed: return "reversed";
    case EdgeClass::both_orientations: return "both_orientations";
    case EdgeClass::explained: return "explained";
    case EdgeClass::unexplained: return "unexplained";
  }
  return "?";
}

std::size_t CompletenessReport::total() const {
  std::size_t n = 0;
  for (const auto& v : edges) n += v.size();
  return n;
}

CompletenessReport completeness_partition(const CausalGraph& reference, const CausalGraph& subject) {
  {
    auto x = reference.nodes();
    auto y = subject.nodes();
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (x != y) throw DataError("completeness needs graphs over the same conditions");
  }
  auto s = [&](std::size_t ref_node) { return subject.index_of(reference.name(ref_node)); };
  auto subject_has = [&](std::size_t a, std::size_t b) { return subject.has_edge(s(a), s(b)); };
  auto explained = [&](std::size_t a, std::size_t b) {
    const auto sa = s(a);
    const auto sb = s(b);
    if (subject.has_directed_path(sa, sb) || subject.has_directed_path(sb, sa)) return true;
    const auto& pa = subject.parents(sa);
    const auto& pb = subject.parents(sb);
    return std::any_of(pa.begin(), pa.end(), [&](auto p) { return std::binary_search(pb.begin(), pb.end(), p); });
  };

  CompletenessReport report;
  auto put = [&](EdgeClass c, NamedEdge e) { report.edges[static_cast<std::size_t>(c)].push_back(std::move(e)); };

  for (const auto& e : reference.edges()) {
    const auto a = e.from;
    const auto b = e.to;
    const bool two_way = reference.has_edge(b, a);
    if (two_way && reference.name(a) > reference.name(b)) continue;
    NamedEdge named{reference.name(a), reference.name(b)};
    if (subject_has(a, b) || (two_way && subject_has(b, a)) || subject.has_unoriented(s(a), s(b))) {
      put(EdgeClass::shared, named);
    } else if (subject_has(b, a)) {
      put(EdgeClass::reversed, named);
    } else if (two_way) {
      put(EdgeClass::both_orientations, named);
    } else if (explained(a, b)) {
      put(EdgeClass::explained, named);
    } else {
      put(EdgeClass::unexplained, named);
    }
  }
  for (const auto& [a, b] : reference.unoriented_edges()) {
    NamedEdge named{reference.name(a), reference.name(b)};
    if (subject_has(a, b) || subject_has(b, a) || subject.has_unoriented(s(a), s(b))) put(EdgeClass::shared, named);
    else put(EdgeClass::both_orientations, named);
  }
  return report;
}

// ---- concordance ----

ConcordanceReport concordance(const EdgePool& a, const EdgePool& b, double threshold, const TransformedDataset* data_a,
                              const TransformedDataset* data_b) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("concordance threshold must be in (0, 1]");
  ConcordanceReport report;
  report.threshold = threshold;
  std::set_intersection(a.nodes().begin(), a.nodes().end(), b.nodes().begin(), b.nodes().end(),
                        std::back_inserter(report.shared_nodes));
  if (report.shared_nodes.empty()) throw DataError("the pools share no conditions");

  auto qualifies = [&](const PairCounts& c, const EdgePool& pool) {
    return static_cast<double>(c.oriented()) >= threshold * static_cast<double>(pool.iterations());
  };
  auto ratio = [](const TransformedDataset* data, const std::string& i, const std::string& j) -> std::optional<double> {
    if (!data || !data->find_condition(i) || !data->find_condition(j)) return std::nullopt;
    return precedence_counts(*data, i, j).ratio();
  };

  const auto& nodes = report.shared_nodes;
  for (std::size_t x = 0; x < nodes.size(); ++x) {
    for (std::size_t y = x + 1; y < nodes.size(); ++y) {
      ConcordanceRow row;
      row.i = nodes[x];
      row.j = nodes[y];
      row.a = a.at(row.i, row.j);
      row.b = b.at(row.i, row.j);
      row.qualifies_a = qualifies(row.a, a);
      row.qualifies_b = qualifies(row.b, b);
      if (!row.qualifies_a && !row.qualifies_b) continue;
      const auto dir = [](const PairCounts& c) { return c.ij > c.ji ? 1 : (c.ji > c.ij ? -1 : 0); };
      row.agree = row.qualifies_a && row.qualifies_b && dir(row.a) != 0 && dir(row.a) == dir(row.b);
      row.ratio_a = ratio(data_a, row.i, row.j);
      row.ratio_b = ratio(data_b, row.i, row.j);
      report.agreeing += row.agree ? 1 : 0;
      report.rows.push_back(std::move(row));
    }
  }
  if (!report.rows.empty()) {
    report.agreement = static_cast<double>(report.agreeing) / static_cast<double>(report.rows.size());
  }
  return report;
}

} // namespace ehrcsd
