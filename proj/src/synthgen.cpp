#include "ehrcsd/synthgen.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/rng.hpp"
#include "ehrcsd/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace ehrcsd {

std::string_view to_string(LagKind k) {
  switch (k) {
    case LagKind::none: return "none";
    case LagKind::uniform: return "uniform";
    case LagKind::exponential: return "exponential";
  }
  return "?";
}

LagKind parse_lag_kind(std::string_view token) {
  if (token == "none") return LagKind::none;
  if (token == "uniform") return LagKind::uniform;
  if (token == "exponential") return LagKind::exponential;
  throw ConfigError("unknown documentation lag '" + std::string(token) + "'");
}

void TruthModel::validate() const {
  if (dag.mode() != GraphMode::dag) throw ConfigError("truth graph must be a dag");
  if (baseline_hazard.size() != dag.node_count()) {
    throw ConfigError("truth model needs one baseline hazard per node");
  }
  for (const auto h : baseline_hazard) {
    if (!(h >= 0.0 && h <= 1.0)) throw ConfigError("baseline hazards must lie in [0, 1]");
  }
  for (const auto& e : dag.edges()) {
    const auto it = effect.find({dag.name(e.from), dag.name(e.to)});
    if (it == effect.end()) {
      throw ConfigError("no effect for truth edge " + dag.name(e.from) + " -> " + dag.name(e.to));
    }
  }
  for (const auto& [key, value] : effect) {
    const auto a = dag.find(key.first);
    const auto b = dag.find(key.second);
    if (!a || !b || !dag.has_edge(*a, *b)) {
      throw ConfigError("effect given for " + key.first + " -> " + key.second + ", which is not a truth edge");
    }
    if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError("effects must be positive and finite");
  }
  if (n_periods < 3) throw ConfigError("the generator needs at least three periods");
  if (period_days < 1) throw ConfigError("period_days must be positive");
  if (!(observation_prob >= 0.0 && observation_prob <= 1.0)) throw ConfigError("observation_prob must lie in [0, 1]");
  if (!(male_prob >= 0.0 && male_prob <= 1.0)) throw ConfigError("male_prob must lie in [0, 1]");
  if (!(age_min <= age_max)) throw ConfigError("age_min must not exceed age_max");
  if (doc_lag.kind != LagKind::none && !(doc_lag.scale >= 0.0)) throw ConfigError("lag scale must be non-negative");
}

double TruthModel::effect_of(std::size_t parent, std::size_t child) const {
  return effect.at({dag.name(parent), dag.name(child)});
}

CrossSectionSpec TruthModel::cross_sections() const {
  CrossSectionSpec spec;
  spec.history_start = start_day;
  const auto n = static_cast<Day>(n_periods);
  spec.windows[0] = {start_day + (n - 2) * period_days, start_day + (n - 1) * period_days};
  spec.windows[1] = {start_day + (n - 1) * period_days, start_day + n * period_days};
  return spec;
}

namespace {

std::vector<std::size_t> topological_order(const CausalGraph& g) {
  std::vector<std::size_t> indegree(g.node_count()), order;
  for (std::size_t v = 0; v < g.node_count(); ++v) indegree[v] = g.parents(v).size();
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (indegree[v] == 0) order.push_back(v);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (const auto c : g.children(order[k])) {
      if (--indegree[c] == 0) order.push_back(c);
    }
  }
  return order;
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double onset_probability(double hazard, double log_odds_shift) {
  if (hazard <= 0.0) return 0.0;
  if (hazard >= 1.0) return 1.0;
  const double z = logit(hazard) + log_odds_shift;
  return 1.0 / (1.0 + std::exp(-z));
}

Day draw_lag(Rng& rng, const DocLag& lag) {
  switch (lag.kind) {
    case LagKind::none: return 0;
    case LagKind::uniform: return static_cast<Day>(std::floor(rng.uniform(0.0, lag.scale + 1.0)));
    case LagKind::exponential: return static_cast<Day>(std::floor(rng.exponential(lag.scale)));
  }
  return 0;
}

std::string patient_name(std::size_t p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%06zu", p);
  return buf;
}

} // namespace

SyntheticCohort generate(const TruthModel& model, std::size_t n_patients, std::uint64_t seed, Execution execution) {
  model.validate();
  if (n_patients < 1) throw ConfigError("generate needs at least one patient");
  const auto& dag = model.dag;
  const auto m = dag.node_count();
  const auto order = topological_order(dag);
  const auto spec = model.cross_sections();

  std::vector<std::vector<double>> log_effect(m);
  for (std::size_t v = 0; v < m; ++v) {
    for (const auto p : dag.parents(v)) log_effect[v].push_back(std::log(model.effect_of(p, v)));
  }

  std::vector<EventStream> streams(n_patients);
  std::vector<std::vector<OnsetRecord>> onsets(n_patients);
  for_each_index(execution, n_patients, [&](std::size_t p) {
    Rng rng(derive_seed(seed, p));
    auto& s = streams[p];
    s.patient_id = patient_name(p);
    s.age = rng.uniform(model.age_min, model.age_max);
    s.sex = rng.bernoulli(model.male_prob) ? Sex::male : Sex::female;

    std::vector<std::optional<Day>> onset(m);
    for (std::size_t k = 0; k < model.n_periods; ++k) {
      const Day begin = model.start_day + static_cast<Day>(k) * model.period_days;
      for (const auto v : order) {
        if (onset[v]) continue;
        double shift = 0.0;
        const auto& parents = dag.parents(v);
        for (std::size_t a = 0; a < parents.size(); ++a) {
          if (onset[parents[a]] && *onset[parents[a]] < begin) shift += log_effect[v][a];
        }
        if (rng.bernoulli(onset_probability(model.baseline_hazard[v], shift))) {
          onset[v] = begin + static_cast<Day>(rng.index(static_cast<std::uint64_t>(model.period_days)));
        }
      }
    }
    for (std::size_t v = 0; v < m; ++v) {
      if (!onset[v]) continue;
      const Day documented = *onset[v] + draw_lag(rng, model.doc_lag);
      s.events.push_back({dag.name(v), documented});
      onsets[p].push_back({s.patient_id, dag.name(v), *onset[v], documented});
    }

    const Day w1 = spec.windows[0].start;
    if (rng.bernoulli(model.observation_prob)) {
      s.encounters.push_back({spec.history_start + static_cast<Day>(rng.index(static_cast<std::uint64_t>(w1 - spec.history_start))), ""});
    }
    for (const auto& w : spec.windows) {
      s.encounters.push_back({w.start + static_cast<Day>(rng.index(static_cast<std::uint64_t>(w.end - w.start))), ""});
    }
    s.encounters.push_back({spec.windows[1].end + static_cast<Day>(rng.index(365)), ""});
    s.sort();
  });

  SyntheticCohort out;
  out.streams = std::move(streams);
  for (auto& o : onsets) {
    for (auto& r : o) out.onsets.push_back(std::move(r));
  }
  return out;
}

TruthModel random_truth_model(const RandomModelSpec& spec, std::uint64_t seed) {
  if (spec.n_nodes < 1 || spec.n_nodes > 100) throw ConfigError("random truth model needs 1 to 100 nodes");
  Rng rng(seed);
  std::vector<std::string> names;
  for (std::size_t v = 0; v < spec.n_nodes; ++v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "c%02zu", v);
    names.push_back(buf);
  }
  std::vector<std::size_t> order(spec.n_nodes);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.index(k)]);

  TruthModel model;
  model.dag = CausalGraph(names);
  for (std::size_t v = 0; v < spec.n_nodes; ++v) {
    model.baseline_hazard.push_back(rng.uniform(spec.hazard_min, spec.hazard_max));
  }
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      if (rng.bernoulli(spec.edge_prob)) {
        model.dag.add_edge(order[a], order[b]);
        model.effect[{names[order[a]], names[order[b]]}] = rng.uniform(spec.effect_min, spec.effect_max);
      }
    }
  }
  return model;
}

ConditionCatalog synthetic_catalog(const TruthModel& model) {
  std::vector<CategoryDef> categories{{"Syn", "Synthetic", false}};
  std::vector<ConditionDef> conditions;
  for (const auto& n : model.dag.nodes()) {
    ConditionDef c;
    c.id = n;
    c.label = n;
    c.kind = ConditionKind::diagnosis;
    c.category = "Syn";
    conditions.push_back(std::move(c));
  }
  return ConditionCatalog(std::move(categories), std::move(conditions));
}

double order_swap_fraction(const SyntheticCohort& cohort) {
  std::size_t pairs = 0;
  std::size_t swapped = 0;
  std::size_t begin = 0;
  const auto& o = cohort.onsets;
  while (begin < o.size()) {
    auto end = begin;
    while (end < o.size() && o[end].patient_id == o[begin].patient_id) ++end;
    for (auto a = begin; a < end; ++a) {
      for (auto b = a + 1; b < end; ++b) {
        if (o[a].onset_day == o[b].onset_day) continue;
        const auto& first = o[a].onset_day < o[b].onset_day ? o[a] : o[b];
        const auto& second = o[a].onset_day < o[b].onset_day ? o[b] : o[a];
        ++pairs;
        if (first.documented_day >= second.documented_day) ++swapped;
      }
    }
    begin = end;
  }
  return pairs == 0 ? 0.0 : static_cast<double>(swapped) / static_cast<double>(pairs);
}

TruthScore score_against_truth(const CausalGraph& found, const TruthModel& truth) {
  const auto& t = truth.dag;
  {
    auto x = found.nodes();
    auto y = t.nodes();
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (x != y) throw DataError("found and truth graphs cover different conditions");
  }
  TruthScore score;
  score.truth_edges = t.directed_edge_count();
  score.found_edges = found.edge_count();
  for (const auto& e : found.edges()) {
    const auto a = t.index_of(found.name(e.from));
    const auto b = t.index_of(found.name(e.to));
    if (t.has_edge(a, b)) {
      ++score.true_positive;
    } else if (t.has_edge(b, a)) {
      ++score.reversed;
    } else {
      ++score.false_positive;
      if (t.has_directed_path(a, b)) ++score.indirect_explainable;
    }
    if (t.has_directed_path(b, a)) ++score.against_time;
  }
  for (const auto& [x, y] : found.unoriented_edges()) {
    const auto a = t.index_of(found.name(x));
    const auto b = t.index_of(found.name(y));
    if (t.adjacent(a, b)) ++score.unoriented_adjacent;
    else ++score.false_positive;
  }
  if (score.true_positive + score.reversed > 0) {
    score.orientation_accuracy =
        static_cast<double>(score.true_positive) / static_cast<double>(score.true_positive + score.reversed);
  }
  return score;
}

} // namespace ehrcsd
