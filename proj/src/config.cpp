#include "ehrcsd/config.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/io.hpp"

#include <json.hpp>

#include <initializer_list>
#include <set>

namespace ehrcsd {

using nlohmann::json;

namespace {

void only_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  const std::set<std::string_view> ok(allowed);
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + std::string(where));
  }
}

template <class T>
T get(const json& j, std::string_view key, std::string_view where) {
  try {
    return j.at(std::string(key)).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + std::string(key) + ": " + e.what());
  }
}

template <class T>
void maybe(const json& j, std::string_view key, std::string_view where, T& out) {
  if (j.contains(std::string(key))) out = get<T>(j, key, where);
}

Window read_window(const json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(where) + " must be [start, end]");
  try {
    return {j[0].get<Day>(), j[1].get<Day>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + ": " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

TruthModel truth_from_json(const json& j) {
  only_keys(j, "model", {"nodes", "hazard", "edges", "random", "n_periods", "period_days", "start_day",
                         "observation_prob", "doc_lag", "age_min", "age_max", "male_prob"});
  TruthModel model;
  if (j.contains("random")) {
    if (j.contains("nodes") || j.contains("edges") || j.contains("hazard")) {
      throw ConfigError("model: give either 'random' or explicit nodes/edges, not both");
    }
    const auto& r = j["random"];
    only_keys(r, "model.random", {"n_nodes", "edge_prob", "hazard_min", "hazard_max", "effect_min", "effect_max", "seed"});
    RandomModelSpec spec;
    maybe(r, "n_nodes", "model.random", spec.n_nodes);
    maybe(r, "edge_prob", "model.random", spec.edge_prob);
    maybe(r, "hazard_min", "model.random", spec.hazard_min);
    maybe(r, "hazard_max", "model.random", spec.hazard_max);
    maybe(r, "effect_min", "model.random", spec.effect_min);
    maybe(r, "effect_max", "model.random", spec.effect_max);
    std::uint64_t seed = 1;
    maybe(r, "seed", "model.random", seed);
    model = random_truth_model(spec, seed);
  } else {
    const auto nodes = get<std::vector<std::string>>(j, "nodes", "model");
    model.dag = CausalGraph(nodes);
    const auto hazard = get<std::map<std::string, double>>(j, "hazard", "model");
    for (const auto& n : nodes) {
      const auto it = hazard.find(n);
      if (it == hazard.end()) throw ConfigError("model.hazard: no hazard for '" + n + "'");
      model.baseline_hazard.push_back(it->second);
    }
    if (hazard.size() != nodes.size()) throw ConfigError("model.hazard: hazard given for an unknown node");
    if (j.contains("edges")) {
      for (const auto& e : j["edges"]) {
        only_keys(e, "model.edges[]", {"from", "to", "effect"});
        const auto from = get<std::string>(e, "from", "model.edges[]");
        const auto to = get<std::string>(e, "to", "model.edges[]");
        try {
          model.dag.add_edge(from, to);
        } catch (const ValidationError& err) {
          throw ConfigError(std::string("model.edges: ") + err.what());
        }
        model.effect[{from, to}] = get<double>(e, "effect", "model.edges[]");
      }
    }
  }
  maybe(j, "n_periods", "model", model.n_periods);
  maybe(j, "period_days", "model", model.period_days);
  maybe(j, "start_day", "model", model.start_day);
  maybe(j, "observation_prob", "model", model.observation_prob);
  maybe(j, "age_min", "model", model.age_min);
  maybe(j, "age_max", "model", model.age_max);
  maybe(j, "male_prob", "model", model.male_prob);
  if (j.contains("doc_lag")) {
    const auto& l = j["doc_lag"];
    only_keys(l, "model.doc_lag", {"kind", "scale"});
    model.doc_lag.kind = parse_lag_kind(get<std::string>(l, "kind", "model.doc_lag"));
    maybe(l, "scale", "model.doc_lag", model.doc_lag.scale);
  }
  model.validate();
  return model;
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

} // namespace

void RunConfig::validate() const {
  if (windows) windows->validate();
  if (!(w >= 1.0)) throw ConfigError("precedence.w must be at least 1");
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) throw ConfigError("precedence.alpha must lie in (0, 1)");
  if (!(penalty > 0.0)) throw ConfigError("baseline.penalty must be positive");
  if (bootstrap_iterations < 1) throw ConfigError("bootstrap.iterations must be at least 1");
  if (!(stability.frequent_share >= 0.0 && stability.frequent_share <= 1.0)) {
    throw ConfigError("evaluation.frequent_share must lie in [0, 1]");
  }
  if (!(stability.minority_share >= 0.0 && stability.minority_share <= 0.5)) {
    throw ConfigError("evaluation.minority_share must lie in [0, 0.5]");
  }
  if (!(bold_confidence >= 0.5 && bold_confidence <= 1.0)) throw ConfigError("evaluation.bold_confidence must lie in [0.5, 1]");
  if (!(concordance_threshold > 0.0 && concordance_threshold <= 1.0)) {
    throw ConfigError("evaluation.concordance_threshold must lie in (0, 1]");
  }
  if (inclusion.min_age < 0.0) throw ConfigError("inclusion.min_age must be non-negative");
  if (synth) {
    synth->model.validate();
    if (synth->n_patients < 1) throw ConfigError("synth.n_patients must be at least 1");
  }
}

CrossSectionSpec RunConfig::cross_sections() const {
  if (windows) return *windows;
  if (synth) return synth->model.cross_sections();
  throw ConfigError("no cross-section windows configured");
}

AlgorithmConfig RunConfig::algorithm_config() const {
  AlgorithmConfig a;
  a.algorithm = algorithm;
  a.w = w;
  a.alpha = alpha;
  a.search.strategy = strategy;
  a.search.scoring.include_demographics = include_demographics;
  a.search.execution = execution();
  a.baseline.penalty = penalty;
  a.baseline.execution = execution();
  return a;
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  const auto j = parse_json(text, "config");
  only_keys(j, "config", {"catalog", "events", "patients", "states", "output_dir", "windows", "inclusion", "precedence",
                          "search", "baseline", "bootstrap", "evaluation", "synth", "parallel"});
  RunConfig c;
  c.canonical = j.dump();
  for (const auto* key : {"catalog", "events", "patients", "states", "output_dir"}) {
    if (!j.contains(key)) continue;
    const auto p = resolve(base_dir, get<std::string>(j, key, "config"));
    if (std::string_view(key) == "catalog") c.catalog = p;
    else if (std::string_view(key) == "events") c.events = p;
    else if (std::string_view(key) == "patients") c.patients = p;
    else if (std::string_view(key) == "states") c.states = p;
    else c.output_dir = p;
  }
  maybe(j, "parallel", "config", c.parallel);
  if (j.contains("windows")) {
    const auto& wj = j["windows"];
    only_keys(wj, "windows", {"history_start", "window1", "window2"});
    CrossSectionSpec spec;
    spec.history_start = get<Day>(wj, "history_start", "windows");
    spec.windows[0] = read_window(wj.at("window1"), "windows.window1");
    spec.windows[1] = read_window(wj.at("window2"), "windows.window2");
    c.windows = spec;
  }
  if (j.contains("inclusion")) {
    const auto& ij = j["inclusion"];
    only_keys(ij, "inclusion", {"min_age", "require_demographics", "require_pre_window_encounter",
                                "require_post_window_encounter", "encounter_tag"});
    maybe(ij, "min_age", "inclusion", c.inclusion.min_age);
    maybe(ij, "require_demographics", "inclusion", c.inclusion.require_demographics);
    maybe(ij, "require_pre_window_encounter", "inclusion", c.inclusion.require_pre_window_encounter);
    maybe(ij, "require_post_window_encounter", "inclusion", c.inclusion.require_post_window_encounter);
    maybe(ij, "encounter_tag", "inclusion", c.inclusion.encounter_tag);
  }
  if (j.contains("precedence")) {
    const auto& pj = j["precedence"];
    only_keys(pj, "precedence", {"w", "alpha"});
    maybe(pj, "w", "precedence", c.w);
    if (pj.contains("alpha") && !pj["alpha"].is_null()) c.alpha = get<double>(pj, "alpha", "precedence");
  }
  if (j.contains("search")) {
    const auto& sj = j["search"];
    only_keys(sj, "search", {"strategy", "include_demographics"});
    if (sj.contains("strategy")) c.strategy = parse_strategy(get<std::string>(sj, "strategy", "search"));
    maybe(sj, "include_demographics", "search", c.include_demographics);
  }
  if (j.contains("baseline")) {
    const auto& bj = j["baseline"];
    only_keys(bj, "baseline", {"penalty", "mode"});
    maybe(bj, "penalty", "baseline", c.penalty);
    if (bj.contains("mode")) c.baseline_mode = parse_baseline_mode(get<std::string>(bj, "mode", "baseline"));
  }
  if (j.contains("bootstrap")) {
    const auto& bj = j["bootstrap"];
    only_keys(bj, "bootstrap", {"iterations", "seed", "algorithm"});
    maybe(bj, "iterations", "bootstrap", c.bootstrap_iterations);
    maybe(bj, "seed", "bootstrap", c.seed);
    if (bj.contains("algorithm")) c.algorithm = parse_algorithm(get<std::string>(bj, "algorithm", "bootstrap"));
  }
  if (j.contains("evaluation")) {
    const auto& ej = j["evaluation"];
    only_keys(ej, "evaluation", {"frequent_share", "minority_share", "bold_confidence", "concordance_threshold"});
    maybe(ej, "frequent_share", "evaluation", c.stability.frequent_share);
    maybe(ej, "minority_share", "evaluation", c.stability.minority_share);
    maybe(ej, "bold_confidence", "evaluation", c.bold_confidence);
    maybe(ej, "concordance_threshold", "evaluation", c.concordance_threshold);
  }
  if (j.contains("synth")) {
    const auto& sj = j["synth"];
    only_keys(sj, "synth", {"n_patients", "seed", "model"});
    SynthConfig s;
    maybe(sj, "n_patients", "synth", s.n_patients);
    maybe(sj, "seed", "synth", s.seed);
    if (!sj.contains("model")) throw ConfigError("synth.model is required");
    s.model = truth_from_json(sj["model"]);
    c.synth = std::move(s);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, path.parent_path());
}

TruthModel parse_truth_model(std::string_view text) { return truth_from_json(parse_json(text, "truth model")); }

std::string truth_model_json(const TruthModel& model) {
  json j;
  j["nodes"] = model.dag.nodes();
  json hazard = json::object();
  for (std::size_t v = 0; v < model.dag.node_count(); ++v) hazard[model.dag.name(v)] = model.baseline_hazard[v];
  j["hazard"] = hazard;
  json edges = json::array();
  for (const auto& e : model.dag.edges()) {
    edges.push_back({{"from", model.dag.name(e.from)},
                     {"to", model.dag.name(e.to)},
                     {"effect", model.effect_of(e.from, e.to)}});
  }
  j["edges"] = edges;
  j["n_periods"] = model.n_periods;
  j["period_days"] = model.period_days;
  j["start_day"] = model.start_day;
  j["observation_prob"] = model.observation_prob;
  j["doc_lag"] = {{"kind", std::string(to_string(model.doc_lag.kind))}, {"scale", model.doc_lag.scale}};
  j["age_min"] = model.age_min;
  j["age_max"] = model.age_max;
  j["male_prob"] = model.male_prob;
  return j.dump(2) + "\n";
}

} // namespace ehrcsd
