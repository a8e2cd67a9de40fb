#include "cli.hpp"

#include "ehrcsd/baseline.hpp"
#include "ehrcsd/bootstrap.hpp"
#include "ehrcsd/catalog.hpp"
#include "ehrcsd/config.hpp"
#include "ehrcsd/error.hpp"
#include "ehrcsd/evaluation.hpp"
#include "ehrcsd/io.hpp"
#include "ehrcsd/pipeline.hpp"
#include "ehrcsd/precedence.hpp"
#include "ehrcsd/scoring.hpp"
#include "ehrcsd/search.hpp"
#include "ehrcsd/synthgen.hpp"
#include "ehrcsd/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <ostream>

namespace ehrcsd::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string catalog;
  std::string catalog_action = "validate";
  std::string states;
  std::string graph;
  std::string pool;
  std::string pool_b;
  std::string states_b;
  std::string reference;
  std::string subject;
  std::string truth;
  std::string mode;
  std::string algorithm;
  std::optional<double> penalty;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_patients;
  bool serial = false;
};

/// Shared state of one invocation: resolved config plus written outputs.
class Stage {
public:
  Stage(std::string command, const Options& opt, std::ostream& out)
      : command_(std::move(command)), opt_(opt), out_(out) {
    if (!opt.config.empty()) config_ = load_run_config(opt.config);
    if (!opt.out.empty()) config_.output_dir = opt.out;
    if (opt.serial) config_.parallel = false;
    if (opt.seed) config_.seed = *opt.seed;
    if (opt.iterations) config_.bootstrap_iterations = *opt.iterations;
    if (opt.penalty) config_.penalty = *opt.penalty;
    if (!opt.mode.empty()) config_.baseline_mode = parse_baseline_mode(opt.mode);
    if (!opt.algorithm.empty()) config_.algorithm = parse_algorithm(opt.algorithm);
    if (config_.synth) {
      if (opt.n_patients) config_.synth->n_patients = *opt.n_patients;
      if (opt.seed) config_.synth->seed = *opt.seed;
    }
    config_.validate();
  }

  RunConfig& config() { return config_; }
  fs::path output(const std::string& name) const { return config_.output_dir / name; }

  /// The configured path, else `fallback` inside the output directory.
  fs::path input(const fs::path& configured, const std::string& flag, const std::string& fallback) const {
    if (!flag.empty()) return flag;
    if (!configured.empty()) return configured;
    return output(fallback);
  }

  ConditionCatalog catalog() const { return load_catalog(input(config_.catalog, opt_.catalog, "catalog.txt")); }

  TransformedDataset states() const { return io::parse_states(io::read_file(input(config_.states, opt_.states, "states.csv"))); }

  std::vector<EventStream> cohort() const {
    const auto spec = config_.cross_sections();
    return io::parse_cohort(io::read_file(input(config_.events, "", "events.csv")),
                            io::read_file(input(config_.patients, "", "patients.csv")), spec.windows[0].end);
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = output(name);
    io::write_file(path, content);
    written_[name] = text::fnv1a_hex(content);
  }

  /// Writes the manifest and prints the one-line summary.
  void finish(const std::vector<std::pair<std::string, std::string>>& summary) {
    nlohmann::json m;
    m["command"] = command_;
    m["version"] = EHRCSD_VERSION;
    m["config_hash"] = text::fnv1a_hex(config_.canonical);
    m["seed"] = config_.seed;
    if (config_.synth) m["synth_seed"] = config_.synth->seed;
    m["outputs"] = written_;
    io::write_file(output("manifest_" + command_ + ".json"), m.dump(2) + "\n");
    out_ << command_ << ":";
    for (const auto& [k, v] : summary) out_ << " " << k << "=" << v;
    out_ << " out=" << config_.output_dir.string() << "\n";
  }

private:
  std::string command_;
  const Options& opt_;
  std::ostream& out_;
  RunConfig config_;
  std::map<std::string, std::string> written_;
};

std::string num(double v) { return text::format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

int cmd_catalog(const Options& opt, std::ostream& out, std::ostream& err) {
  fs::path path = opt.catalog;
  if (path.empty() && !opt.config.empty()) path = load_run_config(opt.config).catalog;
  if (path.empty()) throw ConfigError("catalog: no catalog file given");
  const auto raw = parse_catalog_records(io::read_file(path));
  const auto problems = validate(raw.categories, raw.conditions);
  if (opt.catalog_action == "show") {
    if (!problems.empty()) {
      for (const auto& p : problems) err << p << "\n";
      return kData;
    }
    out << serialize_catalog(ConditionCatalog(raw.categories, raw.conditions));
    return kOk;
  }
  for (const auto& p : problems) out << p << "\n";
  out << "catalog: conditions=" << raw.conditions.size() << " categories=" << raw.categories.size()
      << " violations=" << problems.size() << "\n";
  return problems.empty() ? kOk : kData;
}

int cmd_synth(const Options& opt, std::ostream& out) {
  Stage stage("synth", opt, out);
  auto& cfg = stage.config();
  if (!cfg.synth) throw ConfigError("synth: the config has no 'synth' block");
  const auto cohort = generate(cfg.synth->model, cfg.synth->n_patients, cfg.synth->seed, cfg.execution());
  stage.write("events.csv", io::format_events(cohort.streams));
  stage.write("patients.csv", io::format_patients(cohort.streams));
  stage.write("onsets.csv", io::format_onsets(cohort.onsets));
  stage.write("truth.json", truth_model_json(cfg.synth->model));
  stage.write("truth_graph.txt", io::format_graph(cfg.synth->model.dag));
  stage.write("catalog.txt", serialize_catalog(synthetic_catalog(cfg.synth->model)));
  stage.finish({{"patients", num(cohort.streams.size())},
                {"onsets", num(cohort.onsets.size())},
                {"truth_edges", num(cfg.synth->model.dag.directed_edge_count())},
                {"order_swaps", num(order_swap_fraction(cohort))}});
  return kOk;
}

int cmd_transform(const Options& opt, std::ostream& out) {
  Stage stage("transform", opt, out);
  auto& cfg = stage.config();
  const auto catalog = stage.catalog();
  const auto spec = cfg.cross_sections();
  const auto streams = stage.cohort();
  const auto included = apply_inclusion(streams, spec, cfg.inclusion);
  const auto data = transform(included.retained, spec, catalog, cfg.execution());
  stage.write("states.csv", io::format_states(data));
  stage.write("exclusions.csv", io::format_exclusions(included.report));
  std::string summary = "reason,patients\n";
  for (const auto& [reason, n] : included.report.by_reason) summary += reason + "," + std::to_string(n) + "\n";
  stage.write("exclusion_summary.csv", summary);
  stage.finish({{"patients", num(included.report.total)},
                {"retained", num(included.report.retained)},
                {"conditions", num(data.n_conditions())},
                {"n_common", num(data.n_common())}});
  return kOk;
}

int cmd_precedence(const Options& opt, std::ostream& out) {
  Stage stage("precedence", opt, out);
  auto& cfg = stage.config();
  const auto data = stage.states();
  const auto rows = precedence_table(data, cfg.w, cfg.alpha, cfg.execution());
  const auto candidates = build_candidate_set(data, cfg.w, cfg.alpha, cfg.execution());
  stage.write("precedence.csv", io::format_precedence(data, rows));
  stage.write("candidates.csv", io::format_candidates(candidates));
  stage.finish({{"pairs", num(rows.size())}, {"candidates", num(candidates.size())}, {"w", num(cfg.w)}});
  return kOk;
}

int cmd_discover(const Options& opt, std::ostream& out) {
  Stage stage("discover", opt, out);
  auto& cfg = stage.config();
  const auto data = stage.states();
  const auto algo = cfg.algorithm_config();
  const auto candidates = build_candidate_set(data, cfg.w, cfg.alpha, cfg.execution());
  const auto result = discover(data, candidates, algo.search);
  std::map<std::string, std::string> meta{{"w", num(cfg.w)},
                                          {"strategy", std::string(to_string(cfg.strategy))},
                                          {"bic", num(result.score.bic)},
                                          {"n_common", num(result.score.n_common)}};
  if (cfg.alpha) meta["alpha"] = num(*cfg.alpha);
  stage.write("graph.txt", io::format_graph(result.graph, meta));
  stage.write("graph.dot", io::graph_dot(result.graph));
  stage.write("trace.csv", io::format_trace(result.graph, result.trace));
  stage.write("score.txt", io::format_score(result.score));
  stage.finish({{"edges", num(result.graph.edge_count())},
                {"candidates", num(candidates.size())},
                {"bic", num(result.score.bic)}});
  return kOk;
}

int cmd_baseline(const Options& opt, std::ostream& out) {
  Stage stage("baseline", opt, out);
  auto& cfg = stage.config();
  const auto data = stage.states();
  if (data.n_patients() == 0) throw DataError("baseline: no patients in the states file");
  auto options = cfg.algorithm_config().baseline;
  const auto result = hillclimb(baseline_matrix(data, cfg.baseline_mode), options);
  const std::string mode(to_string(cfg.baseline_mode));
  stage.write("baseline_" + mode + ".txt",
              io::format_graph(result.pattern, {{"mode_of_data", mode},
                                                {"penalty", num(cfg.penalty)},
                                                {"score", num(result.score)}}));
  stage.write("baseline_" + mode + ".dot", io::graph_dot(result.pattern));
  stage.finish({{"mode", mode},
                {"edges", num(result.pattern.edge_count())},
                {"unoriented", num(result.pattern.unoriented_edges().size())},
                {"score", num(result.score)}});
  return kOk;
}

int cmd_score(const Options& opt, std::ostream& out) {
  Stage stage("score", opt, out);
  auto& cfg = stage.config();
  if (opt.graph.empty()) throw ConfigError("score: --graph is required");
  const auto data = stage.states();
  const auto file = io::parse_graph(io::read_file(opt.graph));
  ScoringOptions scoring;
  scoring.include_demographics = cfg.include_demographics;
  const auto report = bic(data, file.graph, scoring);
  out << io::format_score(report);
  stage.write("score_" + fs::path(opt.graph).stem().string() + ".txt", io::format_score(report));
  stage.finish({{"edges", num(report.n_edges)}, {"bic", num(report.bic)}});
  return kOk;
}

int cmd_bootstrap(const Options& opt, std::ostream& out) {
  Stage stage("bootstrap", opt, out);
  auto& cfg = stage.config();
  const auto catalog = stage.catalog();
  const auto streams = stage.cohort();
  BootstrapOptions boot;
  boot.iterations = cfg.bootstrap_iterations;
  boot.seed = cfg.seed;
  boot.execution = cfg.execution();
  auto algo = cfg.algorithm_config();
  if (algo.algorithm == Algorithm::proposed) algo.search.execution = Execution::serial;
  const auto pool = bootstrap_run(streams, cfg.cross_sections(), cfg.inclusion, catalog, algo, boot);
  const std::string name(to_string(cfg.algorithm));
  stage.write("pool_" + name + ".csv", io::format_pool(pool));
  stage.finish({{"algorithm", name},
                {"B", num(pool.iterations())},
                {"pairs", num(pool.counts().size())},
                {"failures", num(pool.failures().size())}});
  return kOk;
}

CausalGraph majority_graph(const EdgePool& pool, double share) {
  CausalGraph g(pool.nodes(), GraphMode::pattern);
  for (const auto& [key, c] : pool.counts()) {
    if (static_cast<double>(c.oriented()) < share * static_cast<double>(pool.iterations())) continue;
    if (c.ij > c.ji) g.add_edge(key.first, key.second);
    else if (c.ji > c.ij) g.add_edge(key.second, key.first);
  }
  return g;
}

int cmd_evaluate(const Options& opt, std::ostream& out) {
  Stage stage("evaluate", opt, out);
  auto& cfg = stage.config();
  if (opt.pool.empty()) throw ConfigError("evaluate: --pool is required");
  const auto pool = io::parse_pool(io::read_file(opt.pool));
  const auto catalog = stage.catalog();
  const auto stab = stability(pool, cfg.stability);
  stage.write("stability.csv", io::format_stability(stab));
  stage.write("stability_summary.csv", io::format_stability_summary(stab));
  const auto categories = aggregate_categories(pool, catalog, cfg.bold_confidence);
  stage.write("categories.csv", io::format_categories(categories));
  stage.write("categories.dot", category_dot(categories));
  const auto graph = opt.graph.empty() ? majority_graph(pool, cfg.stability.frequent_share)
                                       : io::parse_graph(io::read_file(opt.graph)).graph;
  const auto heuristics = check_heuristics(graph, catalog);
  stage.write("heuristics.csv", io::format_heuristics(heuristics));
  std::vector<std::pair<std::string, std::string>> summary{
      {"pooled_edges", num(stab.pooled_edges)},
      {"ambiguous", num(stab.ambiguous_fraction)},
      {"frequent_ambiguous", num(stab.frequent_ambiguous_fraction)},
      {"category_edges", num(categories.edges.size())}};
  if (!opt.pool_b.empty()) {
    const auto pool_b = io::parse_pool(io::read_file(opt.pool_b));
    std::optional<TransformedDataset> a, b;
    if (!opt.states.empty() || !cfg.states.empty()) a = stage.states();
    if (!opt.states_b.empty()) b = io::parse_states(io::read_file(opt.states_b));
    const auto report = concordance(pool, pool_b, cfg.concordance_threshold, a ? &*a : nullptr, b ? &*b : nullptr);
    stage.write("concordance.csv", io::format_concordance(report));
    summary.emplace_back("qualifying", num(report.rows.size()));
    summary.emplace_back("agreement", num(report.agreement));
  }
  stage.finish(summary);
  return kOk;
}

int cmd_compare(const Options& opt, std::ostream& out) {
  Stage stage("compare", opt, out);
  if (opt.subject.empty()) throw ConfigError("compare: --subject is required");
  const auto subject = io::parse_graph(io::read_file(opt.subject)).graph;
  std::vector<std::pair<std::string, std::string>> summary;
  if (!opt.reference.empty()) {
    const auto reference = io::parse_graph(io::read_file(opt.reference)).graph;
    const auto report = completeness_partition(reference, subject);
    stage.write("completeness.csv", io::format_completeness(report));
    for (std::size_t c = 0; c < report.edges.size(); ++c) {
      summary.emplace_back(std::string(to_string(static_cast<EdgeClass>(c))), num(report.edges[c].size()));
    }
  }
  if (!opt.truth.empty()) {
    const auto truth = parse_truth_model(io::read_file(opt.truth));
    const auto score = score_against_truth(subject, truth);
    stage.write("truth_score.csv", io::format_truth_score(score));
    summary.emplace_back("true_positive", num(score.true_positive));
    summary.emplace_back("reversed", num(score.reversed));
    summary.emplace_back("false_positive", num(score.false_positive));
    summary.emplace_back("against_time", num(score.against_time));
  }
  if (summary.empty()) throw ConfigError("compare: give --reference and/or --truth");
  stage.finish(summary);
  return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal structure discovery from two-cross-section EHR data", "ehrcsd"};
  app.require_subcommand(1, 1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Run-config JSON file");
    sub->add_option("--out", opt.out, "Output directory (overrides output_dir)");
    sub->add_flag("--serial", opt.serial, "Disable OpenMP parallelism");
  };

  auto* catalog = app.add_subcommand("catalog", "Validate or print a condition catalog");
  catalog->add_option("action", opt.catalog_action, "validate | show")->check(CLI::IsMember({"validate", "show"}));
  catalog->add_option("--catalog", opt.catalog, "Catalog file");
  catalog->add_option("--config", opt.config, "Run-config JSON file");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort from the config's truth model");
  common(synth);
  synth->add_option("--n", opt.n_patients, "Number of patients");
  synth->add_option("--seed", opt.seed, "Generator seed");

  auto* transform_cmd = app.add_subcommand("transform", "Apply inclusion and classify condition states");
  common(transform_cmd);
  transform_cmd->add_option("--catalog", opt.catalog, "Catalog file");

  auto* precedence = app.add_subcommand("precedence", "Pairwise precedence table and candidate set");
  common(precedence);
  precedence->add_option("--states", opt.states, "States file");

  auto* discover_cmd = app.add_subcommand("discover", "Precedence-constrained greedy structure search");
  common(discover_cmd);
  discover_cmd->add_option("--states", opt.states, "States file");

  auto* baseline = app.add_subcommand("baseline", "Unconstrained hill-climb comparison arm");
  common(baseline);
  baseline->add_option("--states", opt.states, "States file");
  baseline->add_option("--mode", opt.mode, "raw | transformed")->check(CLI::IsMember({"raw", "transformed"}));
  baseline->add_option("--penalty", opt.penalty, "Per-edge multiplier on ln(n)");

  auto* score = app.add_subcommand("score", "BIC of a graph file");
  common(score);
  score->add_option("--states", opt.states, "States file");
  score->add_option("--graph", opt.graph, "Graph file")->required();

  auto* bootstrap = app.add_subcommand("bootstrap", "Patient-level bootstrap of the whole pipeline");
  common(bootstrap);
  bootstrap->add_option("--catalog", opt.catalog, "Catalog file");
  bootstrap->add_option("--algorithm", opt.algorithm, "proposed | baseline_raw | baseline_transformed");
  bootstrap->add_option("--iterations", opt.iterations, "Number of bootstrap iterations");
  bootstrap->add_option("--seed", opt.seed, "Bootstrap seed");

  auto* evaluate = app.add_subcommand("evaluate", "Stability, categories, heuristics and concordance reports");
  common(evaluate);
  evaluate->add_option("--catalog", opt.catalog, "Catalog file");
  evaluate->add_option("--pool", opt.pool, "Edge pool file")->required();
  evaluate->add_option("--graph", opt.graph, "Graph checked against the heuristics");
  evaluate->add_option("--pool-b", opt.pool_b, "Second pool for concordance");
  evaluate->add_option("--states", opt.states, "States behind the first pool");
  evaluate->add_option("--states-b", opt.states_b, "States behind the second pool");

  auto* compare = app.add_subcommand("compare", "Completeness partition and truth scoring of a graph");
  common(compare);
  compare->add_option("--subject", opt.subject, "Graph under evaluation")->required();
  compare->add_option("--reference", opt.reference, "Reference graph");
  compare->add_option("--truth", opt.truth, "Truth model JSON written by synth");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (catalog->parsed()) return cmd_catalog(opt, out, err);
    if (synth->parsed()) return cmd_synth(opt, out);
    if (transform_cmd->parsed()) return cmd_transform(opt, out);
    if (precedence->parsed()) return cmd_precedence(opt, out);
    if (discover_cmd->parsed()) return cmd_discover(opt, out);
    if (baseline->parsed()) return cmd_baseline(opt, out);
    if (score->parsed()) return cmd_score(opt, out);
    if (bootstrap->parsed()) return cmd_bootstrap(opt, out);
    if (evaluate->parsed()) return cmd_evaluate(opt, out);
    if (compare->parsed()) return cmd_compare(opt, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kIo;
  }
  err << app.help();
  return kUsage;
}

} // namespace ehrcsd::cli
