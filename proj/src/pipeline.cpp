#include "ehrcsd/pipeline.hpp"

#include "ehrcsd/error.hpp"

namespace ehrcsd {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::proposed: return "proposed";
    case Algorithm::baseline_raw: return "baseline_raw";
    case Algorithm::baseline_transformed: return "baseline_transformed";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view token) {
  if (token == "proposed") return Algorithm::proposed;
  if (token == "baseline_raw") return Algorithm::baseline_raw;
  if (token == "baseline_transformed") return Algorithm::baseline_transformed;
  throw ConfigError("unknown algorithm '" + std::string(token) + "'");
}

namespace {

void learn(PipelineResult& out, const AlgorithmConfig& config) {
  if (config.algorithm == Algorithm::proposed) {
    out.candidates = build_candidate_set(out.data, config.w, config.alpha, config.search.execution);
    auto found = discover(out.data, out.candidates, config.search);
    out.graph = std::move(found.graph);
    out.trace = std::move(found.trace);
    if (out.data.n_common() > 0) out.score = std::move(found.score);
    return;
  }
  const auto mode = config.algorithm == Algorithm::baseline_raw ? BaselineMode::raw : BaselineMode::transformed;
  out.graph = run_mode(out.data, mode, config.baseline);
}

} // namespace

CausalGraph run_algorithm(const TransformedDataset& data, const AlgorithmConfig& config) {
  PipelineResult out;
  out.data = data;
  learn(out, config);
  return std::move(out.graph);
}

PipelineResult run_pipeline(std::span<const EventStream> streams, const CrossSectionSpec& spec,
                            const InclusionCriteria& inclusion, const ConditionCatalog& catalog,
                            const AlgorithmConfig& config) {
  PipelineResult out;
  auto included = apply_inclusion(streams, spec, inclusion);
  out.exclusions = std::move(included.report);
  out.data = transform(included.retained, spec, catalog, config.search.execution);
  learn(out, config);
  return out;
}

} // namespace ehrcsd
