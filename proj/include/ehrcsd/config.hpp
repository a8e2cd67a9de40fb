#pragma once

#include "ehrcsd/baseline.hpp"
#include "ehrcsd/cohort.hpp"
#include "ehrcsd/evaluation.hpp"
#include "ehrcsd/pipeline.hpp"
#include "ehrcsd/search.hpp"
#include "ehrcsd/synthgen.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace ehrcsd {

struct SynthConfig {
  TruthModel model;
  std::size_t n_patients = 1000;
  std::uint64_t seed = 1;
};

/// Settings shared by every command-line stage, read from one JSON file.
/// Unknown keys are rejected at every level; relative paths resolve against
/// the directory of the config file.
struct RunConfig {
  std::filesystem::path catalog;
  std::filesystem::path events;
  std::filesystem::path patients;
  std::filesystem::path states;
  std::filesystem::path output_dir = "out";

  std::optional<CrossSectionSpec> windows;
  InclusionCriteria inclusion;

  double w = 1.5;
  std::optional<double> alpha;
  Strategy strategy = Strategy::best_first;
  bool include_demographics = false;

  double penalty = 2.0;
  BaselineMode baseline_mode = BaselineMode::transformed;

  std::size_t bootstrap_iterations = 1000;
  std::uint64_t seed = 1;
  Algorithm algorithm = Algorithm::proposed;
  bool parallel = true;

  StabilityOptions stability;
  double bold_confidence = 0.8;
  double concordance_threshold = 2.0 / 3.0;

  std::optional<SynthConfig> synth;

  /// Canonical JSON of the file as read; hashed into run manifests.
  std::string canonical;

  /// Throws ConfigError for any out-of-range value.
  void validate() const;
  /// Explicit windows, else the synthetic model's; throws ConfigError if neither.
  CrossSectionSpec cross_sections() const;
  AlgorithmConfig algorithm_config() const;
  Execution execution() const { return parallel ? Execution::parallel : Execution::serial; }
};

RunConfig parse_run_config(std::string_view json, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Truth model as a JSON object: either explicit nodes, hazards and edges or
/// a "random" block.
TruthModel parse_truth_model(std::string_view json);
std::string truth_model_json(const TruthModel& model);

} // namespace ehrcsd
