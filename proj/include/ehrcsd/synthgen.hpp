#pragma once

#include "ehrcsd/catalog.hpp"
#include "ehrcsd/cohort.hpp"
#include "ehrcsd/graph.hpp"
#include "ehrcsd/parallel.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ehrcsd {

enum class LagKind { none, uniform, exponential };

std::string_view to_string(LagKind k);
LagKind parse_lag_kind(std::string_view token);

/// Delay between onset and its timestamp in the record.
struct DocLag {
  LagKind kind = LagKind::none;
  /// Upper bound (uniform) or mean (exponential), in days.
  double scale = 0.0;

  bool operator==(const DocLag&) const = default;
};

struct TruthModel {
  CausalGraph dag;
  /// Per-period onset probability of each node without present parents, dag node order.
  std::vector<double> baseline_hazard;
  /// Odds multiplier per dag edge (parent, child).
  std::map<std::pair<std::string, std::string>, double> effect;
  /// The last two periods are the cross-section windows; the rest is history.
  std::size_t n_periods = 3;
  Day period_days = 1095;
  Day start_day = 0;
  /// Probability that a patient has an encounter before the first window.
  double observation_prob = 1.0;
  DocLag doc_lag;
  double age_min = 30.0;
  double age_max = 80.0;
  double male_prob = 0.5;

  /// Throws ConfigError for a violated invariant.
  void validate() const;
  double effect_of(std::size_t parent, std::size_t child) const;
  /// Windows matching the last two periods, history from start_day.
  CrossSectionSpec cross_sections() const;
};

struct OnsetRecord {
  std::string patient_id;
  std::string condition;
  Day onset_day = 0;
  Day documented_day = 0;

  bool operator==(const OnsetRecord&) const = default;
};

struct SyntheticCohort {
  std::vector<EventStream> streams;
  /// True and documented onset of every condition that developed, by patient.
  std::vector<OnsetRecord> onsets;
};

/// Simulates n patients; patient p draws from derive_seed(seed, p).
SyntheticCohort generate(const TruthModel& model, std::size_t n_patients, std::uint64_t seed,
                         Execution execution = Execution::serial);

struct RandomModelSpec {
  std::size_t n_nodes = 10;
  double edge_prob = 0.3;
  double hazard_min = 0.03;
  double hazard_max = 0.08;
  double effect_min = 3.0;
  double effect_max = 6.0;
};

/// Random dag over nodes c00, c01, ... with edges drawn along a random order.
TruthModel random_truth_model(const RandomModelSpec& spec, std::uint64_t seed);

/// One diagnosis per node in a single category, so the cohort can be transformed.
ConditionCatalog synthetic_catalog(const TruthModel& model);

/// Share of within-patient condition pairs with distinct true onsets whose
/// documented order is reversed or tied.
double order_swap_fraction(const SyntheticCohort& cohort);

struct TruthScore {
  std::size_t truth_edges = 0;
  std::size_t found_edges = 0;
  std::size_t true_positive = 0;
  std::size_t reversed = 0;
  std::size_t false_positive = 0;
  /// Unoriented found edges whose endpoints are adjacent in the truth.
  std::size_t unoriented_adjacent = 0;
  /// TP / (TP + reversed); empty when neither occurs.
  std::optional<double> orientation_accuracy;
  /// False positives a -> b with a directed truth path a ~> b.
  std::size_t indirect_explainable = 0;
  /// Found a -> b where b is a truth ancestor of a.
  std::size_t against_time = 0;
};

/// Throws DataError unless both graphs have the same node set.
TruthScore score_against_truth(const CausalGraph& found, const TruthModel& truth);

} // namespace ehrcsd
