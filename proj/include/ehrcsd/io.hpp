#pragma once

#include "ehrcsd/bootstrap.hpp"
#include "ehrcsd/cohort.hpp"
#include "ehrcsd/evaluation.hpp"
#include "ehrcsd/graph.hpp"
#include "ehrcsd/precedence.hpp"
#include "ehrcsd/scoring.hpp"
#include "ehrcsd/search.hpp"
#include "ehrcsd/synthgen.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Delimited-text formats shared by the command-line stages. Every table is
// comma-separated with a header row; ids may not contain commas or newlines.
namespace ehrcsd::io {

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for batch use: parent directories are created.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Header-addressed rows of a comma-separated table.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws ParseError when the column is missing.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

/// Blank lines and lines starting with '#' are skipped.
Table parse_table(std::string_view text, std::string_view what);

// ---- cohort ----
// events:   patient_id,condition_id,day
// patients: patient_id,age,sex,encounters  (or birth_day in place of age)
// encounters are ';'-separated days, each optionally prefixed "tag:".

std::string format_events(std::span<const EventStream> streams);
std::string format_patients(std::span<const EventStream> streams);

/// `age_reference_day` converts a birth_day column into age at that day.
/// Throws ParseError for malformed rows and DataError for events of unknown patients.
std::vector<EventStream> parse_cohort(std::string_view events, std::string_view patients,
                                      std::optional<Day> age_reference_day = std::nullopt);

// ---- transformed data ----
// patient_id,age,sex,observed,<c>.1,<c>.2,...  with A/I/P/N state codes.

std::string format_states(const TransformedDataset& data);
TransformedDataset parse_states(std::string_view text);

std::string format_exclusions(const ExclusionReport& report);

// ---- graphs ----
// "# key: value" header lines (nodes is required), then "a -> b" or "a -- b".

struct GraphFile {
  CausalGraph graph;
  std::map<std::string, std::string> metadata;
};

std::string format_graph(const CausalGraph& graph, const std::map<std::string, std::string>& metadata = {});
GraphFile parse_graph(std::string_view text);
std::string graph_dot(const CausalGraph& graph);

// ---- stage tables ----

std::string format_precedence(const TransformedDataset& data, std::span<const PrecedenceRow> rows);
std::string format_candidates(const CandidateSet& candidates);
std::string format_trace(const CausalGraph& graph, std::span<const TraceEntry> trace);
std::string format_score(const ScoreReport& report);

/// Pool rows are i,j,count_ij,count_ji,count_unoriented,B; nodes and failed
/// iterations travel in '#' header lines.
std::string format_pool(const EdgePool& pool);
EdgePool parse_pool(std::string_view text);

std::string format_stability(const StabilityReport& report);
std::string format_stability_summary(const StabilityReport& report);
std::string format_categories(const CategoryGraph& graph);
std::string format_heuristics(const HeuristicReport& report);
std::string format_completeness(const CompletenessReport& report);
std::string format_concordance(const ConcordanceReport& report);

// ---- synthetic truth ----

std::string format_onsets(std::span<const OnsetRecord> onsets);
std::string format_truth_score(const TruthScore& score);

} // namespace ehrcsd::io
