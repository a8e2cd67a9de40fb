#pragma once

#include "ehrcsd/catalog.hpp"
#include "ehrcsd/parallel.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ehrcsd {

/// Days since an arbitrary epoch.
using Day = std::int64_t;

enum class Sex { female, male, unknown };

struct Event {
  std::string condition;
  Day day = 0;

  bool operator==(const Event&) const = default;
};

struct Encounter {
  Day day = 0;
  /// Optional encounter type (e.g. "bp"); empty when untyped.
  std::string tag;

  bool operator==(const Encounter&) const = default;
};

/// Longitudinal record of one patient. Events and encounters are kept sorted
/// by day.
struct EventStream {
  std::string patient_id;
  /// Age in years at the end of the first cross section.
  std::optional<double> age;
  Sex sex = Sex::unknown;
  std::vector<Event> events;
  std::vector<Encounter> encounters;

  void sort();
  bool operator==(const EventStream&) const = default;
};

/// Half-open interval [start, end) in days.
struct Window {
  Day start = 0;
  Day end = 0;

  bool contains(Day day) const { return day >= start && day < end; }
  bool operator==(const Window&) const = default;
};

struct CrossSectionSpec {
  /// Earliest day that counts as prior history for pre-existing status.
  Day history_start = 0;
  std::array<Window, 2> windows{};

  /// Throws ConfigError unless history_start <= window1.start <= window1.end
  /// <= window2.start <= window2.end.
  void validate() const;
  const Window& window(int section) const;
  bool operator==(const CrossSectionSpec&) const = default;
};

enum class ConditionState : std::uint8_t { absent, incident, preexisting, not_observed };

char state_code(ConditionState state);
ConditionState parse_state_code(char code);
inline bool is_present(ConditionState s) {
  return s == ConditionState::incident || s == ConditionState::preexisting;
}

struct InclusionCriteria {
  double min_age = 18.0;
  bool require_demographics = true;
  /// Require an encounter before window1 starts.
  bool require_pre_window_encounter = true;
  /// Require an encounter at or after window2 ends.
  bool require_post_window_encounter = true;
  /// When set, only encounters with this tag count as bracketing encounters.
  std::string encounter_tag;
};

inline constexpr std::string_view kReasonDemographics = "missing demographics";
inline constexpr std::string_view kReasonUnderAge = "under 18";
inline constexpr std::string_view kReasonNoPreEncounter = "no pre-window1 encounter";
inline constexpr std::string_view kReasonNoPostEncounter = "no post-window2 encounter";

struct ExclusionReport {
  std::size_t total = 0;
  std::size_t retained = 0;
  /// Patients failing each criterion; a patient may fail several.
  std::map<std::string, std::size_t> by_reason;
  /// (patient id, reasons) for every excluded patient, input order.
  std::vector<std::pair<std::string, std::vector<std::string>>> excluded;
};

struct InclusionResult {
  std::vector<EventStream> retained;
  ExclusionReport report;
};

/// Reasons a single patient fails the criteria; empty when it qualifies.
std::vector<std::string> exclusion_reasons(const EventStream& stream, const CrossSectionSpec& spec,
                                           const InclusionCriteria& criteria);

InclusionResult apply_inclusion(std::span<const EventStream> streams, const CrossSectionSpec& spec,
                                const InclusionCriteria& criteria);

/// State of one condition for one patient at cross section 1 or 2.
ConditionState classify_state(const EventStream& stream, const ConditionDef& condition,
                              const CrossSectionSpec& spec, int section);
ConditionState classify_state(const EventStream& stream, std::string_view condition,
                              const CrossSectionSpec& spec, int section, const ConditionCatalog& catalog);

struct Demographics {
  double age = 0.0;
  bool male = false;
  bool known = false;

  bool operator==(const Demographics&) const = default;
};

/// Per-patient, per-condition states at the two cross sections.
///
/// Supports at most 64 conditions: presence at cross section 1 is kept as a
/// bit mask per patient for the scoring kernels.
class TransformedDataset {
public:
  static constexpr std::size_t kMaxConditions = 64;

  TransformedDataset() = default;

  /// Throws ValidationError if the matrices are inconsistent in size or a
  /// condition reverts (present at cross section 1 but not pre-existing at 2).
  TransformedDataset(std::vector<std::string> patients, std::vector<std::string> conditions,
                     std::vector<ConditionState> state1, std::vector<ConditionState> state2,
                     std::vector<std::uint8_t> observed, std::vector<Demographics> demographics = {});

  std::size_t n_patients() const { return patients_.size(); }
  std::size_t n_conditions() const { return conditions_.size(); }
  /// Patients under observation in both cross sections.
  std::size_t n_common() const { return n_common_; }

  const std::vector<std::string>& patients() const { return patients_; }
  const std::vector<std::string>& conditions() const { return conditions_; }
  const std::vector<Demographics>& demographics() const { return demographics_; }
  bool observed(std::size_t patient) const { return observed_[patient] != 0; }

  ConditionState state1(std::size_t patient, std::size_t condition) const {
    return state1_[patient * conditions_.size() + condition];
  }
  ConditionState state2(std::size_t patient, std::size_t condition) const {
    return state2_[patient * conditions_.size() + condition];
  }

  /// Bit v set iff condition v is incident or pre-existing at cross section 1.
  std::uint64_t present1(std::size_t patient) const { return present1_[patient]; }
  std::uint64_t present2(std::size_t patient) const { return present2_[patient]; }
  /// Bit v set iff condition v is not NotObserved at cross section 1.
  std::uint64_t observed1(std::size_t patient) const { return observed1_[patient]; }
  /// Bit v set iff condition v is incident at cross section 2.
  std::uint64_t incident2(std::size_t patient) const { return incident2_[patient]; }
  /// Bit v set iff the patient is in the at-risk set of condition v.
  std::uint64_t at_risk(std::size_t patient) const { return at_risk_[patient]; }

  std::size_t condition_index(std::string_view id) const;
  std::optional<std::size_t> find_condition(std::string_view id) const;

  bool operator==(const TransformedDataset& other) const;

private:
  std::vector<std::string> patients_;
  std::vector<std::string> conditions_;
  std::vector<ConditionState> state1_;
  std::vector<ConditionState> state2_;
  std::vector<std::uint8_t> observed_;
  std::vector<Demographics> demographics_;
  std::size_t n_common_ = 0;
  std::vector<std::uint64_t> present1_, present2_, observed1_, incident2_, at_risk_;
};

/// Classifies every retained patient for every node condition of the catalog.
/// Throws DataError if an event references a condition the catalog lacks.
TransformedDataset transform(std::span<const EventStream> streams, const CrossSectionSpec& spec,
                             const ConditionCatalog& catalog, Execution execution = Execution::serial);

/// Patients absent for the condition at cross section 1 and observed at both.
std::vector<std::size_t> at_risk_set(const TransformedDataset& data, std::string_view condition);

} // namespace ehrcsd
