#include "ehrcsd/cohort.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/text.hpp"

#include <algorithm>
#include <unordered_map>

namespace ehrcsd {

void EventStream::sort() {
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.day < b.day; });
  std::stable_sort(encounters.begin(), encounters.end(),
                   [](const Encounter& a, const Encounter& b) { return a.day < b.day; });
}

void CrossSectionSpec::validate() const {
  const auto& w1 = windows[0];
  const auto& w2 = windows[1];
  if (w1.start > w1.end || w2.start > w2.end) {
    throw ConfigError("cross-section window with start after end");
  }
  if (w1.end > w2.start) {
    throw ConfigError("cross-section windows overlap or are out of order");
  }
  if (history_start > w1.start) {
    throw ConfigError("history_start is after the first window starts");
  }
}

const Window& CrossSectionSpec::window(int section) const {
  if (section != 1 && section != 2) {
    throw DataError("cross section must be 1 or 2, got " + std::to_string(section));
  }
  return windows[static_cast<std::size_t>(section - 1)];
}

char state_code(ConditionState state) {
  switch (state) {
  case ConditionState::absent: return 'A';
  case ConditionState::incident: return 'I';
  case ConditionState::preexisting: return 'P';
  case ConditionState::not_observed: return 'N';
  }
  return '?';
}

ConditionState parse_state_code(char code) {
  switch (code) {
  case 'A': return ConditionState::absent;
  case 'I': return ConditionState::incident;
  case 'P': return ConditionState::preexisting;
  case 'N': return ConditionState::not_observed;
  default: throw ParseError(std::string("invalid condition state code '") + code + "'");
  }
}

namespace {

bool tag_matches(const Encounter& e, const std::string& tag) { return tag.empty() || e.tag == tag; }

bool has_encounter_before(const EventStream& s, Day day, const std::string& tag) {
  return std::any_of(s.encounters.begin(), s.encounters.end(),
                     [&](const Encounter& e) { return e.day < day && tag_matches(e, tag); });
}

bool has_encounter_from(const EventStream& s, Day day, const std::string& tag) {
  return std::any_of(s.encounters.begin(), s.encounters.end(),
                     [&](const Encounter& e) { return e.day >= day && tag_matches(e, tag); });
}

// first_day: earliest documented event on or after history_start.
ConditionState classify(std::optional<Day> first_day, bool observed_before, const Window& window) {
  if (first_day && *first_day < window.start) {
    return ConditionState::preexisting;
  }
  if (first_day && window.contains(*first_day)) {
    // Onset inside the window without prior observation cannot be told apart
    // from a pre-existing condition.
    return observed_before ? ConditionState::incident : ConditionState::not_observed;
  }
  return observed_before ? ConditionState::absent : ConditionState::not_observed;
}

std::optional<Day> first_event_day(const EventStream& s, std::string_view condition, Day history_start) {
  std::optional<Day> first;
  for (const auto& e : s.events) {
    if (e.condition == condition && e.day >= history_start && (!first || e.day < *first)) {
      first = e.day;
    }
  }
  return first;
}

} // namespace

std::vector<std::string> exclusion_reasons(const EventStream& stream, const CrossSectionSpec& spec,
                                           const InclusionCriteria& criteria) {
  std::vector<std::string> reasons;
  if (criteria.require_demographics && (!stream.age || stream.sex == Sex::unknown)) {
    reasons.emplace_back(kReasonDemographics);
  }
  if (stream.age && *stream.age < criteria.min_age) {
    reasons.push_back("under " + text::format_double(criteria.min_age, 6));
  }
  if (criteria.require_pre_window_encounter &&
      !has_encounter_before(stream, spec.windows[0].start, criteria.encounter_tag)) {
    reasons.emplace_back(kReasonNoPreEncounter);
  }
  if (criteria.require_post_window_encounter &&
      !has_encounter_from(stream, spec.windows[1].end, criteria.encounter_tag)) {
    reasons.emplace_back(kReasonNoPostEncounter);
  }
  return reasons;
}

InclusionResult apply_inclusion(std::span<const EventStream> streams, const CrossSectionSpec& spec,
                                const InclusionCriteria& criteria) {
  spec.validate();
  InclusionResult result;
  result.report.total = streams.size();
  for (const auto& s : streams) {
    auto reasons = exclusion_reasons(s, spec, criteria);
    if (reasons.empty()) {
      result.retained.push_back(s);
      continue;
    }
    for (const auto& r : reasons) {
      ++result.report.by_reason[r];
    }
    result.report.excluded.emplace_back(s.patient_id, std::move(reasons));
  }
  result.report.retained = result.retained.size();
  return result;
}

ConditionState classify_state(const EventStream& stream, const ConditionDef& condition,
                              const CrossSectionSpec& spec, int section) {
  const auto& window = spec.window(section);
  return classify(first_event_day(stream, condition.id, spec.history_start),
                  has_encounter_before(stream, window.start, condition.observed_by), window);
}

ConditionState classify_state(const EventStream& stream, std::string_view condition,
                              const CrossSectionSpec& spec, int section, const ConditionCatalog& catalog) {
  return classify_state(stream, catalog.at(condition), spec, section);
}

TransformedDataset::TransformedDataset(std::vector<std::string> patients, std::vector<std::string> conditions,
                                       std::vector<ConditionState> state1, std::vector<ConditionState> state2,
                                       std::vector<std::uint8_t> observed, std::vector<Demographics> demographics)
    : patients_(std::move(patients)),
      conditions_(std::move(conditions)),
      state1_(std::move(state1)),
      state2_(std::move(state2)),
      observed_(std::move(observed)),
      demographics_(std::move(demographics)) {
  const auto n = patients_.size();
  const auto m = conditions_.size();
  if (m > kMaxConditions) {
    throw ValidationError("at most " + std::to_string(kMaxConditions) + " conditions are supported, got " +
                          std::to_string(m));
  }
  if (state1_.size() != n * m || state2_.size() != n * m || observed_.size() != n) {
    throw ValidationError("state matrices do not match patients x conditions");
  }
  if (demographics_.empty()) {
    demographics_.resize(n);
  } else if (demographics_.size() != n) {
    throw ValidationError("demographics do not match patient count");
  }
  present1_.assign(n, 0);
  present2_.assign(n, 0);
  observed1_.assign(n, 0);
  incident2_.assign(n, 0);
  at_risk_.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    n_common_ += observed_[p] != 0 ? 1 : 0;
    for (std::size_t v = 0; v < m; ++v) {
      const auto s1 = state1_[p * m + v];
      const auto s2 = state2_[p * m + v];
      const std::uint64_t bit = std::uint64_t{1} << v;
      if (is_present(s1) && s2 != ConditionState::preexisting) {
        throw ValidationError("patient '" + patients_[p] + "', condition '" + conditions_[v] +
                              "': present at cross section 1 but not pre-existing at cross section 2");
      }
      if (is_present(s1)) present1_[p] |= bit;
      if (is_present(s2)) present2_[p] |= bit;
      if (s1 != ConditionState::not_observed) observed1_[p] |= bit;
      if (s2 == ConditionState::incident) incident2_[p] |= bit;
      if (s1 == ConditionState::absent && s2 != ConditionState::not_observed) at_risk_[p] |= bit;
    }
  }
}

std::optional<std::size_t> TransformedDataset::find_condition(std::string_view id) const {
  for (std::size_t v = 0; v < conditions_.size(); ++v) {
    if (conditions_[v] == id) return v;
  }
  return std::nullopt;
}

std::size_t TransformedDataset::condition_index(std::string_view id) const {
  if (auto v = find_condition(id)) return *v;
  throw DataError("unknown condition '" + std::string(id) + "'");
}

bool TransformedDataset::operator==(const TransformedDataset& other) const {
  return patients_ == other.patients_ && conditions_ == other.conditions_ && state1_ == other.state1_ &&
         state2_ == other.state2_ && observed_ == other.observed_ && demographics_ == other.demographics_;
}

TransformedDataset transform(std::span<const EventStream> streams, const CrossSectionSpec& spec,
                             const ConditionCatalog& catalog, Execution execution) {
  spec.validate();
  std::vector<const ConditionDef*> nodes;
  std::unordered_map<std::string, std::size_t> node_index;
  for (const auto& c : catalog.conditions()) {
    if (c.is_node()) {
      node_index.emplace(c.id, nodes.size());
      nodes.push_back(&c);
    }
  }
  const auto n = streams.size();
  const auto m = nodes.size();
  if (m > TransformedDataset::kMaxConditions) {
    throw DataError("at most 64 node conditions are supported");
  }

  std::vector<std::string> patients(n);
  std::vector<ConditionState> state1(n * m), state2(n * m);
  std::vector<std::uint8_t> observed(n);
  std::vector<Demographics> demographics(n);

  for_each_index(execution, n, [&](std::size_t p) {
    const auto& s = streams[p];
    patients[p] = s.patient_id;
    std::vector<std::optional<Day>> first(m);
    for (const auto& e : s.events) {
      const auto it = node_index.find(e.condition);
      if (it == node_index.end()) {
        if (!catalog.contains(e.condition)) {
          throw DataError("patient '" + s.patient_id + "': event for unknown condition '" + e.condition + "'");
        }
        continue;
      }
      auto& f = first[it->second];
      if (e.day >= spec.history_start && (!f || e.day < *f)) f = e.day;
    }
    for (std::size_t v = 0; v < m; ++v) {
      for (int section = 1; section <= 2; ++section) {
        const auto& window = spec.window(section);
        const auto state = classify(first[v], has_encounter_before(s, window.start, nodes[v]->observed_by), window);
        (section == 1 ? state1 : state2)[p * m + v] = state;
      }
    }
    observed[p] = has_encounter_before(s, spec.windows[0].start, "") ? 1 : 0;
    demographics[p] = Demographics{s.age.value_or(0.0), s.sex == Sex::male,
                                   s.age.has_value() && s.sex != Sex::unknown};
  });

  std::vector<std::string> conditions;
  conditions.reserve(m);
  for (const auto* c : nodes) conditions.push_back(c->id);
  return TransformedDataset(std::move(patients), std::move(conditions), std::move(state1), std::move(state2),
                            std::move(observed), std::move(demographics));
}

std::vector<std::size_t> at_risk_set(const TransformedDataset& data, std::string_view condition) {
  const auto v = data.condition_index(condition);
  const std::uint64_t bit = std::uint64_t{1} << v;
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < data.n_patients(); ++p) {
    if ((data.at_risk(p) & bit) != 0) out.push_back(p);
  }
  return out;
}

} // namespace ehrcsd
