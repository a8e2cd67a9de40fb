#pragma once

#include "ehrcsd/catalog.hpp"
#include "ehrcsd/cohort.hpp"
#include "ehrcsd/rng.hpp"
#include "ehrcsd/synthgen.hpp"

#include <string>
#include <vector>

namespace testing {

inline ehrcsd::ConditionCatalog flat_catalog(const std::vector<std::string>& ids) {
  std::vector<ehrcsd::CategoryDef> cats{{"Syn", "Synthetic", false}};
  std::vector<ehrcsd::ConditionDef> defs;
  for (const auto& id : ids) {
    ehrcsd::ConditionDef d;
    d.id = id;
    d.label = id;
    d.kind = ehrcsd::ConditionKind::diagnosis;
    d.category = "Syn";
    defs.push_back(d);
  }
  return ehrcsd::ConditionCatalog(cats, defs);
}

inline ehrcsd::CrossSectionSpec fixture_windows() {
  ehrcsd::CrossSectionSpec spec;
  spec.history_start = 0;
  spec.windows[0] = {100, 200};
  spec.windows[1] = {200, 300};
  return spec;
}

inline ehrcsd::EventStream patient(std::string id, double age, std::vector<ehrcsd::Day> encounters,
                                   std::vector<std::pair<std::string, ehrcsd::Day>> events) {
  ehrcsd::EventStream s;
  s.patient_id = std::move(id);
  s.age = age;
  s.sex = ehrcsd::Sex::female;
  for (auto d : encounters) s.encounters.push_back({d, ""});
  for (auto& [c, d] : events) s.events.push_back({c, d});
  s.sort();
  return s;
}

/// Random streams over conditions c0..c{m-1}, days in [-50, 400).
inline std::vector<ehrcsd::EventStream> random_streams(ehrcsd::Rng& rng, std::size_t n, std::size_t m) {
  std::vector<ehrcsd::EventStream> out;
  for (std::size_t p = 0; p < n; ++p) {
    ehrcsd::EventStream s;
    s.patient_id = "p" + std::to_string(p);
    s.age = 10.0 + 80.0 * rng.uniform();
    s.sex = rng.bernoulli(0.5) ? ehrcsd::Sex::male : ehrcsd::Sex::female;
    const auto n_enc = rng.index(5);
    for (std::uint64_t k = 0; k < n_enc; ++k) s.encounters.push_back({static_cast<ehrcsd::Day>(rng.index(450)) - 50, ""});
    for (std::size_t v = 0; v < m; ++v) {
      const auto n_ev = rng.index(3);
      for (std::uint64_t k = 0; k < n_ev; ++k) {
        s.events.push_back({"c" + std::to_string(v), static_cast<ehrcsd::Day>(rng.index(450)) - 50});
      }
    }
    s.sort();
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<std::string> condition_ids(std::size_t m) {
  std::vector<std::string> ids;
  for (std::size_t v = 0; v < m; ++v) ids.push_back("c" + std::to_string(v));
  return ids;
}

/// Chain or other small truth model over the given edges with one shared
/// hazard and effect.
inline ehrcsd::TruthModel small_model(const std::vector<std::string>& nodes,
                                      const std::vector<std::pair<std::string, std::string>>& edges,
                                      double hazard = 0.05, double effect = 5.0) {
  ehrcsd::TruthModel m;
  m.dag = ehrcsd::CausalGraph(nodes);
  for (const auto& [a, b] : edges) {
    m.dag.add_edge(a, b);
    m.effect[{a, b}] = effect;
  }
  m.baseline_hazard.assign(nodes.size(), hazard);
  return m;
}

/// Generated cohort transformed with the model's own windows, no exclusions.
inline ehrcsd::TransformedDataset simulate(const ehrcsd::TruthModel& model, std::size_t n, std::uint64_t seed) {
  const auto cohort = ehrcsd::generate(model, n, seed);
  return ehrcsd::transform(cohort.streams, model.cross_sections(), ehrcsd::synthetic_catalog(model));
}

} // namespace testing
