#include <doctest.h>

#include "test_helpers.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/precedence.hpp"
#include "ehrcsd/synthgen.hpp"

#include <cmath>
#include <map>

using namespace ehrcsd;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// patient -> condition -> onset period
std::map<std::string, std::map<std::string, Day>> onset_periods(const SyntheticCohort& c, const TruthModel& m) {
  std::map<std::string, std::map<std::string, Day>> out;
  for (const auto& o : c.onsets) out[o.patient_id][o.condition] = (o.onset_day - m.start_day) / m.period_days;
  return out;
}

void check_within_3se(std::size_t hits, std::size_t trials, double p) {
  REQUIRE(trials > 0);
  const double n = static_cast<double>(trials);
  const double se = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(static_cast<double>(hits) / n - p) < 3.0 * se);
}

} // namespace

TEST_CASE("windows follow the periods") {
  TruthModel m = testing::small_model({"a"}, {});
  m.start_day = 100;
  const auto spec = m.cross_sections();
  CHECK(spec.history_start == 100);
  CHECK(spec.windows[0] == Window{1195, 2290});
  CHECK(spec.windows[1] == Window{2290, 3385});
  m.n_periods = 5;
  CHECK(m.cross_sections().windows[0].start == 100 + 3 * 1095);
}

TEST_CASE("generation is deterministic and schedule independent") {
  const auto m = random_truth_model({}, 3);
  const auto a = generate(m, 300, 17);
  const auto b = generate(m, 300, 17, Execution::parallel);
  CHECK(a.streams == b.streams);
  CHECK(a.onsets == b.onsets);
  CHECK(!(a.streams == generate(m, 300, 18).streams));
  // Patient p does not depend on the cohort size.
  const auto c = generate(m, 50, 17);
  for (std::size_t p = 0; p < 50; ++p) CHECK(c.streams[p] == a.streams[p]);
  CHECK(a.streams[7].patient_id == "p000007");
}

TEST_CASE("every generated patient passes inclusion when always observed") {
  const auto m = random_truth_model({}, 4);
  const auto c = generate(m, 500, 1);
  const auto r = apply_inclusion(c.streams, m.cross_sections(), InclusionCriteria{});
  CHECK(r.report.retained == 500);
  TruthModel sparse = m;
  sparse.observation_prob = 0.5;
  const auto s = generate(sparse, 2000, 1);
  const auto rs = apply_inclusion(s.streams, sparse.cross_sections(), InclusionCriteria{});
  check_within_3se(rs.report.retained, 2000, 0.5);
}

TEST_CASE("marginal onset rate matches the baseline hazard") {
  const auto m = testing::small_model({"a"}, {}, 0.07);
  const auto c = generate(m, 20000, 5);
  const auto periods = onset_periods(c, m);
  std::size_t first = 0;
  for (const auto& [p, conds] : periods) first += conds.at("a") == 0 ? 1 : 0;
  check_within_3se(first, 20000, 0.07);
}

TEST_CASE("a present parent multiplies the odds of onset") {
  const auto m = testing::small_model({"a", "b"}, {{"a", "b"}}, 0.06, 4.0);
  const auto c = generate(m, 40000, 6);
  const auto periods = onset_periods(c, m);
  // Period 1 onset of b among patients free of b after period 0.
  std::size_t exposed = 0, exposed_hits = 0, unexposed = 0, unexposed_hits = 0;
  for (std::size_t p = 0; p < 40000; ++p) {
    const auto it = periods.find(c.streams[p].patient_id);
    std::map<std::string, Day> conds;
    if (it != periods.end()) conds = it->second;
    if (conds.count("b") && conds["b"] == 0) continue;
    const bool a0 = conds.count("a") && conds["a"] == 0;
    const bool hit = conds.count("b") && conds["b"] == 1;
    (a0 ? exposed : unexposed) += 1;
    (a0 ? exposed_hits : unexposed_hits) += hit ? 1 : 0;
  }
  check_within_3se(exposed_hits, exposed, logistic(logit(0.06) + std::log(4.0)));
  check_within_3se(unexposed_hits, unexposed, 0.06);
}

TEST_CASE("null effects leave conditions independent") {
  const auto m = testing::small_model({"a", "b"}, {{"a", "b"}}, 0.1, 1.0);
  const auto c = generate(m, 30000, 8);
  const auto periods = onset_periods(c, m);
  std::size_t a_and_b = 0, a_count = 0, b_count = 0;
  for (const auto& [p, conds] : periods) {
    const bool a = conds.count("a") > 0, b = conds.count("b") > 0;
    a_count += a;
    b_count += b;
    a_and_b += a && b;
  }
  const double pb = static_cast<double>(b_count) / 30000.0;
  check_within_3se(a_and_b, a_count, pb);
}

TEST_CASE("documentation lag and order swaps") {
  const auto base = testing::small_model({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}, 0.1, 4.0);
  const auto zero = generate(base, 2000, 2);
  CHECK(order_swap_fraction(zero) == 0.0);
  for (const auto& o : zero.onsets) CHECK(o.documented_day == o.onset_day);
  auto lagged = base;
  lagged.doc_lag = {LagKind::exponential, 1500.0};
  const auto l = generate(lagged, 2000, 2);
  CHECK(order_swap_fraction(l) > 0.2);
  for (const auto& o : l.onsets) CHECK(o.documented_day >= o.onset_day);
  lagged.doc_lag = {LagKind::uniform, 30.0};
  for (const auto& o : generate(lagged, 500, 2).onsets) CHECK(o.documented_day - o.onset_day <= 30);
  CHECK(parse_lag_kind("exponential") == LagKind::exponential);
  CHECK_THROWS_AS(parse_lag_kind("gamma"), ConfigError);
}

TEST_CASE("chain truth: onsets respect the causal order on average") {
  const auto m = testing::small_model({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}, 0.05, 8.0);
  const auto c = generate(m, 20000, 12);
  const auto d = transform(c.streams, m.cross_sections(), synthetic_catalog(m));
  const auto ab = precedence_counts(d, "a", "b");
  const auto bc = precedence_counts(d, "b", "c");
  CHECK(ab.n_i_first > 2 * ab.n_j_first);
  CHECK(bc.n_i_first > 2 * bc.n_j_first);
}

TEST_CASE("random truth models") {
  RandomModelSpec spec;
  const auto a = random_truth_model(spec, 9);
  const auto b = random_truth_model(spec, 9);
  CHECK(a.dag == b.dag);
  CHECK(a.effect == b.effect);
  CHECK(a.dag.name(0) == "c00");
  CHECK(a.dag.node_count() == 10);
  a.validate();
  for (const auto& [k, v] : a.effect) {
    CHECK(v >= 3.0);
    CHECK(v <= 6.0);
  }
  for (const auto h : a.baseline_hazard) CHECK((h >= 0.03 && h <= 0.08));
  spec.n_nodes = 0;
  CHECK_THROWS_AS(random_truth_model(spec, 1), ConfigError);
  const auto cat = synthetic_catalog(a);
  CHECK(cat.node_ids().size() == 10);
}

TEST_CASE("model validation") {
  auto m = testing::small_model({"a", "b"}, {{"a", "b"}});
  m.validate();
  auto bad = m;
  bad.baseline_hazard.pop_back();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = m;
  bad.effect.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = m;
  bad.effect[{"b", "a"}] = 2.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = m;
  bad.effect[{"a", "b"}] = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = m;
  bad.n_periods = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = m;
  bad.observation_prob = 1.5;
  CHECK_THROWS_AS(generate(bad, 10, 1), ConfigError);
  CHECK_THROWS_AS(generate(m, 0, 1), ConfigError);
  CHECK(m.effect_of(0, 1) == 5.0);
  CHECK_THROWS(m.effect_of(1, 0));
}

TEST_CASE("scoring against the truth") {
  const auto m = testing::small_model({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}});
  CausalGraph found({"d", "c", "b", "a"}, GraphMode::pattern);
  found.add_edge("a", "b");   // true positive
  found.add_edge("c", "b");   // reversed, against time
  found.add_edge("a", "c");   // false positive via a path
  found.add_unoriented("c", "d");  // unoriented, not adjacent
  const auto s = score_against_truth(found, m);
  CHECK(s.truth_edges == 2);
  CHECK(s.found_edges == 4);
  CHECK(s.true_positive == 1);
  CHECK(s.reversed == 1);
  CHECK(s.false_positive == 2);
  CHECK(s.indirect_explainable == 1);
  CHECK(s.against_time == 1);
  CHECK(s.unoriented_adjacent == 0);
  CHECK(*s.orientation_accuracy == 0.5);

  CausalGraph back({"a", "b", "c", "d"});
  back.add_edge("c", "a");
  const auto t = score_against_truth(back, m);
  CHECK(t.against_time == 1);
  CHECK(t.false_positive == 1);
  CHECK(!t.orientation_accuracy);
  CHECK_THROWS_AS(score_against_truth(CausalGraph({"a"}), m), DataError);
}
