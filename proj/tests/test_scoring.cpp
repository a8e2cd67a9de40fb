#include <doctest.h>

#include "oracles.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace ehrcsd;

namespace {

CausalGraph random_dag(Rng& rng, const std::vector<std::string>& nodes, double p) {
  CausalGraph g(nodes);
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.index(k)]);
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      if (rng.bernoulli(p)) g.add_edge(order[a], order[b]);
    }
  }
  return g;
}

// Ungrouped per-patient fit built straight from the state matrices.
double brute_node_loglik(const TransformedDataset& d, std::size_t child, const std::vector<std::size_t>& parents) {
  std::vector<std::size_t> rows;
  for (std::size_t p = 0; p < d.n_patients(); ++p) {
    if (d.state1(p, child) == ConditionState::absent &&
        d.state2(p, child) != ConditionState::not_observed) {
      rows.push_back(p);
    }
  }
  if (rows.empty()) return 0.0;
  BinomialCells c;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(parents.size());
  c.design = Eigen::MatrixXd::Zero(n, k + 1);
  c.trials = Eigen::VectorXd::Ones(n);
  c.successes = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto p = rows[static_cast<std::size_t>(r)];
    c.design(r, 0) = 1.0;
    for (Eigen::Index a = 0; a < k; ++a) {
      c.design(r, a + 1) = oracle::present(d.state1(p, parents[static_cast<std::size_t>(a)])) ? 1.0 : 0.0;
    }
    c.successes[r] = d.state2(p, child) == ConditionState::incident ? 1.0 : 0.0;
  }
  return fit_binomial_logistic(c).loglik;
}

} // namespace

TEST_CASE("bic equals -2 loglik + ln(n_common) |E| on random graphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const auto d = oracle::random_dataset(rng, 150 + rng.index(100), 3 + rng.index(5));
    const Scorer scorer(d);
    const auto g = random_dag(rng, d.conditions(), 0.4);
    const auto report = bic(scorer, g);
    const double expected = -2.0 * graph_loglik(scorer, g) +
                            std::log(static_cast<double>(d.n_common())) * static_cast<double>(g.edge_count());
    CHECK(std::abs(report.bic - expected) < 1e-9);
    CHECK(report.n_edges == g.edge_count());
    CHECK(report.n_common == d.n_common());
  }
}

TEST_CASE("grouped log-likelihood agrees with the ungrouped oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = oracle::random_dataset(rng, 200, 5);
    const Scorer scorer(d);
    const auto g = random_dag(rng, d.conditions(), 0.5);
    double total = 0.0;
    for (std::size_t v = 0; v < d.n_conditions(); ++v) {
      total += brute_node_loglik(d, v, data_parents(d, g, v));
    }
    CHECK(graph_loglik(scorer, g) == doctest::Approx(total).epsilon(1e-9));
  }
}

TEST_CASE("delta_bic equals full recomputation") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto d = oracle::random_dataset(rng, 180, 5);
    const Scorer scorer(d);
    auto g = random_dag(rng, d.conditions(), 0.3);
    for (std::size_t a = 0; a < g.node_count(); ++a) {
      for (std::size_t b = 0; b < g.node_count(); ++b) {
        if (a == b || g.adjacent(a, b) || g.creates_cycle(a, b)) continue;
        const double before = bic(scorer, g).bic;
        auto h = g;
        h.add_edge(a, b);
        const double after = bic(scorer, h).bic;
        CHECK(std::abs(delta_bic(scorer, g, a, b) - (before - after)) < 1e-9);
      }
    }
  }
}

TEST_CASE("a deterministic effect yields a large positive delta") {
  // b is incident exactly when a was present.
  std::vector<ConditionState> s1, s2;
  std::vector<std::string> patients;
  for (int p = 0; p < 200; ++p) {
    patients.push_back("p" + std::to_string(p));
    const bool a = p % 2 == 0;
    s1.push_back(a ? ConditionState::preexisting : ConditionState::absent);
    s2.push_back(a ? ConditionState::preexisting : ConditionState::absent);
    s1.push_back(ConditionState::absent);
    s2.push_back(a ? ConditionState::incident : ConditionState::absent);
  }
  const TransformedDataset d(patients, {"a", "b"}, s1, s2, std::vector<std::uint8_t>(200, 1));
  CausalGraph g(d.conditions());
  CHECK(delta_bic(d, g, "a", "b") > 100.0);
  // Nobody is at risk for a in reverse: b is absent at cross section 1, but a
  // is not incident for anyone, so the fit gains nothing.
  CHECK(delta_bic(d, g, "b", "a") == doctest::Approx(-std::log(200.0)));
}

TEST_CASE("empty at-risk set contributes zero") {
  const TransformedDataset d({"p1", "p2"}, {"a", "b"},
                             {ConditionState::preexisting, ConditionState::absent, ConditionState::preexisting,
                              ConditionState::absent},
                             {ConditionState::preexisting, ConditionState::incident, ConditionState::preexisting,
                              ConditionState::absent},
                             {1, 1});
  const auto report = bic(d, CausalGraph(d.conditions()));
  CHECK(report.empty_at_risk == std::vector<std::string>{"a"});
  CHECK(report.total_loglik == doctest::Approx(2 * std::log(0.5)));
  CHECK_THROWS_AS(Scorer(d).fit(0, {}), DataError);
}

TEST_CASE("fit_logistic reports the model") {
  Rng rng(3);
  const auto d = oracle::random_dataset(rng, 300, 3);
  const auto m = fit_logistic(d, "c2", {"c0", "c1"});
  CHECK(m.child == "c2");
  CHECK(m.parents == std::vector<std::string>{"c0", "c1"});
  CHECK(m.coefficients.size() == 2);
  CHECK(m.covariate_coefficients.empty());
  CHECK(m.n_fit == at_risk_set(d, "c2").size());
  CHECK(m.loglik == doctest::Approx(brute_node_loglik(d, 2, {0, 1})).epsilon(1e-9));
}

TEST_CASE("demographic covariates add columns but no penalty") {
  Rng rng(8);
  const auto base = oracle::random_dataset(rng, 200, 3);
  std::vector<ConditionState> s1, s2;
  for (std::size_t p = 0; p < base.n_patients(); ++p) {
    for (std::size_t v = 0; v < 3; ++v) {
      s1.push_back(base.state1(p, v));
      s2.push_back(base.state2(p, v));
    }
  }
  std::vector<std::uint8_t> observed;
  std::vector<Demographics> demo;
  for (std::size_t p = 0; p < base.n_patients(); ++p) {
    observed.push_back(base.observed(p) ? 1 : 0);
    demo.push_back({20.0 + static_cast<double>(p % 60), p % 3 == 0, true});
  }
  const TransformedDataset d(base.patients(), base.conditions(), s1, s2, observed, demo);
  ScoringOptions with;
  with.include_demographics = true;
  CausalGraph g(d.conditions());
  g.add_edge("c0", "c1");
  const auto plain = bic(d, g);
  const auto adjusted = bic(d, g, with);
  CHECK(adjusted.total_loglik >= plain.total_loglik - 1e-9);
  CHECK(adjusted.n_edges == 1);
  CHECK(fit_logistic(d, "c1", {"c0"}, with).covariate_coefficients.size() == 2);
}

TEST_CASE("scoring errors") {
  Rng rng(1);
  const auto d = oracle::random_dataset(rng, 50, 3);
  CausalGraph g(d.conditions());
  g.add_edge("c0", "c1");
  CHECK_THROWS_AS(delta_bic(d, g, "c0", "c1"), DataError);
  CHECK_THROWS_AS(Scorer(d).fit(1, std::vector<std::size_t>{1}), DataError);
  CHECK_THROWS_AS(bic(d, CausalGraph({"zz"})), DataError);
  CausalGraph pattern(d.conditions(), GraphMode::pattern);
  pattern.add_unoriented("c0", "c1");
  CHECK_THROWS_AS(bic(d, pattern), DataError);
  const TransformedDataset none({"p"}, {"a"}, {ConditionState::absent}, {ConditionState::incident}, {0});
  CHECK_THROWS_AS(bic(none, CausalGraph({"a"})), DataError);
}
