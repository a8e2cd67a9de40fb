#include <doctest.h>

#include "oracles.hpp"
#include "test_helpers.hpp"

#include "ehrcsd/config.hpp"
#include "ehrcsd/error.hpp"
#include "ehrcsd/io.hpp"

#include <filesystem>

using namespace ehrcsd;

TEST_CASE("cohort files round-trip") {
  const auto m = random_truth_model({5, 0.5}, 2);
  auto streams = generate(m, 200, 3).streams;
  streams[0].encounters.front().tag = "bp";
  streams[1].age.reset();
  streams[1].sex = Sex::unknown;
  const auto back = io::parse_cohort(io::format_events(streams), io::format_patients(streams));
  CHECK(back == streams);
}

TEST_CASE("cohort parsing") {
  const std::string events = "patient_id,condition_id,day\n# comment\n\np1,a,5\np1,b,3\n";
  const std::string patients = "patient_id,birth_day,sex,encounters\np1,-3652,F,1;bp:9\np2,0,M,\n";
  const auto s = io::parse_cohort(events, patients, Day{3652});
  REQUIRE(s.size() == 2);
  CHECK(*s[0].age == doctest::Approx(20.0).epsilon(0.01));
  CHECK(s[0].events.front().condition == "b");
  CHECK(s[0].encounters[1].tag == "bp");
  CHECK(s[1].sex == Sex::male);
  CHECK(s[1].events.empty());
  CHECK_THROWS_AS(io::parse_cohort("patient_id,condition_id,day\nzz,a,1\n", patients, Day{0}), DataError);
  CHECK_THROWS_AS(io::parse_cohort(events, patients), ParseError);
  CHECK_THROWS_AS(io::parse_cohort("patient_id,condition_id,day\np1,a\n", patients, Day{0}), ParseError);
  CHECK_THROWS_AS(io::parse_cohort("patient_id,condition_id,day\np1,a,x\n", patients, Day{0}), ParseError);
}

TEST_CASE("state matrices round-trip") {
  Rng rng(4);
  const auto d = oracle::random_dataset(rng, 60, 4);
  const auto text = io::format_states(d);
  CHECK(text.rfind("patient_id,age,sex,observed,c0.1,c0.2,", 0) == 0);
  CHECK(io::parse_states(text) == d);
}

TEST_CASE("graph files round-trip") {
  CausalGraph g({"x", "a", "m"}, GraphMode::pattern);
  g.add_edge("x", "a");
  g.add_unoriented("a", "m");
  const auto text = io::format_graph(g, {{"w", "1.5"}});
  const auto back = io::parse_graph(text);
  CHECK(back.graph == g);
  CHECK(back.metadata.at("w") == "1.5");
  CHECK_THROWS_AS(io::parse_graph("a -> b\n"), ParseError);
  CHECK_THROWS_AS(io::parse_graph("# nodes: a,b\na => b\n"), ParseError);
  CHECK_THROWS_AS(io::parse_graph("# nodes: a,b\n# mode: dag\na -- b\n"), ParseError);
  const auto dot = io::graph_dot(g);
  CHECK(dot.find("\"x\" -> \"a\"") != std::string::npos);
}

TEST_CASE("pool files round-trip") {
  EdgePool p({"b", "a", "c"}, 7);
  p.add_counts("a", "b", {3, 1, 2});
  p.add_counts("c", "a", {4, 0, 0});
  p.record_failure(5, "too small\ncohort");
  const auto back = io::parse_pool(io::format_pool(p));
  CHECK(back.at("a", "b") == p.at("a", "b"));
  CHECK(back.at("a", "c") == PairCounts{0, 4, 0});
  CHECK(back.iterations() == 7);
  REQUIRE(back.failures().size() == 1);
  CHECK(back.failures()[0].message == "too small cohort");
  CHECK(io::format_pool(back) == io::format_pool(p));
}

TEST_CASE("table parsing") {
  const auto t = io::parse_table("a,b\n1,2\n", "t");
  CHECK(t.column("b") == 1);
  CHECK(!t.find_column("c"));
  CHECK_THROWS_AS(t.column("c"), ParseError);
  CHECK_THROWS_AS(io::parse_table("a,b\n1\n", "t"), ParseError);
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "ehrcsd_io_test";
  std::filesystem::remove_all(dir);
  io::write_file(dir / "nested" / "x.txt", "hello");
  CHECK(io::read_file(dir / "nested" / "x.txt") == "hello");
  CHECK_THROWS_AS(io::read_file(dir / "missing.txt"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run config parsing") {
  const auto c = parse_run_config(R"({
    "catalog": "cat.txt",
    "output_dir": "/abs/out",
    "windows": {"history_start": 0, "window1": [100, 200], "window2": [200, 300]},
    "inclusion": {"min_age": 21, "encounter_tag": "bp"},
    "precedence": {"w": 2.0, "alpha": 0.05},
    "search": {"strategy": "sweep"},
    "baseline": {"penalty": 1.0, "mode": "raw"},
    "bootstrap": {"iterations": 50, "seed": 9, "algorithm": "baseline_raw"},
    "evaluation": {"frequent_share": 0.6, "concordance_threshold": 0.5},
    "parallel": false
  })", "/base");
  CHECK(c.catalog == std::filesystem::path("/base/cat.txt"));
  CHECK(c.output_dir == std::filesystem::path("/abs/out"));
  CHECK(c.cross_sections().windows[1] == Window{200, 300});
  CHECK(c.inclusion.min_age == 21.0);
  CHECK(c.inclusion.encounter_tag == "bp");
  CHECK(c.w == 2.0);
  CHECK(*c.alpha == 0.05);
  CHECK(c.strategy == Strategy::sweep);
  CHECK(c.baseline_mode == BaselineMode::raw);
  CHECK(c.bootstrap_iterations == 50);
  CHECK(c.seed == 9);
  CHECK(c.algorithm == Algorithm::baseline_raw);
  CHECK(c.stability.frequent_share == 0.6);
  CHECK(c.execution() == Execution::serial);
  const auto a = c.algorithm_config();
  CHECK(a.w == 2.0);
  CHECK(a.search.strategy == Strategy::sweep);
  CHECK(a.baseline.penalty == 1.0);
  CHECK(!c.canonical.empty());
}

TEST_CASE("run config rejects unknown keys and bad values") {
  CHECK_THROWS_AS(parse_run_config(R"({"wat": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"precedence": {"w": 1.5, "beta": 2}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"precedence": {"w": 0.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"precedence": {"alpha": 1.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"search": {"strategy": "beam"}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"bootstrap": {"iterations": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"precedence": {"w": "big"}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"windows": {"history_start": 0, "window1": [200, 100], "window2": [200, 300]}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config("{}").cross_sections(), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("synthetic model config") {
  const auto c = parse_run_config(R"({
    "synth": {"n_patients": 100, "seed": 4, "model": {
      "nodes": ["a", "b"], "hazard": {"a": 0.05, "b": 0.07},
      "edges": [{"from": "a", "to": "b", "effect": 3.0}],
      "doc_lag": {"kind": "uniform", "scale": 30}, "start_day": 10}}
  })");
  REQUIRE(c.synth);
  const auto& m = c.synth->model;
  CHECK(m.dag.has_edge(0, 1));
  CHECK(m.baseline_hazard == std::vector<double>{0.05, 0.07});
  CHECK(m.effect_of(0, 1) == 3.0);
  CHECK(m.doc_lag == DocLag{LagKind::uniform, 30.0});
  CHECK(c.cross_sections() == m.cross_sections());
  CHECK(c.synth->n_patients == 100);

  const auto back = parse_truth_model(truth_model_json(m));
  CHECK(back.dag == m.dag);
  CHECK(back.effect == m.effect);
  CHECK(back.baseline_hazard == m.baseline_hazard);
  CHECK(back.doc_lag == m.doc_lag);
  CHECK(back.start_day == 10);

  const auto r = parse_truth_model(R"({"random": {"n_nodes": 6, "seed": 3}})");
  CHECK(r.dag == random_truth_model({6}, 3).dag);
  CHECK_THROWS_AS(parse_truth_model(R"({"nodes": ["a"], "hazard": {"a": 0.1}, "edges": [{"from": "a", "to": "a", "effect": 2}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_truth_model(R"({"nodes": ["a"], "hazard": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_truth_model(R"({"random": {}, "nodes": ["a"]})"), ConfigError);
}
