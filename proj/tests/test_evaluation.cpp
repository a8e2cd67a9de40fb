#include <doctest.h>

#include "ehrcsd/error.hpp"
#include "ehrcsd/evaluation.hpp"
#include "ehrcsd/io.hpp"

#include <filesystem>

using namespace ehrcsd;

namespace {

const std::filesystem::path kFixtures = EHRCSD_FIXTURE_DIR;

EdgePool pool_fixture(const char* name) { return io::parse_pool(io::read_file(kFixtures / name)); }
CausalGraph graph_fixture(const char* name) { return io::parse_graph(io::read_file(kFixtures / name)).graph; }
ConditionCatalog default_catalog() { return load_catalog(std::filesystem::path(EHRCSD_DATA_DIR) / "default_catalog.txt"); }

const StabilityRow& row_of(const StabilityReport& r, std::string_view i, std::string_view j) {
  for (const auto& row : r.rows) {
    if (row.i == i && row.j == j) return row;
  }
  throw std::runtime_error("row not found");
}

std::vector<NamedEdge> edges_of(const CompletenessReport& r, EdgeClass c) {
  return r.edges[static_cast<std::size_t>(c)];
}

} // namespace

TEST_CASE("stability: hand-computed ambiguity cases") {
  const auto report = stability(pool_fixture("stability_pool.csv"));
  CHECK(report.iterations == 1000);
  CHECK(report.pooled_edges == 5);
  // 600 / 100: reported 700 times, minority 1/7 < 0.3.
  const auto& a = row_of(report, "bmi.25", "sbp");
  CHECK(a.ambiguous);
  CHECK(!a.frequent_ambiguous);
  // 400 / 300: reported 700 times, minority 3/7 >= 0.3.
  const auto& b = row_of(report, "cad", "ldl");
  CHECK(b.ambiguous);
  CHECK(b.frequent_ambiguous);
  CHECK(!row_of(report, "crf", "dm.dx").ambiguous);
  CHECK(row_of(report, "hdl", "mi").ambiguous);
  CHECK(!row_of(report, "hdl", "mi").frequent_ambiguous);
  CHECK(!row_of(report, "dbp", "sbp").ambiguous);
  CHECK(report.ambiguous == 3);
  CHECK(report.frequent_ambiguous == 1);
  CHECK(report.ambiguous_fraction == doctest::Approx(0.6));
  CHECK(report.frequent_ambiguous_fraction == doctest::Approx(0.2));
}

TEST_CASE("stability thresholds") {
  CHECK(is_frequent_ambiguous({350, 150, 0}, 1000));
  CHECK(!is_frequent_ambiguous({351, 149, 0}, 1000));
  CHECK(!is_frequent_ambiguous({250, 249, 0}, 1000));
  CHECK(!is_frequent_ambiguous({0, 0, 900}, 1000));
  StabilityOptions strict{0.9, 0.3};
  CHECK(!is_frequent_ambiguous({400, 300, 0}, 1000, strict));
  CHECK_THROWS_AS(stability(EdgePool({"a", "b"}, 0)), ConfigError);
  const auto empty = stability(EdgePool({"a", "b"}, 4));
  CHECK(empty.pooled_edges == 0);
  CHECK(empty.frequent_ambiguous_fraction == 0.0);
}

TEST_CASE("category aggregation: hand-computed fixture") {
  const auto catalog = default_catalog();
  const auto g = aggregate_categories(pool_fixture("category_pool.csv"), catalog);
  CHECK(g.nodes == std::vector<std::string>{"Compl", "Dm", "Hl", "Htn", "Ob"});
  REQUIRE(g.edges.size() == 4);

  const auto& tie = g.edges[0];
  CHECK(tie.from == "Compl");
  CHECK(tie.to == "Hl");
  CHECK(tie.tie);
  CHECK(tie.confidence == 0.5);
  CHECK(!tie.bold);

  CHECK(g.edges[1].from == "Dm");
  CHECK(g.edges[1].to == "Compl");
  CHECK(g.edges[1].confidence == 1.0);
  CHECK(g.edges[1].bold);

  CHECK(g.edges[2].from == "Htn");
  CHECK(g.edges[2].to == "Compl");
  CHECK(g.edges[2].dominant_count == 7);
  CHECK(g.edges[2].reverse_count == 3);
  CHECK(g.edges[2].confidence == doctest::Approx(0.7));
  CHECK(!g.edges[2].bold);

  // bmi.25 -> sbp lands on Ob -> Htn; 9 reports against 1.
  const auto& ob = g.edges[3];
  CHECK(ob.from == "Ob");
  CHECK(ob.to == "Htn");
  CHECK(ob.dominant_count == 9);
  CHECK(ob.reverse_count == 1);
  CHECK(ob.confidence == doctest::Approx(0.9));
  CHECK(ob.bold);

  const auto dot = category_dot(g);
  CHECK(dot.find("\"Ob\" -> \"Htn\" [label=\"0.9") != std::string::npos);
}

TEST_CASE("category aggregation of a single graph") {
  const auto catalog = default_catalog();
  CausalGraph g(catalog.node_ids());
  g.add_edge("bmi.25", "sbp");
  g.add_edge("bmi.25", "bmi.30");
  const auto c = aggregate_categories(g, catalog);
  REQUIRE(c.edges.size() == 1);
  CHECK(c.edges[0].from == "Ob");
  CHECK(c.edges[0].confidence == 1.0);
  CausalGraph unknown({"zz"});
  CHECK_THROWS_AS(aggregate_categories(unknown, catalog), DataError);
}

TEST_CASE("heuristics: hand-computed fixture") {
  const auto catalog = default_catalog();
  const auto report = check_heuristics(graph_fixture("heuristics_graph.txt"), catalog);
  const auto& h1 = report.results[0];
  CHECK(h1.name == "H1");
  CHECK(h1.applicable == 6);
  CHECK(h1.violating == 1);
  CHECK(h1.violations == std::vector<NamedEdge>{{"fasting.125", "fasting.100"}});
  CHECK(*h1.proportion == doctest::Approx(1.0 / 6.0));

  CHECK(report.results[1].applicable == 2);
  CHECK(report.results[1].violations == std::vector<NamedEdge>{{"ob.dx", "bmi.30"}});
  CHECK(report.results[2].applicable == 1);
  CHECK(report.results[2].violations == std::vector<NamedEdge>{{"hl.tx", "ldl"}});
  // htn.dx -> crf without sbp -> crf or dbp -> crf.
  CHECK(report.results[3].applicable == 2);
  CHECK(report.results[3].violations == std::vector<NamedEdge>{{"htn.dx", "crf"}});
  CHECK(report.results[4].applicable == 1);
  CHECK(report.results[4].violations == std::vector<NamedEdge>{{"dm.tx", "crf"}});
}

TEST_CASE("heuristics: measure edges back diagnosis edges") {
  const auto catalog = default_catalog();
  auto g = graph_fixture("heuristics_graph.txt");
  CausalGraph extended(catalog.node_ids());
  for (const auto& e : g.edges()) extended.add_edge(g.name(e.from), g.name(e.to));
  extended.add_edge("sbp", "crf");
  extended.add_edge("a1c.65", "crf");
  const auto report = check_heuristics(extended, catalog);
  CHECK(report.results[3].violating == 0);
  CHECK(report.results[4].violating == 0);
}

TEST_CASE("heuristics on an empty graph are not applicable") {
  const auto catalog = default_catalog();
  const auto report = check_heuristics(CausalGraph(catalog.node_ids()), catalog);
  for (const auto& r : report.results) {
    CHECK(r.applicable == 0);
    CHECK(!r.proportion);
  }
  CHECK_THROWS_AS(check_heuristics(CausalGraph({"zz"}), catalog), DataError);
}

TEST_CASE("completeness: hand-computed fixture") {
  const auto r = completeness_partition(graph_fixture("completeness_reference.txt"),
                                        graph_fixture("completeness_subject.txt"));
  CHECK(edges_of(r, EdgeClass::shared) == std::vector<NamedEdge>{{"a", "b"}, {"c", "d"}, {"g", "h"}});
  CHECK(edges_of(r, EdgeClass::reversed) == std::vector<NamedEdge>{{"b", "c"}});
  CHECK(edges_of(r, EdgeClass::both_orientations) == std::vector<NamedEdge>{{"e", "f"}, {"b", "f"}});
  CHECK(edges_of(r, EdgeClass::explained) == std::vector<NamedEdge>{{"a", "g"}, {"c", "e"}});
  CHECK(edges_of(r, EdgeClass::unexplained) == std::vector<NamedEdge>{{"h", "e"}});
  CHECK(r.total() == 9);
  CHECK(to_string(EdgeClass::both_orientations) == "both_orientations");
}

TEST_CASE("completeness edge cases") {
  CausalGraph ref({"a", "b"}), sub({"a", "b"});
  ref.add_edge("a", "b");
  CHECK(completeness_partition(ref, ref).count(EdgeClass::shared) == 1);
  CHECK(completeness_partition(ref, sub).count(EdgeClass::unexplained) == 1);
  CausalGraph pattern({"a", "b"}, GraphMode::pattern);
  pattern.add_unoriented("a", "b");
  CHECK(completeness_partition(ref, pattern).count(EdgeClass::shared) == 1);
  CHECK_THROWS_AS(completeness_partition(ref, CausalGraph({"a", "c"})), DataError);
}

TEST_CASE("concordance: hand-computed fixture") {
  const auto r = concordance(pool_fixture("concordance_a.csv"), pool_fixture("concordance_b.csv"));
  CHECK(r.shared_nodes == std::vector<std::string>{"a", "b", "c", "d"});
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows[0].i == "a");
  CHECK(r.rows[0].j == "b");
  CHECK(r.rows[0].agree);
  CHECK(r.rows[1].j == "c");
  CHECK(!r.rows[1].agree);
  CHECK(r.rows[2].j == "d");
  CHECK(r.rows[2].qualifies_a);
  CHECK(!r.rows[2].qualifies_b);
  CHECK(!r.rows[2].agree);
  CHECK(r.rows[3].i == "b");
  CHECK(!r.rows[3].qualifies_a);
  CHECK(r.agreeing == 1);
  CHECK(r.agreement == doctest::Approx(0.25));
}

TEST_CASE("concordance of a pool with itself is complete") {
  const auto a = pool_fixture("concordance_a.csv");
  const auto r = concordance(a, a);
  CHECK(r.agreement == 1.0);
  CHECK(r.rows.size() == 4);
}

TEST_CASE("concordance is invariant to scaling counts and B") {
  const auto a = pool_fixture("concordance_a.csv");
  const auto b = pool_fixture("concordance_b.csv");
  auto scale = [](const EdgePool& p, std::size_t k) {
    EdgePool out(p.nodes(), p.iterations() * k);
    for (const auto& [key, c] : p.counts()) {
      out.add_counts(p.nodes()[key.first], p.nodes()[key.second], {c.ij * k, c.ji * k, c.unoriented * k});
    }
    return out;
  };
  const auto base = concordance(a, b);
  const auto scaled = concordance(scale(a, 3), scale(b, 7));
  CHECK(scaled.agreement == base.agreement);
  REQUIRE(scaled.rows.size() == base.rows.size());
  for (std::size_t k = 0; k < base.rows.size(); ++k) CHECK(scaled.rows[k].agree == base.rows[k].agree);
}

TEST_CASE("concordance errors") {
  EdgePool a({"a", "b"}, 3), b({"c", "d"}, 3);
  CHECK_THROWS_AS(concordance(a, b), DataError);
  CHECK_THROWS_AS(concordance(a, a, 0.0), ConfigError);
  CHECK_THROWS_AS(concordance(a, a, 1.5), ConfigError);
  CHECK(concordance(a, a).agreement == 1.0);
}
