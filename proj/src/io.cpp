#include "ehrcsd/io.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace ehrcsd::io {

using text::format_double;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
  if (auto c = find_column(name)) return *c;
  throw ParseError("missing column '" + std::string(name) + "'");
}

Table parse_table(std::string_view content, std::string_view what) {
  Table table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto fields = text::split(line, ',');
    for (auto& f : fields) f = std::string(text::trim(f));
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(std::string(what) + " line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw ParseError(std::string(what) + ": missing header");
  return table;
}

namespace {

void check_id(std::string_view id, std::string_view what) {
  if (id.empty() || id.find_first_of(",\n\r#") != std::string_view::npos) {
    throw DataError(std::string(what) + " '" + std::string(id) + "' is empty or contains a reserved character");
  }
}

std::string sex_code(Sex s) {
  switch (s) {
    case Sex::male: return "M";
    case Sex::female: return "F";
    case Sex::unknown: return "";
  }
  return "";
}

Sex parse_sex(std::string_view s) {
  if (s == "M" || s == "m") return Sex::male;
  if (s == "F" || s == "f") return Sex::female;
  if (s.empty() || s == "NA") return Sex::unknown;
  throw ParseError("invalid sex '" + std::string(s) + "'");
}

std::string fmt_int(std::int64_t v) { return std::to_string(v); }

} // namespace

std::string format_events(std::span<const EventStream> streams) {
  std::string out = "patient_id,condition_id,day\n";
  for (const auto& s : streams) {
    check_id(s.patient_id, "patient id");
    for (const auto& e : s.events) {
      check_id(e.condition, "condition id");
      out += s.patient_id + "," + e.condition + "," + fmt_int(e.day) + "\n";
    }
  }
  return out;
}

std::string format_patients(std::span<const EventStream> streams) {
  std::string out = "patient_id,age,sex,encounters\n";
  for (const auto& s : streams) {
    check_id(s.patient_id, "patient id");
    std::vector<std::string> enc;
    for (const auto& e : s.encounters) enc.push_back(e.tag.empty() ? fmt_int(e.day) : e.tag + ":" + fmt_int(e.day));
    out += s.patient_id + "," + (s.age ? format_double(*s.age) : std::string()) + "," + sex_code(s.sex) + "," +
           text::join(enc, ";") + "\n";
  }
  return out;
}

std::vector<EventStream> parse_cohort(std::string_view events, std::string_view patients,
                                      std::optional<Day> age_reference_day) {
  const auto pt = parse_table(patients, "patients");
  const auto id_col = pt.column("patient_id");
  const auto age_col = pt.find_column("age");
  const auto birth_col = pt.find_column("birth_day");
  const auto sex_col = pt.column("sex");
  const auto enc_col = pt.column("encounters");
  if (!age_col && !birth_col) throw ParseError("patients: need an 'age' or a 'birth_day' column");
  if (birth_col && !age_reference_day) throw ParseError("patients: birth_day needs a reference day");

  std::vector<EventStream> streams;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& row : pt.rows) {
    EventStream s;
    s.patient_id = row[id_col];
    check_id(s.patient_id, "patient id");
    if (!index.emplace(s.patient_id, streams.size()).second) {
      throw ParseError("patients: duplicate patient id '" + s.patient_id + "'");
    }
    if (age_col && !row[*age_col].empty() && row[*age_col] != "NA") {
      s.age = text::parse_double(row[*age_col], "age");
    } else if (birth_col && !row[*birth_col].empty() && row[*birth_col] != "NA") {
      const auto born = text::parse_int(row[*birth_col], "birth_day");
      s.age = static_cast<double>(*age_reference_day - born) / 365.25;
    }
    s.sex = parse_sex(row[sex_col]);
    if (!row[enc_col].empty()) {
      for (const auto& token : text::split(row[enc_col], ';')) {
        const auto t = text::trim(token);
        if (t.empty()) continue;
        const auto colon = t.find(':');
        Encounter e;
        if (colon == std::string_view::npos) {
          e.day = text::parse_int(t, "encounter day");
        } else {
          e.tag = std::string(t.substr(0, colon));
          e.day = text::parse_int(t.substr(colon + 1), "encounter day");
        }
        s.encounters.push_back(std::move(e));
      }
    }
    streams.push_back(std::move(s));
  }

  const auto et = parse_table(events, "events");
  const auto ep = et.column("patient_id");
  const auto ec = et.column("condition_id");
  const auto ed = et.column("day");
  for (const auto& row : et.rows) {
    const auto it = index.find(row[ep]);
    if (it == index.end()) throw DataError("event for unknown patient '" + row[ep] + "'");
    check_id(row[ec], "condition id");
    streams[it->second].events.push_back({row[ec], text::parse_int(row[ed], "event day")});
  }
  for (auto& s : streams) s.sort();
  return streams;
}

std::string format_states(const TransformedDataset& data) {
  std::string out = "patient_id,age,sex,observed";
  for (const auto& c : data.conditions()) out += "," + c + ".1," + c + ".2";
  out += "\n";
  const auto& demo = data.demographics();
  for (std::size_t p = 0; p < data.n_patients(); ++p) {
    out += data.patients()[p];
    if (p < demo.size() && demo[p].known) {
      out += "," + format_double(demo[p].age) + "," + (demo[p].male ? "M" : "F");
    } else {
      out += ",,";
    }
    out += data.observed(p) ? ",1" : ",0";
    for (std::size_t v = 0; v < data.n_conditions(); ++v) {
      out += ',';
      out += state_code(data.state1(p, v));
      out += ',';
      out += state_code(data.state2(p, v));
    }
    out += "\n";
  }
  return out;
}

TransformedDataset parse_states(std::string_view content) {
  const auto t = parse_table(content, "states");
  const auto id = t.column("patient_id");
  const auto age = t.column("age");
  const auto sex = t.column("sex");
  const auto obs = t.column("observed");
  std::vector<std::string> conditions;
  std::vector<std::pair<std::size_t, std::size_t>> cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const auto& h = t.header[c];
    if (h.size() > 2 && h.compare(h.size() - 2, 2, ".1") == 0) {
      const auto name = h.substr(0, h.size() - 2);
      conditions.push_back(name);
      cols.emplace_back(c, t.column(name + ".2"));
    }
  }
  std::vector<std::string> patients;
  std::vector<ConditionState> s1, s2;
  std::vector<std::uint8_t> observed;
  std::vector<Demographics> demo;
  auto code = [](const std::string& f) {
    if (f.size() != 1) throw ParseError("invalid condition state '" + f + "'");
    return parse_state_code(f[0]);
  };
  for (const auto& row : t.rows) {
    patients.push_back(row[id]);
    Demographics d;
    if (!row[age].empty()) {
      d.age = text::parse_double(row[age], "age");
      d.male = parse_sex(row[sex]) == Sex::male;
      d.known = true;
    }
    demo.push_back(d);
    if (row[obs] != "0" && row[obs] != "1") throw ParseError("observed must be 0 or 1");
    observed.push_back(row[obs] == "1" ? 1 : 0);
    for (const auto& [a, b] : cols) {
      s1.push_back(code(row[a]));
      s2.push_back(code(row[b]));
    }
  }
  return TransformedDataset(std::move(patients), std::move(conditions), std::move(s1), std::move(s2),
                            std::move(observed), std::move(demo));
}

std::string format_exclusions(const ExclusionReport& report) {
  std::string out = "patient_id,reasons\n";
  for (const auto& [id, reasons] : report.excluded) out += id + "," + text::join(reasons, ";") + "\n";
  return out;
}

std::string format_graph(const CausalGraph& graph, const std::map<std::string, std::string>& metadata) {
  std::string out = "# nodes: " + text::join(graph.nodes(), ",") + "\n";
  out += std::string("# mode: ") + (graph.mode() == GraphMode::dag ? "dag" : "pattern") + "\n";
  for (const auto& [k, v] : metadata) {
    if (k == "nodes" || k == "mode") continue;
    out += "# " + k + ": " + v + "\n";
  }
  for (const auto& e : graph.edges()) out += graph.name(e.from) + " -> " + graph.name(e.to) + "\n";
  for (const auto& [a, b] : graph.unoriented_edges()) out += graph.name(a) + " -- " + graph.name(b) + "\n";
  return out;
}

GraphFile parse_graph(std::string_view content) {
  GraphFile file;
  std::vector<std::pair<std::string, std::string>> directed, unoriented;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto body = text::trim(t.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      file.metadata[std::string(text::trim(body.substr(0, colon)))] = std::string(text::trim(body.substr(colon + 1)));
      continue;
    }
    auto arrow = t.find("->");
    auto& target = arrow != std::string_view::npos ? directed : unoriented;
    if (arrow == std::string_view::npos) arrow = t.find("--");
    if (arrow == std::string_view::npos) {
      throw ParseError("graph line " + std::to_string(line_no) + ": expected 'a -> b' or 'a -- b'");
    }
    target.emplace_back(std::string(text::trim(t.substr(0, arrow))), std::string(text::trim(t.substr(arrow + 2))));
  }
  const auto nodes_it = file.metadata.find("nodes");
  if (nodes_it == file.metadata.end()) throw ParseError("graph file lacks a '# nodes:' header");
  std::vector<std::string> nodes;
  for (const auto& n : text::split(nodes_it->second, ',')) {
    if (!text::trim(n).empty()) nodes.emplace_back(text::trim(n));
  }
  GraphMode mode = unoriented.empty() ? GraphMode::dag : GraphMode::pattern;
  if (const auto m = file.metadata.find("mode"); m != file.metadata.end()) {
    if (m->second == "pattern") mode = GraphMode::pattern;
    else if (m->second == "dag") mode = GraphMode::dag;
    else throw ParseError("graph mode must be dag or pattern");
  }
  if (mode == GraphMode::dag && !unoriented.empty()) throw ParseError("unoriented edge in a dag graph file");
  file.graph = CausalGraph(std::move(nodes), mode);
  for (const auto& [a, b] : directed) file.graph.add_edge(a, b);
  for (const auto& [a, b] : unoriented) file.graph.add_unoriented(a, b);
  return file;
}

std::string graph_dot(const CausalGraph& graph) {
  std::string out = "digraph G {\n";
  for (const auto& n : graph.nodes()) out += "  \"" + n + "\";\n";
  for (const auto& e : graph.edges()) out += "  \"" + graph.name(e.from) + "\" -> \"" + graph.name(e.to) + "\";\n";
  for (const auto& [a, b] : graph.unoriented_edges()) {
    out += "  \"" + graph.name(a) + "\" -> \"" + graph.name(b) + "\" [dir=none];\n";
  }
  out += "}\n";
  return out;
}

std::string format_precedence(const TransformedDataset& data, std::span<const PrecedenceRow> rows) {
  std::string out = "i,j,n_i_first,n_j_first,n_both_cs2,ratio,decision,p_value\n";
  for (const auto& r : rows) {
    out += data.conditions()[r.i] + "," + data.conditions()[r.j] + "," + std::to_string(r.counts.n_i_first) + "," +
           std::to_string(r.counts.n_j_first) + "," + std::to_string(r.counts.n_both_cs2) + "," +
           format_double(r.counts.ratio()) + "," + std::string(to_string(r.decision)) + "," +
           format_double(r.p_value) + "\n";
  }
  return out;
}

std::string format_candidates(const CandidateSet& candidates) {
  std::string out = "parent,child,n_parent_first,n_child_first,n_both_cs2,ratio,p_value\n";
  for (const auto& c : candidates.pairs) {
    out += candidates.conditions[c.parent] + "," + candidates.conditions[c.child] + "," +
           std::to_string(c.counts.n_i_first) + "," + std::to_string(c.counts.n_j_first) + "," +
           std::to_string(c.counts.n_both_cs2) + "," + format_double(c.ratio) + "," + format_double(c.p_value) + "\n";
  }
  return out;
}

std::string format_trace(const CausalGraph& graph, std::span<const TraceEntry> trace) {
  std::string out = "round,parent,child,delta_bic,decision\n";
  for (const auto& t : trace) {
    out += std::to_string(t.round) + "," + graph.name(t.parent) + "," + graph.name(t.child) + "," +
           (std::isnan(t.delta_bic) ? std::string("NA") : format_double(t.delta_bic)) + "," +
           std::string(to_string(t.decision)) + "\n";
  }
  return out;
}

std::string format_score(const ScoreReport& r) {
  std::string out = "total_loglik=" + format_double(r.total_loglik) + "\n";
  out += "n_common=" + std::to_string(r.n_common) + "\n";
  out += "n_edges=" + std::to_string(r.n_edges) + "\n";
  out += "bic=" + format_double(r.bic) + "\n";
  out += "empty_at_risk=" + text::join(r.empty_at_risk, ";") + "\n";
  return out;
}

std::string format_pool(const EdgePool& pool) {
  std::string out = "# nodes: " + text::join(pool.nodes(), ",") + "\n";
  out += "# iterations: " + std::to_string(pool.iterations()) + "\n";
  for (const auto& f : pool.failures()) {
    std::string msg = f.message;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out += "# failed: " + std::to_string(f.iteration) + " " + msg + "\n";
  }
  out += "i,j,count_ij,count_ji,count_unoriented,B\n";
  for (const auto& [key, c] : pool.counts()) {
    out += pool.nodes()[key.first] + "," + pool.nodes()[key.second] + "," + std::to_string(c.ij) + "," +
           std::to_string(c.ji) + "," + std::to_string(c.unoriented) + "," + std::to_string(pool.iterations()) + "\n";
  }
  return out;
}

EdgePool parse_pool(std::string_view content) {
  std::optional<std::vector<std::string>> nodes;
  std::optional<std::size_t> iterations;
  std::vector<std::pair<std::size_t, std::string>> failures;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() != '#') continue;
    const auto body = text::trim(t.substr(1));
    if (body.rfind("nodes:", 0) == 0) {
      nodes.emplace();
      for (const auto& n : text::split(text::trim(body.substr(6)), ',')) {
        if (!text::trim(n).empty()) nodes->emplace_back(text::trim(n));
      }
    } else if (body.rfind("iterations:", 0) == 0) {
      iterations = static_cast<std::size_t>(text::parse_int(text::trim(body.substr(11)), "iterations"));
    } else if (body.rfind("failed:", 0) == 0) {
      const auto rest = text::trim(body.substr(7));
      const auto space = rest.find(' ');
      const auto idx = text::parse_int(rest.substr(0, space), "failed iteration");
      failures.emplace_back(static_cast<std::size_t>(idx),
                            space == std::string_view::npos ? std::string() : std::string(rest.substr(space + 1)));
    }
  }
  const auto table = parse_table(content, "pool");
  if (!nodes) {
    std::vector<std::string> seen;
    for (const auto& row : table.rows) {
      seen.push_back(row[table.column("i")]);
      seen.push_back(row[table.column("j")]);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    nodes = std::move(seen);
  }
  if (!iterations) {
    if (table.rows.empty()) throw ParseError("pool: cannot determine B");
    iterations = static_cast<std::size_t>(text::parse_int(table.rows.front()[table.column("B")], "B"));
  }
  EdgePool pool(*nodes, *iterations);
  const auto ci = table.column("i"), cj = table.column("j"), cij = table.column("count_ij"),
             cji = table.column("count_ji"), cu = table.column("count_unoriented"), cb = table.column("B");
  auto count = [](const std::string& s) {
    const auto v = text::parse_int(s, "count");
    if (v < 0) throw ParseError("pool counts must be non-negative");
    return static_cast<std::size_t>(v);
  };
  for (const auto& row : table.rows) {
    if (count(row[cb]) != *iterations) throw ParseError("pool: inconsistent B");
    pool.add_counts(row[ci], row[cj], {count(row[cij]), count(row[cji]), count(row[cu])});
  }
  for (auto& [i, msg] : failures) pool.record_failure(i, std::move(msg));
  pool.validate();
  return pool;
}

std::string format_stability(const StabilityReport& report) {
  std::string out = "i,j,count_ij,count_ji,count_unoriented,ambiguous,frequent_ambiguous\n";
  for (const auto& r : report.rows) {
    out += r.i + "," + r.j + "," + std::to_string(r.counts.ij) + "," + std::to_string(r.counts.ji) + "," +
           std::to_string(r.counts.unoriented) + "," + (r.ambiguous ? "1" : "0") + "," +
           (r.frequent_ambiguous ? "1" : "0") + "\n";
  }
  return out;
}

std::string format_stability_summary(const StabilityReport& r) {
  return "B,pooled_edges,ambiguous,frequent_ambiguous,ambiguous_fraction,frequent_ambiguous_fraction\n" +
         std::to_string(r.iterations) + "," + std::to_string(r.pooled_edges) + "," + std::to_string(r.ambiguous) +
         "," + std::to_string(r.frequent_ambiguous) + "," + format_double(r.ambiguous_fraction) + "," +
         format_double(r.frequent_ambiguous_fraction) + "\n";
}

std::string format_categories(const CategoryGraph& graph) {
  std::string out = "from,to,dominant_count,reverse_count,confidence,bold,tie\n";
  for (const auto& e : graph.edges) {
    out += e.from + "," + e.to + "," + std::to_string(e.dominant_count) + "," + std::to_string(e.reverse_count) + "," +
           format_double(e.confidence) + "," + (e.bold ? "1" : "0") + "," + (e.tie ? "1" : "0") + "\n";
  }
  return out;
}

std::string format_heuristics(const HeuristicReport& report) {
  std::string out = "heuristic,applicable,violating,proportion,violations\n";
  for (const auto& r : report.results) {
    std::vector<std::string> v;
    for (const auto& [a, b] : r.violations) v.push_back(a + "->" + b);
    out += r.name + "," + std::to_string(r.applicable) + "," + std::to_string(r.violating) + "," +
           (r.proportion ? format_double(*r.proportion) : std::string("NA")) + "," + text::join(v, ";") + "\n";
  }
  return out;
}

std::string format_completeness(const CompletenessReport& report) {
  std::string out = "class,from,to\n";
  for (std::size_t c = 0; c < report.edges.size(); ++c) {
    for (const auto& [a, b] : report.edges[c]) {
      out += std::string(to_string(static_cast<EdgeClass>(c))) + "," + a + "," + b + "\n";
    }
  }
  return out;
}

std::string format_concordance(const ConcordanceReport& report) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  std::string out = "# agreement: " + format_double(report.agreement) + " (" + std::to_string(report.agreeing) + "/" +
                    std::to_string(report.rows.size()) + ")\n";
  out += "i,j,a_ij,a_ji,a_unoriented,b_ij,b_ji,b_unoriented,qualifies_a,qualifies_b,agree,ratio_a,ratio_b\n";
  for (const auto& r : report.rows) {
    out += r.i + "," + r.j + "," + std::to_string(r.a.ij) + "," + std::to_string(r.a.ji) + "," +
           std::to_string(r.a.unoriented) + "," + std::to_string(r.b.ij) + "," + std::to_string(r.b.ji) + "," +
           std::to_string(r.b.unoriented) + "," + (r.qualifies_a ? "1" : "0") + "," + (r.qualifies_b ? "1" : "0") +
           "," + (r.agree ? "1" : "0") + "," + opt(r.ratio_a) + "," + opt(r.ratio_b) + "\n";
  }
  return out;
}

std::string format_onsets(std::span<const OnsetRecord> onsets) {
  std::string out = "patient_id,condition_id,onset_day,documented_day\n";
  for (const auto& o : onsets) {
    out += o.patient_id + "," + o.condition + "," + fmt_int(o.onset_day) + "," + fmt_int(o.documented_day) + "\n";
  }
  return out;
}

std::string format_truth_score(const TruthScore& s) {
  return "truth_edges,found_edges,true_positive,reversed,false_positive,unoriented_adjacent,orientation_accuracy,"
         "indirect_explainable,against_time\n" +
         std::to_string(s.truth_edges) + "," + std::to_string(s.found_edges) + "," + std::to_string(s.true_positive) +
         "," + std::to_string(s.reversed) + "," + std::to_string(s.false_positive) + "," +
         std::to_string(s.unoriented_adjacent) + "," +
         (s.orientation_accuracy ? format_double(*s.orientation_accuracy) : std::string("NA")) + "," +
         std::to_string(s.indirect_explainable) + "," + std::to_string(s.against_time) + "\n";
}

} // namespace ehrcsd::io
