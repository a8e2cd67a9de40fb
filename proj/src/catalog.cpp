#include "ehrcsd/catalog.hpp"

#include "ehrcsd/error.hpp"
#include "ehrcsd/text.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace ehrcsd {

std::string_view to_string(ConditionKind kind) {
  switch (kind) {
  case ConditionKind::lab: return "lab";
  case ConditionKind::vital: return "vital";
  case ConditionKind::diagnosis: return "diagnosis";
  case ConditionKind::treatment: return "treatment";
  case ConditionKind::demographic: return "demographic";
  }
  return "?";
}

ConditionKind parse_condition_kind(std::string_view token) {
  if (token == "lab") return ConditionKind::lab;
  if (token == "vital") return ConditionKind::vital;
  if (token == "diagnosis") return ConditionKind::diagnosis;
  if (token == "treatment") return ConditionKind::treatment;
  if (token == "demographic") return ConditionKind::demographic;
  throw ParseError("unknown condition kind '" + std::string(token) + "'");
}

std::string ConditionDef::chain_key() const {
  if (!chain.empty()) {
    return chain;
  }
  return category + "/" + std::string(to_string(kind));
}

std::vector<std::string> validate(const std::vector<CategoryDef>& categories,
                                  const std::vector<ConditionDef>& conditions) {
  std::vector<std::string> problems;
  std::map<std::string, std::size_t> category_index;
  for (const auto& c : categories) {
    if (c.id.empty()) {
      problems.push_back("category with empty id");
    } else if (!category_index.emplace(c.id, 0).second) {
      problems.push_back("duplicate category id '" + c.id + "'");
    }
  }

  std::map<std::string, const ConditionDef*> by_id;
  for (const auto& c : conditions) {
    if (c.id.empty()) {
      problems.push_back("condition with empty id");
      continue;
    }
    if (!by_id.emplace(c.id, &c).second) {
      problems.push_back("duplicate condition id '" + c.id + "'");
    }
  }

  std::map<std::pair<std::string, int>, std::string> ranks;
  for (const auto& c : conditions) {
    if (!category_index.contains(c.category)) {
      problems.push_back("condition '" + c.id + "': unknown category '" + c.category + "'");
    }
    for (const auto& m : c.defining_measures) {
      const auto it = by_id.find(m);
      if (it == by_id.end()) {
        problems.push_back("condition '" + c.id + "': dangling defining measure '" + m + "'");
      } else if (it->second->kind != ConditionKind::lab && it->second->kind != ConditionKind::vital) {
        problems.push_back("condition '" + c.id + "': defining measure '" + m + "' is not a lab or vital");
      }
    }
    if (c.treats) {
      const auto it = by_id.find(*c.treats);
      if (it == by_id.end()) {
        problems.push_back("condition '" + c.id + "': dangling treats reference '" + *c.treats + "'");
      } else if (it->second->kind != ConditionKind::diagnosis) {
        problems.push_back("condition '" + c.id + "': treats '" + *c.treats + "' which is not a diagnosis");
      }
    }
    if (c.severity_rank) {
      const auto [it, inserted] = ranks.emplace(std::pair{c.chain_key(), *c.severity_rank}, c.id);
      if (!inserted) {
        problems.push_back("condition '" + c.id + "': severity_rank " + std::to_string(*c.severity_rank) +
                           " already used by '" + it->second + "' in chain '" + c.chain_key() + "'");
      }
    }
  }
  return problems;
}

ConditionCatalog::ConditionCatalog(std::vector<CategoryDef> categories, std::vector<ConditionDef> conditions)
    : categories_(std::move(categories)), conditions_(std::move(conditions)) {
  const auto problems = validate(categories_, conditions_);
  if (!problems.empty()) {
    throw ValidationError("invalid catalog: " + text::join(problems, "; "));
  }
}

std::set<std::string> ConditionCatalog::complication_categories() const {
  std::set<std::string> out;
  for (const auto& c : categories_) {
    if (c.complication) {
      out.insert(c.id);
    }
  }
  return out;
}

const ConditionDef* ConditionCatalog::find(std::string_view id) const {
  for (const auto& c : conditions_) {
    if (c.id == id) {
      return &c;
    }
  }
  return nullptr;
}

bool ConditionCatalog::contains(std::string_view id) const { return find(id) != nullptr; }

const ConditionDef& ConditionCatalog::at(std::string_view id) const {
  if (const auto* c = find(id)) {
    return *c;
  }
  throw DataError("unknown condition '" + std::string(id) + "'");
}

const CategoryDef& ConditionCatalog::category(std::string_view category_id) const {
  for (const auto& c : categories_) {
    if (c.id == category_id) {
      return c;
    }
  }
  throw DataError("unknown category '" + std::string(category_id) + "'");
}

bool ConditionCatalog::is_complication_category(std::string_view category_id) const {
  return category(category_id).complication;
}

std::vector<std::string> ConditionCatalog::node_ids() const {
  std::vector<std::string> out;
  for (const auto& c : conditions_) {
    if (c.is_node()) {
      out.push_back(c.id);
    }
  }
  return out;
}

const std::string& category_of(const ConditionCatalog& catalog, std::string_view id) {
  return catalog.at(id).category;
}

namespace {

struct Record {
  std::string type;
  std::vector<std::pair<std::string, std::string>> fields;
  std::size_t line = 0;
};

std::string where(std::size_t line) { return "catalog line " + std::to_string(line) + ": "; }

Record tokenize(std::string_view line, std::size_t line_no) {
  Record record;
  record.line = line_no;
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  };
  skip_space();
  while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') {
    record.type += line[pos++];
  }
  while (true) {
    skip_space();
    if (pos >= line.size()) break;
    std::string key;
    while (pos < line.size() && line[pos] != '=' && line[pos] != ' ' && line[pos] != '\t') {
      key += line[pos++];
    }
    if (pos >= line.size() || line[pos] != '=') {
      throw ParseError(where(line_no) + "expected key=value near '" + key + "'");
    }
    ++pos;
    std::string value;
    if (pos < line.size() && line[pos] == '"') {
      ++pos;
      while (pos < line.size() && line[pos] != '"') {
        if (line[pos] == '\\' && pos + 1 < line.size()) ++pos;
        value += line[pos++];
      }
      if (pos >= line.size()) {
        throw ParseError(where(line_no) + "unterminated quoted value for '" + key + "'");
      }
      ++pos;
    } else {
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') {
        value += line[pos++];
      }
    }
    for (const auto& [k, v] : record.fields) {
      if (k == key) {
        throw ParseError(where(line_no) + "repeated key '" + key + "'");
      }
    }
    record.fields.emplace_back(std::move(key), std::move(value));
  }
  return record;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  if (value.empty()) return out;
  for (auto& part : text::split(value, ',')) {
    auto t = std::string(text::trim(part));
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

bool parse_bool(const std::string& value, std::size_t line) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw ParseError(where(line) + "invalid boolean '" + value + "'");
}

std::string quote(const std::string& value) {
  const bool needs = value.empty() || value.find_first_of(" \t\"=") != std::string::npos;
  if (!needs) return value;
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

} // namespace

RawCatalog parse_catalog_records(std::string_view text) {
  RawCatalog raw;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto record = tokenize(body, line_no);
    if (record.type == "category") {
      CategoryDef c;
      for (const auto& [key, value] : record.fields) {
        if (key == "id") c.id = value;
        else if (key == "label") c.label = value;
        else if (key == "complication") c.complication = parse_bool(value, line_no);
        else throw ParseError(where(line_no) + "unknown category field '" + key + "'");
      }
      if (c.id.empty()) throw ParseError(where(line_no) + "category without id");
      raw.categories.push_back(std::move(c));
    } else if (record.type == "condition") {
      ConditionDef c;
      bool has_kind = false;
      for (const auto& [key, value] : record.fields) {
        if (key == "id") c.id = value;
        else if (key == "label") c.label = value;
        else if (key == "kind") {
          try {
            c.kind = parse_condition_kind(value);
          } catch (const ParseError& e) {
            throw ParseError(where(line_no) + e.what());
          }
          has_kind = true;
        } else if (key == "category") c.category = value;
        else if (key == "severity") c.severity_rank = static_cast<int>(text::parse_int(value, "severity"));
        else if (key == "chain") c.chain = value;
        else if (key == "measures") c.defining_measures = split_list(value);
        else if (key == "treats") {
          if (!value.empty()) c.treats = value;
        } else if (key == "observed_by") c.observed_by = value;
        else throw ParseError(where(line_no) + "unknown condition field '" + key + "'");
      }
      if (c.id.empty()) throw ParseError(where(line_no) + "condition without id");
      if (!has_kind) throw ParseError(where(line_no) + "condition '" + c.id + "' without kind");
      if (c.category.empty()) throw ParseError(where(line_no) + "condition '" + c.id + "' without category");
      raw.conditions.push_back(std::move(c));
    } else {
      throw ParseError(where(line_no) + "unknown record type '" + record.type + "'");
    }
  }
  return raw;
}

ConditionCatalog parse_catalog(std::string_view text) {
  auto raw = parse_catalog_records(text);
  return ConditionCatalog(std::move(raw.categories), std::move(raw.conditions));
}

ConditionCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open catalog '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_catalog(buffer.str());
}

std::string serialize_catalog(const ConditionCatalog& catalog) {
  std::string out;
  for (const auto& c : catalog.categories()) {
    out += "category id=" + quote(c.id) + " label=" + quote(c.label);
    if (c.complication) out += " complication=true";
    out += '\n';
  }
  for (const auto& c : catalog.conditions()) {
    out += "condition id=" + quote(c.id) + " label=" + quote(c.label) + " kind=" + std::string(to_string(c.kind)) +
           " category=" + quote(c.category);
    if (c.severity_rank) out += " severity=" + std::to_string(*c.severity_rank);
    if (!c.chain.empty()) out += " chain=" + quote(c.chain);
    if (!c.defining_measures.empty()) out += " measures=" + quote(text::join(c.defining_measures, ","));
    if (c.treats) out += " treats=" + quote(*c.treats);
    if (!c.observed_by.empty()) out += " observed_by=" + quote(c.observed_by);
    out += '\n';
  }
  return out;
}

} // namespace ehrcsd
