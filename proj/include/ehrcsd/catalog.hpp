#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ehrcsd {

enum class ConditionKind { lab, vital, diagnosis, treatment, demographic };

std::string_view to_string(ConditionKind kind);
ConditionKind parse_condition_kind(std::string_view token);

/// One condition of the vocabulary together with the clinical metadata used
/// by category aggregation and the edge-level heuristics.
struct ConditionDef {
  std::string id;
  std::string label;
  ConditionKind kind = ConditionKind::diagnosis;
  std::string category;
  /// Position within a progression chain; larger is more severe.
  std::optional<int> severity_rank;
  /// Progression chain the rank belongs to. Empty means "<category>/<kind>".
  std::string chain;
  /// Labs/vitals that define this diagnosis (e.g. sbp, dbp for htn.dx).
  std::vector<std::string> defining_measures;
  /// The diagnosis a treatment targets.
  std::optional<std::string> treats;
  /// Encounter tag required to count a patient as under observation for this
  /// condition. Empty means any encounter qualifies.
  std::string observed_by;

  std::string chain_key() const;
  bool is_node() const { return kind != ConditionKind::demographic; }

  bool operator==(const ConditionDef&) const = default;
};

struct CategoryDef {
  std::string id;
  std::string label;
  bool complication = false;

  bool operator==(const CategoryDef&) const = default;
};

/// Immutable after construction; safe to share across threads.
class ConditionCatalog {
public:
  ConditionCatalog() = default;

  /// Builds and validates; throws ValidationError listing every violation.
  ConditionCatalog(std::vector<CategoryDef> categories, std::vector<ConditionDef> conditions);

  const std::vector<ConditionDef>& conditions() const { return conditions_; }
  const std::vector<CategoryDef>& categories() const { return categories_; }
  std::set<std::string> complication_categories() const;

  bool contains(std::string_view id) const;
  const ConditionDef& at(std::string_view id) const;
  const ConditionDef* find(std::string_view id) const;
  const CategoryDef& category(std::string_view category_id) const;
  bool is_complication_category(std::string_view category_id) const;

  /// Ids of every condition eligible as a graph node (all but demographics),
  /// in catalog order.
  std::vector<std::string> node_ids() const;

  bool operator==(const ConditionCatalog&) const = default;

private:
  std::vector<CategoryDef> categories_;
  std::vector<ConditionDef> conditions_;
};

/// Every invariant violation, one human-readable line each. Empty means valid.
std::vector<std::string> validate(const std::vector<CategoryDef>& categories,
                                  const std::vector<ConditionDef>& conditions);

/// Owning category of a condition. Throws DataError for an unknown id.
const std::string& category_of(const ConditionCatalog& catalog, std::string_view id);

/// Parses the key=value record format. Throws ParseError on syntax errors and
/// ValidationError on invariant violations.
ConditionCatalog parse_catalog(std::string_view text);
ConditionCatalog load_catalog(const std::filesystem::path& path);

/// Unvalidated parse, for `catalog validate`, which reports violations instead
/// of throwing.
struct RawCatalog {
  std::vector<CategoryDef> categories;
  std::vector<ConditionDef> conditions;
};
RawCatalog parse_catalog_records(std::string_view text);

std::string serialize_catalog(const ConditionCatalog& catalog);

} // namespace ehrcsd
