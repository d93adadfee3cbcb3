#pragma once
// Cleaning applied before matching: name standardization with nickname and
// honorific extraction, name permutation, sex imputation for contacts and
// village standardization against the community registry.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "linkforge/csv.hpp"
#include "linkforge/error.hpp"
#include "linkforge/records.hpp"
#include "linkforge/similarity.hpp"
#include "linkforge/text.hpp"

namespace linkforge {

inline constexpr std::size_t kMaxNameComponents = 4;
inline constexpr double kVillageSnapThreshold = 0.95;

struct LookupTables {
  std::map<std::string, std::string> nickname_prefixes;  // prefix -> semantic tag
  std::set<std::string> honorifics;
  std::unordered_map<std::string, Sex> sex_by_first_name;
  std::map<std::string, std::string> village_fixes;  // normalized variant -> canonical
  std::map<std::string, std::string> roman_numerals = {
      {"i", "1"}, {"ii", "2"}, {"iii", "3"}, {"iv", "4"}, {"v", "5"},
      {"vi", "6"}, {"vii", "7"}, {"viii", "8"}, {"ix", "9"}, {"x", "10"}};
};

// Table loaders. Keys are normalized (case folded, punctuation removed).
inline std::map<std::string, std::string> load_nickname_table(const std::string& path) {
  const auto t = csv::read(path);
  const auto cp = t.column("prefix"), ct = t.column("tag");
  if (!cp) fail(ErrorKind::schema, path + ": missing column 'prefix'");
  std::map<std::string, std::string> out;
  for (const auto& row : t.rows) {
    auto k = text::normalize(detail::cell(row, cp));
    if (!k.empty()) out[k] = text::squeeze(detail::cell(row, ct));
  }
  return out;
}

inline std::set<std::string> load_honorific_table(const std::string& path) {
  const auto t = csv::read(path);
  const auto c = t.column("token");
  if (!c) fail(ErrorKind::schema, path + ": missing column 'token'");
  std::set<std::string> out;
  for (const auto& row : t.rows)
    if (auto k = text::normalize(detail::cell(row, c)); !k.empty()) out.insert(k);
  return out;
}

inline std::unordered_map<std::string, Sex> parse_sex_table(const csv::Table& t, const std::string& origin) {
  const auto cn = t.column("name"), cs = t.column("sex");
  if (!cn || !cs) fail(ErrorKind::schema, origin + ": sex table needs columns 'name' and 'sex'");
  std::unordered_map<std::string, Sex> out;
  for (const auto& row : t.rows) {
    auto name = text::normalize(detail::cell(row, cn));
    if (name.empty()) continue;
    auto sex = parse_sex(detail::cell(row, cs));
    if (!sex) fail(ErrorKind::validation, origin + ": unrecognized sex for name '" + name + "'");
    auto [it, inserted] = out.emplace(name, *sex);
    if (!inserted && it->second != *sex)
      fail(ErrorKind::validation, origin + ": name '" + name + "' is listed as both female and male");
  }
  return out;
}

inline std::unordered_map<std::string, Sex> load_sex_table(const std::string& path) {
  return parse_sex_table(csv::read(path), path);
}

inline std::map<std::string, std::string> load_village_fix_table(const std::string& path) {
  const auto t = csv::read(path);
  const auto cv = t.column("variant"), cc = t.column("canonical");
  if (!cv || !cc) fail(ErrorKind::schema, path + ": village fix table needs columns 'variant' and 'canonical'");
  std::map<std::string, std::string> out;
  for (const auto& row : t.rows) {
    auto k = text::normalize(detail::cell(row, cv));
    if (!k.empty()) out[k] = text::squeeze(detail::cell(row, cc));
  }
  return out;
}

// Name standardization ------------------------------------------------------

inline NameParts standardize_name(std::string_view raw, const LookupTables& tables) {
  std::vector<std::string> tokens;
  for (const auto& piece : text::split_ws(raw))
    if (auto t = text::normalize(piece); !t.empty()) tokens.push_back(std::move(t));

  NameParts out;
  std::vector<std::string> rest;
  for (auto& t : tokens) {
    if (tables.honorifics.count(t))
      out.honorific_tokens.push_back(std::move(t));
    else
      rest.push_back(std::move(t));
  }
  // A nickname token only counts as a prefix when a real name follows it.
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const bool is_nick = tables.nickname_prefixes.count(rest[i]) > 0;
    bool name_follows = false;
    for (std::size_t j = i + 1; j < rest.size() && !name_follows; ++j)
      name_follows = tables.nickname_prefixes.count(rest[j]) == 0;
    if (is_nick && name_follows)
      out.nickname_tokens.push_back(std::move(rest[i]));
    else
      out.components.push_back(std::move(rest[i]));
  }
  if (out.components.size() > kMaxNameComponents) {
    std::string tail;
    for (std::size_t i = kMaxNameComponents - 1; i < out.components.size(); ++i) tail += out.components[i];
    out.components.resize(kMaxNameComponents - 1);
    out.components.push_back(std::move(tail));
  }
  out.usable = !out.components.empty();
  return out;
}

struct NameVariantSet {
  std::string owner_id;
  std::vector<std::vector<std::string>> variants;
};

inline NameVariantSet permute_name_variants(const std::vector<std::string>& components, std::string owner_id = {}) {
  require(!components.empty() && components.size() <= kMaxNameComponents,
          "permute_name_variants: expected 1 to 4 name components");
  return NameVariantSet{std::move(owner_id), distinct_permutations(components)};
}

inline std::optional<Sex> impute_sex(std::string_view first_component,
                                     const std::unordered_map<std::string, Sex>& table) {
  auto it = table.find(text::normalize(first_component));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

// Village standardization ---------------------------------------------------

// Rewrites roman-numeral tokens after the first one ("Nsiika II" -> "Nsiika 2").
inline std::string normalize_roman(std::string_view village, const LookupTables& tables) {
  auto tokens = text::split_ws(village);
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    auto it = tables.roman_numerals.find(text::normalize(tokens[i]));
    if (it != tables.roman_numerals.end()) tokens[i] = it->second;
  }
  return text::join(tokens, " ");
}

struct VillageRegistryIndex {
  std::set<std::string> names;                      // canonical spellings
  std::map<std::string, std::string> by_key;        // normalized key -> canonical
  std::vector<std::pair<std::string, std::string>> keys;  // (key, canonical), sorted by key

  VillageRegistryIndex(const std::set<std::string>& registry, const LookupTables& tables) : names(registry) {
    for (const auto& v : registry) by_key.emplace(village_key(normalize_roman(v, tables)), v);
    keys.assign(by_key.begin(), by_key.end());
  }
};

enum class VillageFix { none, registry_key, fix_table, fuzzy, out_of_registry, blank };

struct VillageResult {
  std::string village;
  bool in_registry = false;
  VillageFix method = VillageFix::none;
};

inline VillageResult standardize_village(std::string_view raw, const LookupTables& tables,
                                         const VillageRegistryIndex& registry) {
  VillageResult out;
  const std::string squeezed = text::squeeze(raw);
  if (squeezed.empty()) {
    out.method = VillageFix::blank;
    return out;
  }
  if (registry.names.count(squeezed)) {
    out.village = squeezed;
    out.in_registry = true;
    return out;
  }
  const std::string romanized = normalize_roman(squeezed, tables);
  const std::string key = village_key(romanized);
  if (auto it = registry.by_key.find(key); it != registry.by_key.end()) {
    out = {it->second, true, VillageFix::registry_key};
    return out;
  }
  if (auto it = tables.village_fixes.find(key); it != tables.village_fixes.end()) {
    out = {it->second, registry.names.count(it->second) > 0, VillageFix::fix_table};
    return out;
  }
  // Fuzzy snap only on a unique best match.
  double best = -1.0;
  std::size_t n_best = 0;
  const std::string* best_name = nullptr;
  for (const auto& [k, canonical] : registry.keys) {
    const double s = jaro_winkler(key, k);
    if (s > best) {
      best = s;
      n_best = 1;
      best_name = &canonical;
    } else if (s == best) {
      ++n_best;
    }
  }
  if (best_name && best >= kVillageSnapThreshold && n_best == 1) {
    out = {*best_name, true, VillageFix::fuzzy};
    return out;
  }
  out = {romanized, false, VillageFix::out_of_registry};
  return out;
}

inline VillageResult standardize_village(std::string_view raw, const LookupTables& tables,
                                         const std::set<std::string>& registry) {
  return standardize_village(raw, tables, VillageRegistryIndex(registry, tables));
}

// Whole-dataset pass ----------------------------------------------------------

struct PreprocessReport {
  std::string community_id;
  std::size_t residents = 0;
  std::size_t contacts = 0;
  std::size_t contacts_nickname_corrected = 0;
  std::size_t contacts_with_village = 0;
  std::size_t contact_villages_corrected = 0;
  std::size_t contacts_out_of_registry = 0;
  std::size_t contacts_sex_imputed = 0;
  std::size_t unusable_resident_names = 0;
  std::size_t unusable_contact_names = 0;
  std::size_t residents_out_of_registry = 0;

  double nickname_fraction() const {
    return contacts ? static_cast<double>(contacts_nickname_corrected) / static_cast<double>(contacts) : 0.0;
  }
  double village_fix_fraction() const {
    return contacts_with_village
               ? static_cast<double>(contact_villages_corrected) / static_cast<double>(contacts_with_village)
               : 0.0;
  }
};

inline void validate_tables(const LookupTables& tables, const std::set<std::string>& registry) {
  for (const auto& [variant, canonical] : tables.village_fixes)
    if (!registry.count(canonical))
      fail(ErrorKind::validation, "village fix '" + variant + "' -> '" + canonical + "' targets a village outside the registry");
}

struct PreprocessOutput {
  CommunityDataset dataset;
  PreprocessReport report;
};

inline PreprocessOutput preprocess_dataset(CommunityDataset ds, const LookupTables& tables) {
  if (ds.village_registry.empty())
    for (const auto& r : ds.residents)
      if (auto v = text::squeeze(r.village); !v.empty()) ds.village_registry.insert(v);
  validate_tables(tables, ds.village_registry);
  const VillageRegistryIndex registry(ds.village_registry, tables);

  PreprocessReport rep;
  rep.community_id = ds.community_id;
  rep.residents = ds.residents.size();
  rep.contacts = ds.contacts.size();

  for (auto& r : ds.residents) {
    r.name = standardize_name(r.raw_name, tables);
    if (!r.name.usable) ++rep.unusable_resident_names;
    auto v = standardize_village(r.village, tables, registry);
    r.village = v.village;
    if (!v.in_registry) ++rep.residents_out_of_registry;
  }
  for (auto& c : ds.contacts) {
    c.name = standardize_name(c.raw_name, tables);
    if (!c.name.usable) ++rep.unusable_contact_names;
    if (!c.name.nickname_tokens.empty()) ++rep.contacts_nickname_corrected;
    if (c.name.usable) {
      if (auto sex = impute_sex(c.name.components.front(), tables.sex_by_first_name)) {
        c.imputed_sex = sex;
        ++rep.contacts_sex_imputed;
      }
    }
    const std::string before = c.reported_village ? text::squeeze(*c.reported_village) : std::string();
    auto v = standardize_village(before, tables, registry);
    if (!before.empty()) {
      ++rep.contacts_with_village;
      if (v.village != before) ++rep.contact_villages_corrected;
    }
    c.reported_village = v.village.empty() ? std::nullopt : std::optional<std::string>(v.village);
    c.village_in_registry = v.in_registry;
    if (!v.in_registry) ++rep.contacts_out_of_registry;
  }
  return {std::move(ds), rep};
}

}  // namespace linkforge
