#pragma once
// Canonical data model: census residents, free-text named contacts and the
// per-community dataset, plus CSV ingest and export.

#include <array>
#include <charconv>
#include <cstdint>
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
#include "linkforge/text.hpp"

namespace linkforge {

enum class Sex : std::uint8_t { female, male };

inline std::string_view to_string(Sex s) { return s == Sex::female ? "F" : "M"; }

inline std::optional<Sex> parse_sex(std::string_view raw) {
  const std::string v = text::normalize(raw);
  if (v == "f" || v == "female" || v == "woman") return Sex::female;
  if (v == "m" || v == "male" || v == "man") return Sex::male;
  return std::nullopt;
}

// The five name-generator domains.
enum class Domain : std::uint8_t { money, health, emotional, free_time, food };

inline constexpr std::array<Domain, 5> kAllDomains = {Domain::money, Domain::health, Domain::emotional,
                                                      Domain::free_time, Domain::food};

inline std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::money: return "money";
    case Domain::health: return "health";
    case Domain::emotional: return "emotional";
    case Domain::free_time: return "free_time";
    case Domain::food: return "food";
  }
  return "";
}

inline std::optional<Domain> parse_domain(std::string_view raw) {
  std::string v = text::normalize(raw);
  for (char& c : v)
    if (c == ' ' || c == '-') c = '_';
  if (v == "money" || v == "monetary") return Domain::money;
  if (v == "health") return Domain::health;
  if (v == "emotional" || v == "emotional_support") return Domain::emotional;
  if (v == "free_time" || v == "freetime") return Domain::free_time;
  if (v == "food") return Domain::food;
  return std::nullopt;
}

inline constexpr int kAdultAge = 15;
inline constexpr int kMaxAge = 120;
inline constexpr std::size_t kContactsPerDomainCap = 6;

// Output of name standardization shared by residents and contacts.
struct NameParts {
  std::vector<std::string> components;  // 0..4 normalized tokens
  std::vector<std::string> nickname_tokens;
  std::vector<std::string> honorific_tokens;
  bool usable = false;

  bool operator==(const NameParts&) const = default;
};

// Discrete analysis covariates; values are opaque codes.
struct Covariates {
  std::optional<std::string> education;
  std::optional<std::string> occupation;
  std::optional<std::string> wealth_index;
  std::optional<std::string> alcohol_use;
  std::optional<std::string> contraception_use;

  bool operator==(const Covariates&) const = default;
};

inline constexpr std::array<std::string_view, 5> kCovariateNames = {
    "education", "occupation", "wealth_index", "alcohol_use", "contraception_use"};

inline const std::optional<std::string>* covariate(const Covariates& c, std::string_view name) {
  if (name == "education") return &c.education;
  if (name == "occupation") return &c.occupation;
  if (name == "wealth_index") return &c.wealth_index;
  if (name == "alcohol_use") return &c.alcohol_use;
  if (name == "contraception_use") return &c.contraception_use;
  return nullptr;
}

inline std::optional<std::string>* covariate(Covariates& c, std::string_view name) {
  return const_cast<std::optional<std::string>*>(covariate(std::as_const(c), name));
}

struct ResidentRecord {
  std::string resident_id;
  std::string raw_name;
  NameParts name;
  std::optional<int> age;
  std::optional<Sex> sex;
  std::string village;
  std::string household_id;
  bool is_adult = false;
  bool is_stable = true;
  Covariates covariates;

  bool operator==(const ResidentRecord&) const = default;
};

struct ContactRecord {
  std::string contact_id;
  std::string namer_id;
  Domain domain = Domain::money;
  std::string raw_name;
  NameParts name;
  std::optional<int> reported_age;
  std::optional<std::string> reported_village;
  std::optional<Sex> imputed_sex;
  bool village_in_registry = false;

  bool operator==(const ContactRecord&) const = default;
};

struct CommunityDataset {
  std::string community_id;
  std::vector<ResidentRecord> residents;
  std::vector<ContactRecord> contacts;
  std::set<std::string> village_registry;

  bool operator==(const CommunityDataset&) const = default;
};

// Column names for resident files. Optional columns may be absent.
struct ResidentSchema {
  std::string id = "id";
  std::string name = "name";
  std::string village = "village";
  std::string household = "household";
  std::string age = "age";
  std::string sex = "sex";
  std::string stable = "stable";
  std::string education = "education";
  std::string occupation = "occupation";
  std::string wealth_index = "wealth_index";
  std::string alcohol_use = "alcohol_use";
  std::string contraception_use = "contraception_use";
};

struct ContactSchema {
  std::string contact_id = "contact_id";  // optional; present in canonical exports
  std::string namer = "namer_id";
  std::string domain = "domain";
  std::string name = "name";
  std::string age = "age";
  std::string village = "village";
  std::string sex = "sex";  // optional; imputed sex in canonical exports
};

struct LoadReport {
  std::size_t rows_in = 0;
  std::size_t records_out = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> rows
  std::map<std::string, std::size_t> warnings; // kind -> count
  std::vector<std::string> messages;           // first few warnings, for humans

  std::size_t dropped_total() const {
    std::size_t n = 0;
    for (const auto& [_, v] : dropped) n += v;
    return n;
  }
  std::size_t warning_total() const {
    std::size_t n = 0;
    for (const auto& [_, v] : warnings) n += v;
    return n;
  }
  void warn(const std::string& kind, std::string message) {
    ++warnings[kind];
    if (messages.size() < 50) messages.push_back(std::move(message));
  }
};

template <typename Record>
struct Loaded {
  std::vector<Record> records;
  LoadReport report;
};

namespace detail {

inline std::optional<int> parse_int(std::string_view s) {
  s = s.substr(0, s.find_last_not_of(" \t") + 1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && p == s.data() + s.size()) return v;
  // accept integral decimals such as "34.0"
  double d = 0;
  auto [pd, ecd] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ecd == std::errc() && pd == s.data() + s.size() && d == static_cast<double>(static_cast<long long>(d)) &&
      d >= -1e9 && d <= 1e9)
    return static_cast<int>(d);
  return std::nullopt;
}

inline bool is_blank(std::string_view s) { return s.find_first_not_of(" \t") == std::string_view::npos; }

// Age rule shared by residents and contacts: blank -> missing silently,
// malformed or outside [0, 120] -> missing with a warning.
inline std::optional<int> parse_age(std::string_view raw, LoadReport& report, std::size_t row) {
  if (is_blank(raw)) return std::nullopt;
  auto v = parse_int(raw);
  if (!v || *v < 0 || *v > kMaxAge) {
    report.warn("malformed_age", "row " + std::to_string(row) + ": age '" + std::string(raw) + "' treated as missing");
    return std::nullopt;
  }
  return v;
}

inline std::optional<bool> parse_bool(std::string_view raw) {
  const std::string v = text::normalize(raw);
  if (v == "1" || v == "true" || v == "yes" || v == "y" || v == "t") return true;
  if (v == "0" || v == "false" || v == "no" || v == "n" || v == "f") return false;
  return std::nullopt;
}

struct ColumnLookup {
  const csv::Table& table;
  std::optional<std::size_t> need(const std::string& name, bool required) const {
    auto c = table.column(name);
    if (!c && required) fail(ErrorKind::schema, "missing required column '" + name + "'");
    return c;
  }
};

inline std::string_view cell(const csv::Row& row, std::optional<std::size_t> col) {
  if (!col || *col >= row.size()) return {};
  return row[*col];
}

inline std::optional<std::string> optional_cell(const csv::Row& row, std::optional<std::size_t> col) {
  auto v = text::squeeze(cell(row, col));
  if (v.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

inline Loaded<ResidentRecord> load_residents(const csv::Table& table, const ResidentSchema& schema = {}) {
  const detail::ColumnLookup cols{table};
  const auto c_id = cols.need(schema.id, true);
  const auto c_name = cols.need(schema.name, true);
  const auto c_village = cols.need(schema.village, true);
  const auto c_household = cols.need(schema.household, true);
  const auto c_age = cols.need(schema.age, false);
  const auto c_sex = cols.need(schema.sex, false);
  const auto c_stable = cols.need(schema.stable, false);
  const std::array c_cov = {cols.need(schema.education, false), cols.need(schema.occupation, false),
                            cols.need(schema.wealth_index, false), cols.need(schema.alcohol_use, false),
                            cols.need(schema.contraception_use, false)};

  Loaded<ResidentRecord> out;
  auto& report = out.report;
  if (!c_stable) report.warn("no_stable_column", "no stability column; all residents treated as stable");

  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = r + 2;
    ++report.rows_in;
    ResidentRecord rec;
    rec.resident_id = text::squeeze(detail::cell(row, c_id));
    if (rec.resident_id.empty()) {
      ++report.dropped["empty_id"];
      continue;
    }
    if (auto [it, inserted] = seen.emplace(rec.resident_id, line); !inserted)
      fail(ErrorKind::validation, "duplicate resident_id '" + rec.resident_id + "' on lines " +
                                      std::to_string(it->second) + " and " + std::to_string(line));
    rec.raw_name = std::string(detail::cell(row, c_name));
    rec.village = text::squeeze(detail::cell(row, c_village));
    rec.household_id = text::squeeze(detail::cell(row, c_household));
    rec.age = detail::parse_age(detail::cell(row, c_age), report, line);
    rec.is_adult = rec.age && *rec.age >= kAdultAge;
    if (auto raw = detail::cell(row, c_sex); !detail::is_blank(raw)) {
      rec.sex = parse_sex(raw);
      if (!rec.sex) report.warn("malformed_sex", "row " + std::to_string(line) + ": sex '" + std::string(raw) + "' treated as missing");
    }
    if (c_stable) rec.is_stable = detail::parse_bool(detail::cell(row, c_stable)).value_or(false);
    for (std::size_t k = 0; k < kCovariateNames.size(); ++k)
      *covariate(rec.covariates, kCovariateNames[k]) = detail::optional_cell(row, c_cov[k]);
    out.records.push_back(std::move(rec));
  }
  report.records_out = out.records.size();
  return out;
}

inline Loaded<ResidentRecord> load_residents(const std::string& path, const ResidentSchema& schema = {}) {
  return load_residents(csv::read(path), schema);
}

using ResidentIndex = std::unordered_map<std::string, std::size_t>;

inline ResidentIndex index_residents(const std::vector<ResidentRecord>& residents) {
  ResidentIndex idx;
  idx.reserve(residents.size());
  for (std::size_t i = 0; i < residents.size(); ++i) idx.emplace(residents[i].resident_id, i);
  return idx;
}

inline std::string contact_surrogate_id(std::string_view community_id, std::size_t row_ordinal) {
  std::string ord = std::to_string(row_ordinal);
  if (ord.size() < 6) ord.insert(0, 6 - ord.size(), '0');
  return std::string(community_id) + "-c" + ord;
}

// Contacts get surrogate ids from (community_id, 1-based data-row ordinal)
// unless the file already carries a contact_id column.
inline Loaded<ContactRecord> load_contacts(const csv::Table& table, const ContactSchema& schema,
                                           const std::vector<ResidentRecord>& residents,
                                           std::string_view community_id) {
  const detail::ColumnLookup cols{table};
  const auto c_cid = cols.need(schema.contact_id, false);
  const auto c_namer = cols.need(schema.namer, true);
  const auto c_domain = cols.need(schema.domain, true);
  const auto c_name = cols.need(schema.name, true);
  const auto c_age = cols.need(schema.age, false);
  const auto c_village = cols.need(schema.village, false);
  const auto c_sex = cols.need(schema.sex, false);

  const ResidentIndex index = index_residents(residents);
  Loaded<ContactRecord> out;
  auto& report = out.report;
  std::map<std::pair<std::string, Domain>, std::size_t> per_domain;
  std::set<std::string> ids;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = r + 2;
    ++report.rows_in;
    ContactRecord rec;
    rec.raw_name = std::string(detail::cell(row, c_name));
    if (text::normalize(rec.raw_name).empty()) {
      ++report.dropped["empty_name"];
      continue;
    }
    rec.namer_id = text::squeeze(detail::cell(row, c_namer));
    auto namer = index.find(rec.namer_id);
    if (namer == index.end()) {
      ++report.dropped["unknown_namer"];
      continue;
    }
    auto domain = parse_domain(detail::cell(row, c_domain));
    if (!domain) {
      ++report.dropped["bad_domain"];
      continue;
    }
    rec.domain = *domain;
    if (!residents[namer->second].is_adult)
      report.warn("namer_not_adult", "row " + std::to_string(line) + ": namer '" + rec.namer_id + "' is not a known adult");

    rec.contact_id = c_cid ? text::squeeze(detail::cell(row, c_cid)) : std::string();
    if (rec.contact_id.empty()) rec.contact_id = contact_surrogate_id(community_id, r + 1);
    if (!ids.insert(rec.contact_id).second)
      fail(ErrorKind::validation, "duplicate contact_id '" + rec.contact_id + "'");

    rec.reported_age = detail::parse_age(detail::cell(row, c_age), report, line);
    rec.reported_village = detail::optional_cell(row, c_village);
    if (auto raw = detail::cell(row, c_sex); !detail::is_blank(raw)) rec.imputed_sex = parse_sex(raw);

    if (++per_domain[{rec.namer_id, rec.domain}] == kContactsPerDomainCap + 1)
      report.warn("domain_cap", "namer '" + rec.namer_id + "' named more than 6 contacts for " +
                                    std::string(to_string(rec.domain)));
    out.records.push_back(std::move(rec));
  }
  report.records_out = out.records.size();
  return out;
}

inline Loaded<ContactRecord> load_contacts(const std::string& path, const ContactSchema& schema,
                                           const std::vector<ResidentRecord>& residents,
                                           std::string_view community_id) {
  return load_contacts(csv::read(path), schema, residents, community_id);
}

inline std::set<std::string> load_villages(const std::string& path, const std::string& column = "village") {
  const auto table = csv::read(path);
  const auto col = table.column(column);
  if (!col) fail(ErrorKind::schema, "missing required column '" + column + "' in " + path);
  std::set<std::string> out;
  for (const auto& row : table.rows)
    if (auto v = text::squeeze(detail::cell(row, col)); !v.empty()) out.insert(std::move(v));
  return out;
}

// Canonical export --------------------------------------------------------

inline csv::Table residents_table(const std::vector<ResidentRecord>& residents) {
  const ResidentSchema s;
  csv::Table t;
  t.header = {s.id, s.name, s.age, s.sex, s.village, s.household, s.stable,
              s.education, s.occupation, s.wealth_index, s.alcohol_use, s.contraception_use};
  for (const auto& r : residents) {
    csv::Row row = {r.resident_id, r.raw_name, r.age ? std::to_string(*r.age) : "",
                    r.sex ? std::string(to_string(*r.sex)) : "", r.village, r.household_id,
                    r.is_stable ? "1" : "0"};
    for (auto name : kCovariateNames) row.push_back(covariate(r.covariates, name)->value_or(""));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline csv::Table contacts_table(const std::vector<ContactRecord>& contacts) {
  const ContactSchema s;
  csv::Table t;
  t.header = {s.contact_id, s.namer, s.domain, s.name, s.age, s.village, s.sex};
  for (const auto& c : contacts)
    t.rows.push_back({c.contact_id, c.namer_id, std::string(to_string(c.domain)), c.raw_name,
                      c.reported_age ? std::to_string(*c.reported_age) : "", c.reported_village.value_or(""),
                      c.imputed_sex ? std::string(to_string(*c.imputed_sex)) : ""});
  return t;
}

inline void export_dataset(const CommunityDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  csv::write((dir / "residents.csv").string(), residents_table(ds.residents));
  csv::write((dir / "contacts.csv").string(), contacts_table(ds.contacts));
  csv::Table villages;
  villages.header = {"village"};
  for (const auto& v : ds.village_registry) villages.rows.push_back({v});
  csv::write((dir / "villages.csv").string(), villages);
}

struct DatasetLoad {
  CommunityDataset dataset;
  LoadReport residents_report;
  LoadReport contacts_report;
};

// Loads a directory in the canonical export layout. Without villages.csv the
// registry is the set of resident villages.
inline DatasetLoad import_dataset(const std::filesystem::path& dir, std::string community_id) {
  DatasetLoad out;
  out.dataset.community_id = std::move(community_id);
  auto res = load_residents((dir / "residents.csv").string());
  auto con = load_contacts((dir / "contacts.csv").string(), ContactSchema{}, res.records, out.dataset.community_id);
  out.dataset.residents = std::move(res.records);
  out.dataset.contacts = std::move(con.records);
  out.residents_report = std::move(res.report);
  out.contacts_report = std::move(con.report);
  if (std::filesystem::exists(dir / "villages.csv")) {
    out.dataset.village_registry = load_villages((dir / "villages.csv").string());
  } else {
    for (const auto& r : out.dataset.residents)
      if (!r.village.empty()) out.dataset.village_registry.insert(r.village);
  }
  return out;
}

}  // namespace linkforge
