#pragma once
// Synthetic census communities with planted contact links. Residents stay
// clean; contacts are copies of their true alter with field corruption, or
// people from outside the community.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "linkforge/csv.hpp"
#include "linkforge/epilink.hpp"
#include "linkforge/error.hpp"
#include "linkforge/random.hpp"
#include "linkforge/records.hpp"
#include "linkforge/text.hpp"

namespace linkforge {

inline constexpr std::string_view kOutside = "OUTSIDE";

struct CorruptionProfile {
  double typo_rate = 0.0;             // per name token
  double token_drop_rate = 0.0;       // per contact with 2+ tokens
  double nickname_prefix_rate = 0.0;  // per contact
  double missing_age_rate = 0.0;
  double age_jitter_sd = 0.0;  // years
  double village_typo_rate = 0.0;
  double missing_village_rate = 0.0;
  double out_of_community_rate = 0.0;
  std::array<double, 5> domain_means{1.0, 0.8, 1.0, 1.2, 0.6};  // Poisson means, capped at 6
  double participation_rate = 0.9;  // share of adults who name anyone

  static CorruptionProfile none() { return {}; }
  static CorruptionProfile moderate() {
    CorruptionProfile p;
    p.typo_rate = 0.05;
    p.token_drop_rate = 0.05;
    p.nickname_prefix_rate = 0.05;
    p.missing_age_rate = 0.3;
    p.age_jitter_sd = 2.0;
    p.village_typo_rate = 0.05;
    p.missing_village_rate = 0.05;
    p.out_of_community_rate = 0.15;
    return p;
  }

  void validate() const {
    auto rate = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::config, std::string("corruption ") + name + " must be in [0,1]");
    };
    rate(typo_rate, "typo_rate");
    rate(token_drop_rate, "token_drop_rate");
    rate(nickname_prefix_rate, "nickname_prefix_rate");
    rate(missing_age_rate, "missing_age_rate");
    rate(village_typo_rate, "village_typo_rate");
    rate(missing_village_rate, "missing_village_rate");
    rate(out_of_community_rate, "out_of_community_rate");
    rate(participation_rate, "participation_rate");
    if (!(age_jitter_sd >= 0.0 && std::isfinite(age_jitter_sd))) fail(ErrorKind::config, "age_jitter_sd must be >= 0");
    for (double m : domain_means)
      if (!(m >= 0.0 && std::isfinite(m))) fail(ErrorKind::config, "domain means must be >= 0");
  }
};

// Name banks ----------------------------------------------------------------------

struct NameBank {
  std::vector<std::string> female, male, family;
};

inline NameBank east_african_bank() {
  return {{"Akello", "Akinyi", "Atieno", "Auma", "Adhiambo", "Achieng", "Anyango", "Awino", "Nakato", "Namubiru",
           "Nabirye", "Nansubuga", "Nalwoga", "Babirye", "Kemigisha", "Kyomuhendo", "Ayesiga", "Grace", "Mary",
           "Esther", "Agnes", "Ruth", "Sarah", "Rose", "Florence", "Harriet", "Scovia", "Betty", "Jane", "Margaret",
           "Winnie", "Prossy", "Immaculate", "Juliet", "Annet", "Doreen", "Lydia", "Beatrice", "Faith", "Joyce"},
          {"Okello", "Ochieng", "Otieno", "Odhiambo", "Onyango", "Owino", "Omondi", "Oduor", "Okoth", "Ouma",
           "Kato", "Mugisha", "Ssali", "Waiswa", "Tumusiime", "Byaruhanga", "Kasozi", "John", "Peter", "Joseph",
           "Moses", "Paul", "David", "James", "Isaac", "Samuel", "Robert", "Charles", "Emmanuel", "Francis",
           "Godfrey", "Patrick", "Richard", "Stephen", "Simon", "Julius", "Fred", "Henry", "Ronald", "Denis"},
          {"Akello",   "Okello",  "Ochieng",  "Otieno",   "Odhiambo",  "Onyango", "Owino",    "Omondi",
           "Oduor",    "Okoth",   "Ouma",     "Auma",     "Atieno",    "Wanjiru", "Kamau",    "Mwangi",
           "Njoroge",  "Kiprono", "Cheruiyot", "Mutua",   "Kato",      "Nakato",  "Mugisha",  "Namubiru",
           "Ssali",    "Byaruhanga", "Tumusiime", "Kasozi", "Mukasa",  "Lubega",  "Ssempala", "Nsubuga",
           "Kiggundu", "Musoke",  "Wasswa",   "Kizza",    "Ochola",    "Opiyo",   "Obura",    "Ogola",
           "Ayieko",   "Nyongesa", "Wafula",  "Barasa",   "Simiyu",    "Wekesa",  "Ekirapa",  "Emuria",
           "Okiror",   "Opolot",  "Omoding",  "Okurut",   "Ekwaru",    "Amuge",   "Akiror",   "Asio",
           "Rwabwogo", "Tibaijuka", "Kagame",  "Mbabazi"}};
}

inline NameBank generic_bank() {
  return {{"Alice",  "Barbara", "Carol",  "Diana",   "Ellen",   "Fiona",  "Gloria", "Helen",   "Irene",  "Julia",
           "Karen",  "Laura",   "Monica", "Nancy",   "Olivia",  "Paula",  "Queenie", "Rachel", "Sandra", "Tina",
           "Ursula", "Vera",    "Wendy",  "Yvonne",  "Zoe",     "Amber",  "Bianca", "Chloe",   "Daisy",  "Emma",
           "Flora",  "Gina",    "Hannah", "Ivy",     "Jessica", "Kelly",  "Lily",   "Megan",   "Nora",   "Pamela"},
          {"Adam",   "Brian",   "Colin",  "Daniel",  "Edward",  "Frank",  "George", "Harold",  "Ian",    "Jack",
           "Kevin",  "Leonard", "Martin", "Nathan",  "Oscar",   "Philip", "Quentin", "Roger",  "Steven", "Thomas",
           "Victor", "Walter",  "Xavier", "Yusuf",   "Zachary", "Albert", "Bruce",  "Carl",    "Derek",  "Eric",
           "Felix",  "Gordon",  "Hugo",   "Ivan",    "Jason",   "Keith",  "Lewis",  "Marcus",  "Neil",   "Owen"},
          {"Smith",   "Johnson", "Brown",   "Taylor",  "Wilson",  "Davies",  "Evans",   "Thomas",  "Roberts", "Walker",
           "Wright",  "Thompson", "White",  "Hughes",  "Edwards", "Green",   "Hall",    "Wood",    "Harris",  "Lewis",
           "Martin",  "Jackson", "Clarke",  "Clark",   "Turner",  "Hill",    "Scott",   "Cooper",  "Morris",  "Ward",
           "Moore",   "King",    "Watson",  "Baker",   "Harrison", "Morgan", "Patel",   "Young",   "Allen",   "Mitchell",
           "James",   "Anderson", "Phillips", "Lee",   "Bell",    "Parker",  "Davis",   "Bennett", "Cook",    "Price",
           "Griffin", "Russell", "Palmer",  "Holmes",  "Mills",   "Barnes",  "Knight",  "Lloyd",   "Butler",  "Russo"}};
}

// CSV with columns kind (female|male|family) and name.
inline NameBank load_name_bank(const std::string& path) {
  const auto t = csv::read(path);
  const auto ck = t.column("kind"), cn = t.column("name");
  if (!ck || !cn) fail(ErrorKind::schema, path + ": name bank needs columns 'kind' and 'name'");
  NameBank b;
  for (const auto& row : t.rows) {
    const auto kind = text::squeeze(*ck < row.size() ? row[*ck] : "");
    auto name = text::squeeze(*cn < row.size() ? row[*cn] : "");
    if (name.empty()) continue;
    if (kind == "female") b.female.push_back(std::move(name));
    else if (kind == "male") b.male.push_back(std::move(name));
    else if (kind == "family") b.family.push_back(std::move(name));
    else fail(ErrorKind::data, path + ": unknown name kind '" + kind + "'");
  }
  if (b.female.empty() || b.male.empty() || b.family.empty())
    fail(ErrorKind::data, path + ": name bank needs female, male and family names");
  return b;
}

inline csv::Table name_bank_table(const NameBank& b) {
  csv::Table t;
  t.header = {"kind", "name"};
  for (const auto& n : b.female) t.rows.push_back({"female", n});
  for (const auto& n : b.male) t.rows.push_back({"male", n});
  for (const auto& n : b.family) t.rows.push_back({"family", n});
  return t;
}

inline const std::vector<std::string>& village_bank() {
  static const std::vector<std::string> v{"Kamuge",  "Nsiika",   "Rubaare", "Kameke",   "Bugono",  "Kiyunga",
                                          "Merikit", "Magunga",  "Ogongo",  "Ruhoko",   "Kitwe",   "Nankoma",
                                          "Mbita",   "Sena",     "Kisegi",  "Tangakona", "Kadhadha", "Bware",
                                          "Nyatoto", "Kiharu",   "Rwashamaire", "Muhorro", "Kazo",   "Bukoli"};
  return v;
}

inline const std::vector<std::string>& outside_village_bank() {
  static const std::vector<std::string> v{"Kampala", "Kisumu", "Nairobi", "Mbarara", "Jinja",  "Mbale",
                                          "Tororo",  "Migori", "Homa Bay", "Masaka", "Entebbe", "Busia"};
  return v;
}

// Generation ----------------------------------------------------------------------

struct TruthRow {
  std::string contact_id;
  std::optional<std::string> resident_id;  // nullopt = OUTSIDE
};

struct SyntheticCommunity {
  CommunityDataset dataset;  // raw: names not yet standardized
  std::vector<TruthRow> truth;
};

namespace detail {

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[uniform_below(rng, v.size())];
}

inline std::string village_name(std::size_t i) {
  const auto& bank = village_bank();
  std::string v = bank[i % bank.size()];
  if (i >= bank.size()) v += " " + std::to_string(i / bank.size() + 1);
  return v;
}

inline std::string padded(char prefix, std::size_t n, std::size_t width) {
  std::string s = std::to_string(n);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return prefix + s;
}

// One substitution, deletion, insertion or adjacent swap on a letter.
inline std::string typo(std::mt19937_64& rng, std::string s) {
  if (s.size() < 2) return s;
  const std::size_t i = uniform_below(rng, s.size());
  const char letter = static_cast<char>('a' + uniform_below(rng, 26));
  switch (uniform_below(rng, 4)) {
    case 0: s[i] = s[i] == letter ? static_cast<char>('a' + (letter - 'a' + 1) % 26) : letter; break;
    case 1: s.erase(i, 1); break;
    case 2: s.insert(i, 1, letter); break;
    default:
      if (i + 1 < s.size()) std::swap(s[i], s[i + 1]);
      else std::swap(s[i - 1], s[i]);
  }
  return s;
}

inline std::vector<std::string> tokens(const std::string& name) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < name.size()) {
    const auto j = name.find(' ', i);
    const auto end = j == std::string::npos ? name.size() : j;
    if (end > i) out.push_back(name.substr(i, end - i));
    i = end + 1;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& t) {
  std::string s;
  for (const auto& x : t) s += (s.empty() ? "" : " ") + x;
  return s;
}

inline int draw_age(std::mt19937_64& rng) {
  // decreasing triangular density on [0, 88)
  return static_cast<int>(88.0 * (1.0 - std::sqrt(1.0 - uniform01(rng))));
}

}  // namespace detail

inline SyntheticCommunity generate_community(std::size_t n_residents, std::size_t n_villages,
                                             const CorruptionProfile& profile, std::uint64_t seed,
                                             const NameBank& bank = east_african_bank(),
                                             std::string community_id = "synth") {
  if (n_residents < 10) fail(ErrorKind::config, "generate_community needs at least 10 residents");
  if (n_villages < 1) fail(ErrorKind::config, "generate_community needs at least one village");
  if (bank.female.empty() || bank.male.empty() || bank.family.empty())
    fail(ErrorKind::config, "name bank is incomplete");
  profile.validate();

  std::mt19937_64 rng(seed);
  using detail::pick;
  SyntheticCommunity out;
  auto& ds = out.dataset;
  ds.community_id = std::move(community_id);
  for (std::size_t v = 0; v < n_villages; ++v) ds.village_registry.insert(detail::village_name(v));

  // Village-level tendencies give the covariates some spatial structure.
  static const std::vector<std::string> education{"none", "primary", "secondary", "tertiary"};
  static const std::vector<std::string> occupation{"farmer", "fisher", "trader", "teacher", "other"};
  std::vector<std::size_t> village_edu(n_villages), village_occ(n_villages);
  for (std::size_t v = 0; v < n_villages; ++v) {
    village_edu[v] = uniform_below(rng, education.size());
    village_occ[v] = uniform_below(rng, occupation.size());
  }

  // Residents in households of 1-8.
  std::vector<std::size_t> village_of;
  std::size_t household = 0;
  while (ds.residents.size() < n_residents) {
    const std::size_t size = 1 + uniform_below(rng, 8);
    const std::size_t v = uniform_below(rng, n_villages);
    const std::string hid = detail::padded('H', ++household, 5);
    const std::string family = pick(rng, bank.family);
    const std::string wealth = std::to_string(1 + uniform_below(rng, 5));
    for (std::size_t k = 0; k < size && ds.residents.size() < n_residents; ++k) {
      ResidentRecord r;
      r.resident_id = detail::padded('R', ds.residents.size() + 1, 6);
      r.sex = bernoulli(rng, 0.5) ? Sex::female : Sex::male;
      const auto& given = *r.sex == Sex::female ? bank.female : bank.male;
      std::string name = pick(rng, given);
      if (bernoulli(rng, 0.3)) name += " " + pick(rng, given);
      name += " " + (bernoulli(rng, 0.5) ? family : pick(rng, bank.family));
      r.raw_name = std::move(name);
      r.age = detail::draw_age(rng);
      r.is_adult = *r.age >= kAdultAge;
      r.is_stable = bernoulli(rng, 0.9);
      r.village = detail::village_name(v);
      r.household_id = hid;
      r.covariates.education = education[bernoulli(rng, 0.6) ? village_edu[v] : uniform_below(rng, education.size())];
      r.covariates.occupation =
          occupation[bernoulli(rng, 0.6) ? village_occ[v] : uniform_below(rng, occupation.size())];
      r.covariates.wealth_index = wealth;
      r.covariates.alcohol_use = bernoulli(rng, *r.sex == Sex::male ? 0.4 : 0.15) ? "yes" : "no";
      if (*r.sex == Sex::female && r.is_adult) r.covariates.contraception_use = bernoulli(rng, 0.35) ? "yes" : "no";
      ds.residents.push_back(std::move(r));
      village_of.push_back(v);
    }
  }

  std::vector<std::vector<std::size_t>> adults_in(n_villages);
  std::vector<std::size_t> adults;
  for (std::size_t i = 0; i < ds.residents.size(); ++i)
    if (ds.residents[i].is_adult) {
      adults_in[village_of[i]].push_back(i);
      adults.push_back(i);
    }

  // Homophilous alter: same village four times in five, and within 10
  // years of age when a few tries find one.
  auto draw_alter = [&](std::size_t self) -> std::optional<std::size_t> {
    const auto& local = adults_in[village_of[self]];
    const auto& pool = local.size() >= 2 && bernoulli(rng, 0.8) ? local : adults;
    if (pool.size() < 2) return std::nullopt;
    std::optional<std::size_t> fallback;
    for (int tries = 0; tries < 12; ++tries) {
      const std::size_t a = pick(rng, pool);
      if (a == self) continue;
      if (std::abs(*ds.residents[a].age - *ds.residents[self].age) <= 10) return a;
      if (!fallback) fallback = a;
    }
    return fallback;
  };

  static const std::array<std::string_view, 4> prefixes{"Nyar", "Wuon", "Min", "Nya"};
  std::size_t ordinal = 0;
  for (std::size_t self : adults) {
    if (!bernoulli(rng, profile.participation_rate)) continue;
    for (std::size_t d = 0; d < kAllDomains.size(); ++d) {
      const unsigned n = std::min<unsigned>(poisson(rng, profile.domain_means[d]), kContactsPerDomainCap);
      std::vector<std::size_t> named;
      for (unsigned k = 0; k < n; ++k) {
        ContactRecord c;
        c.contact_id = contact_surrogate_id(ds.community_id, ++ordinal);
        c.namer_id = ds.residents[self].resident_id;
        c.domain = kAllDomains[d];
        TruthRow truth{c.contact_id, std::nullopt};
        std::optional<std::size_t> alter;
        if (!bernoulli(rng, profile.out_of_community_rate)) {
          alter = draw_alter(self);
          for (int retry = 0; retry < 4 && alter && std::find(named.begin(), named.end(), *alter) != named.end(); ++retry)
            alter = draw_alter(self);
        }
        if (alter) {
          const auto& a = ds.residents[*alter];
          named.push_back(*alter);
          truth.resident_id = a.resident_id;
          c.raw_name = a.raw_name;
          c.reported_age = a.age;
          c.reported_village = a.village;
        } else {
          const bool female = bernoulli(rng, 0.5);
          c.raw_name = pick(rng, female ? bank.female : bank.male) + " " + pick(rng, bank.family);
          c.reported_age = 15 + static_cast<int>(uniform_below(rng, 60));
          c.reported_village = bernoulli(rng, 0.5) ? std::optional<std::string>(pick(rng, outside_village_bank()))
                                                   : std::nullopt;
        }

        // corruption
        auto toks = detail::tokens(c.raw_name);
        if (toks.size() >= 2 && bernoulli(rng, profile.token_drop_rate)) toks.erase(toks.begin() + uniform_below(rng, toks.size()));
        for (auto& t : toks)
          if (bernoulli(rng, profile.typo_rate)) t = detail::typo(rng, t);
        if (bernoulli(rng, profile.nickname_prefix_rate)) toks.insert(toks.begin(), std::string(prefixes[uniform_below(rng, prefixes.size())]));
        c.raw_name = detail::join(toks);
        if (bernoulli(rng, profile.missing_age_rate)) {
          c.reported_age.reset();
        } else if (c.reported_age && profile.age_jitter_sd > 0) {
          const int jitter = static_cast<int>(std::lround(profile.age_jitter_sd * standard_normal(rng)));
          c.reported_age = std::clamp(*c.reported_age + jitter, 0, kMaxAge);
        }
        if (bernoulli(rng, profile.missing_village_rate)) c.reported_village.reset();
        else if (c.reported_village && truth.resident_id && bernoulli(rng, profile.village_typo_rate))
          c.reported_village = detail::typo(rng, *c.reported_village);

        ds.contacts.push_back(std::move(c));
        out.truth.push_back(std::move(truth));
      }
    }
  }
  return out;
}

inline csv::Table truth_table(const std::vector<TruthRow>& truth) {
  csv::Table t;
  t.header = {"contact_id", "true_resident_id"};
  for (const auto& r : truth) t.rows.push_back({r.contact_id, r.resident_id.value_or(std::string(kOutside))});
  return t;
}

// residents.csv, contacts.csv, villages.csv and truth.csv.
inline void write_synthetic(const SyntheticCommunity& s, const std::filesystem::path& dir) {
  export_dataset(s.dataset, dir);
  csv::write((dir / "truth.csv").string(), truth_table(s.truth));
}

inline std::vector<TruthRow> load_truth(const std::string& path) {
  const auto t = csv::read(path);
  const auto cc = t.column("contact_id"), cr = t.column("true_resident_id");
  if (!cc || !cr) fail(ErrorKind::schema, path + ": truth file needs contact_id and true_resident_id");
  std::vector<TruthRow> out;
  for (const auto& row : t.rows) {
    TruthRow r{row.at(*cc), std::nullopt};
    if (row.at(*cr) != kOutside) r.resident_id = row.at(*cr);
    out.push_back(std::move(r));
  }
  return out;
}

// Pipeline config for a generated synthetic community, as TOML text.
inline std::string synthetic_config_toml(const std::string& community_id, const std::filesystem::path& tables_dir) {
  toml::table data{{"community_id", community_id},
                   {"residents", "residents.csv"},
                   {"contacts", "contacts.csv"},
                   {"villages", "villages.csv"},
                   {"output_dir", "out"}};
  toml::table tables{{"nicknames", (tables_dir / "nicknames.csv").string()},
                     {"honorifics", (tables_dir / "honorifics.csv").string()},
                     {"sex_names", (tables_dir / "sex_names.csv").string()},
                     {"village_fixes", (tables_dir / "village_fixes.csv").string()}};
  toml::table weights;
  const auto def = MatchConfig::uniform();
  for (Field f : kAllFields) weights.insert(to_string(f), def.weights[static_cast<std::size_t>(f)]);
  toml::table match{{"weights", weights}, {"exceedance_quantile", def.exceedance_quantile}};
  toml::table root{{"data", data}, {"tables", tables}, {"match", match}};
  std::ostringstream os;
  os << root << '\n';
  return os.str();
}

}  // namespace linkforge
